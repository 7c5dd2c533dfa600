#include <fstream>
#include <sstream>

#include "sizecalc/cli.hpp"

namespace sizecalc::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::map<std::string, std::string> parse_scenario(std::istream& in, const std::string& origin)
{
    std::map<std::string, std::string> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(line_no);
        if (eq == std::string::npos)
            throw UsageError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw UsageError(where + ": empty key or value");
        // accept both "target_slope" and "target-slope"
        for (char& c : key)
            if (c == '_')
                c = '-';
        if (!values.emplace(key, value).second)
            throw UsageError(where + ": duplicate key '" + key + "'");
    }
    return values;
}

std::map<std::string, std::string> read_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open scenario file " + path);
    return parse_scenario(in, path);
}

} // namespace sizecalc::cli
