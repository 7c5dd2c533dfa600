#include <iostream>

#include "sizecalc/cli.hpp"

int main(int argc, char** argv)
{
    return sizecalc::cli::run(argc, argv, std::cout, std::cerr);
}
