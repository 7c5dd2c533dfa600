#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sizecalc {

using Rng = std::mt19937_64;

enum class StreamTag : std::uint64_t {
    Train = 1,
    Validate = 2,
    Bootstrap = 3,
    Reference = 4,
    Calibration = 5,
    CoxSnell = 6,
    AdjustedC = 7,
    Coefficients = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for the stream identified by (master seed, index, tag). Each component
// is folded through splitmix64 so nearby indices give unrelated streams.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index, StreamTag tag) noexcept
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
    return h;
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index, StreamTag tag)
{
    return Rng(stream_seed(master, index, tag));
}

inline double uniform01(Rng& rng)
{
    // 53 random bits -> [0,1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Marsaglia polar method; caches the second variate. Written out rather than
// using std::normal_distribution so streams are identical across standard
// library implementations.
class NormalSource {
public:
    double operator()(Rng& rng)
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01(rng) - 1.0;
            v = 2.0 * uniform01(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sizecalc
