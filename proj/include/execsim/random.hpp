#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace execsim::rng {

// Counter-based Gaussian generation.
//
// Every draw is a pure function of (key, index): a stream key is hashed from
// the seed and a stream tag, the index-th splitmix64 output of that key is
// turned into a 52-bit uniform on the open interval (0, 1), and the uniform is
// mapped through the inverse normal CDF (Wichura, AS241 PPND16). Only integer
// arithmetic, +, *, /, sqrt and log are involved, so sequences are stable
// across compilers and standard libraries.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// splitmix64 step applied to a single value.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    return mix64(x + kGolden);
}

enum class StreamTag : std::uint64_t {
    price_noise = 0x45505331ULL,        // "EPS1"
    information_noise = 0x45544131ULL,  // "ETA1"
};

/// Seed of the episode-th substream of a Monte Carlo study.
inline constexpr std::uint64_t episode_seed(std::uint64_t base_seed,
                                            std::uint64_t episode_index) noexcept {
    return splitmix64(splitmix64(base_seed) ^ mix64(episode_index + 1));
}

inline constexpr std::uint64_t stream_key(std::uint64_t seed, StreamTag tag) noexcept {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tag)));
}

/// index-th raw 64-bit output of the splitmix64 sequence started at key.
inline constexpr std::uint64_t draw_bits(std::uint64_t key, std::uint64_t index) noexcept {
    return mix64(key + (index + 1) * kGolden);
}

/// Uniform on (0, 1); never returns 0 or 1.
inline constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
    // 52 bits keep k + 0.5 exact, so the top value stays below 1
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Inverse standard normal CDF, AS241 PPND16 (about 1e-16 relative accuracy).
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p must lie in (0, 1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                      0.24178072517745061177) * r + 1.27045825245236838258) * r +
                    3.64784832476320460504) * r + 5.7694972214606914055) * r +
                  4.6303378461565452959) * r + 1.42343711074968357734) /
                (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                      0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                    0.68976733498510000455) * r + 1.6763848301838038494) * r +
                  2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                    0.29656057182850489123) * r + 1.7848265399172913358) * r +
                  5.4637849111641143699) * r + 6.6579046435011037772) /
                (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                      1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                    0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                  0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

/// index-th standard normal draw of the stream identified by key.
inline double standard_normal(std::uint64_t key, std::uint64_t index) {
    return inverse_normal_cdf(bits_to_open_unit(draw_bits(key, index)));
}

}  // namespace execsim::rng
