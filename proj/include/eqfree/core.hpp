#ifndef EQFREE_CORE_HPP
#define EQFREE_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqfree {

// Error hierarchy mirroring the failure classes of the pipeline stages.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GeometryError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct LineageError : Error { using Error::Error; };

// Compensated (Kahan) summation. Column sums feed the unit-mass
// invariants, so plain left-to-right accumulation is not good enough.
inline double kahan_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

class KahanAccumulator {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }
private:
    double s_ = 0.0, c_ = 0.0;
};

// splitmix64: tiny, well-mixed, and identical on every platform. The
// library never uses std::uniform_*_distribution because their output
// is implementation-defined and would break byte-level reproducibility.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // modulo bias is ~n/2^64, irrelevant at our n
        return next_u64() % n;
    }

    // standard normal via Box-Muller
    double next_gaussian() {
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

// Deterministic stream derivation: child seed from (parent seed, tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    SplitMix64 mix(seed ^ (0x6a09e667f3bcc909ULL + tag * 0x9e3779b97f4a7c15ULL));
    return mix.next_u64();
}

// Linear-interpolation percentile (q in [0,1]) on an unsorted sample.
inline double percentile(std::vector<double> xs, double q) {
    if (xs.empty()) throw SizeError("percentile: empty sample");
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    double r = q * static_cast<double>(xs.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(r));
    auto hi = static_cast<std::size_t>(std::ceil(r));
    double w = r - static_cast<double>(lo);
    return (1.0 - w) * xs[lo] + w * xs[hi];
}

inline double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw SizeError("mean_of: empty sample");
    return kahan_sum(xs) / static_cast<double>(xs.size());
}

// 17 significant digits: lossless float64 text round-trip for CSV output.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace eqfree

#endif  // EQFREE_CORE_HPP
