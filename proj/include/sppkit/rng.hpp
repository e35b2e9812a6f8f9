#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sppkit {

// Counter-based pseudo random numbers. Every draw is a pure function of
// (seed, tag, lane, counter), so per-agent streams can be evaluated in any
// order and a trajectory is reproducible from its seed alone.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace stream_tag {
inline constexpr std::uint64_t noise = 0x01;
inline constexpr std::uint64_t init_heading = 0x02;
inline constexpr std::uint64_t init_position = 0x03;
inline constexpr std::uint64_t adversary = 0x04;
inline constexpr std::uint64_t radius = 0x05;
inline constexpr std::uint64_t misc = 0x06;
} // namespace stream_tag

class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t lane = 0)
        : key_(splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) + splitmix64(tag ^ 0xbb67ae8584caa73bULL) +
                          0x9e3779b97f4a7c15ULL * (lane + 1))) {}

    std::uint64_t bits(std::uint64_t counter) const { return splitmix64(key_ ^ splitmix64(counter + 0x2545f4914f6cdd1dULL)); }

    // [0, 1)
    double uniform01(std::uint64_t counter) const { return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53; }

    // (0, 1)
    double uniform01_open(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(std::uint64_t counter, double lo, double hi) const { return lo + (hi - lo) * uniform01(counter); }

    // Standard normal via Box-Muller; consumes lanes 2k and 2k+1 of the counter space.
    double gaussian(std::uint64_t counter) const {
        const double u1 = uniform01_open(2 * counter);
        const double u2 = uniform01(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t key_;
};

// Convenience wrapper when draw order does not matter (tests, state sampling).
class SequentialRng {
  public:
    explicit SequentialRng(std::uint64_t seed, std::uint64_t tag = stream_tag::misc) : stream_(seed, tag) {}

    double uniform01() { return stream_.uniform01(next_++); }
    double uniform(double lo, double hi) { return stream_.uniform(next_++, lo, hi); }
    double gaussian() { return stream_.gaussian(gauss_next_++ + 0x8000000000000000ULL / 2); }
    std::uint64_t bits() { return stream_.bits(next_++); }

  private:
    RandomStream stream_;
    std::uint64_t next_ = 0;
    std::uint64_t gauss_next_ = 0;
};

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step. Accurate to ~1e-13 over (0, 1).
inline double norm_ppf(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

} // namespace sppkit
