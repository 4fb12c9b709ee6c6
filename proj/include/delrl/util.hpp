#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace delrl {

using Rng = std::mt19937_64;

inline double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double theta) {
    const double two_pi = 2.0 * M_PI;
    theta = std::fmod(theta + M_PI, two_pi);
    if (theta <= 0.0) theta += two_pi;
    return theta - M_PI;
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

/// Sample mean and (population-of-sample, ddof=1) standard deviation.
inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    out.count = xs.size();
    if (xs.empty()) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.stddev = std::sqrt(ss / double(xs.size() - 1));
    }
    return out;
}

inline double standard_error(const MeanStd& ms) {
    if (ms.count < 2) return 0.0;
    return ms.stddev / std::sqrt(double(ms.count));
}

/// FNV-1a over bytes; used to stamp artifacts with a config fingerprint.
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[std::size_t(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

/// Smallest horizon H with gamma^H * scale / (1 - gamma) < tail.
inline int horizon_for_tail(double gamma, double scale, double tail) {
    if (gamma <= 0.0) return 1;
    if (scale <= 0.0) return 1;
    double h = std::log(tail * (1.0 - gamma) / scale) / std::log(gamma);
    return std::max(1, int(std::ceil(h)));
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace delrl
