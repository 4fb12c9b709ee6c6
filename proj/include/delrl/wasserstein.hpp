#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace delrl {

/**
 * Exact L1-Wasserstein distance between two finite distributions on the real
 * line, computed as the integral of |F_p - F_q| over the sorted union of the
 * supports. Weights must each sum to 1 (within 1e-9).
 */
inline double wasserstein_1d(std::span<const double> points_p, std::span<const double> weights_p,
                             std::span<const double> points_q, std::span<const double> weights_q) {
    if (points_p.size() != weights_p.size() || points_q.size() != weights_q.size())
        throw std::invalid_argument("wasserstein_1d: points/weights size mismatch");
    if (points_p.empty() || points_q.empty())
        throw std::invalid_argument("wasserstein_1d: empty distribution");
    const double sum_p = std::accumulate(weights_p.begin(), weights_p.end(), 0.0);
    const double sum_q = std::accumulate(weights_q.begin(), weights_q.end(), 0.0);
    if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9)
        throw std::invalid_argument("wasserstein_1d: weights must sum to 1");

    struct Atom {
        double x;
        double wp;
        double wq;
    };
    std::vector<Atom> atoms;
    atoms.reserve(points_p.size() + points_q.size());
    for (std::size_t i = 0; i < points_p.size(); ++i) atoms.push_back({points_p[i], weights_p[i], 0.0});
    for (std::size_t i = 0; i < points_q.size(); ++i) atoms.push_back({points_q[i], 0.0, weights_q[i]});
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });

    double dist = 0.0;
    double cdf_gap = 0.0;  // F_p - F_q accumulated left of the sweep point
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        cdf_gap += atoms[i].wp - atoms[i].wq;
        dist += std::abs(cdf_gap) * (atoms[i + 1].x - atoms[i].x);
    }
    return dist;
}

/// W1 between two probability rows sharing one embedding (row i has mass at embedding[i]).
inline double wasserstein_1d(std::span<const double> p, std::span<const double> q,
                             std::span<const double> embedding) {
    if (p.size() != q.size() || p.size() != embedding.size())
        throw std::invalid_argument("wasserstein_1d: distributions must share the embedded support");
    return wasserstein_1d(embedding, p, embedding, q);
}

}  // namespace delrl
