#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nftaudit/kdtree.hpp"

namespace nftaudit::lof {

// Which argument's k-distance enters the reachability distance
// RD(a, b) = max(d_k(.), d(a, b)). The canonical algorithm uses the
// neighbor's (second argument's) k-distance; the alternative is kept for
// sensitivity analysis only.
enum class RdConvention { kNeighborKDistance, kQueryKDistance };

template <typename Scalar>
struct NeighborSet {
    Scalar k_distance = Scalar(0);  // Euclidean distance to the k-th neighbor
    // Members sorted by (squared distance, index); includes every point at
    // distance exactly k_distance, so size() may exceed k under ties.
    std::vector<std::pair<Scalar, Eigen::Index>> members;
};

template <typename Scalar>
struct Score {
    Scalar lrd = Scalar(0);  // > 0, +inf for points inside a duplicate cluster
    Scalar lof = Scalar(0);  // > 0
};

namespace detail {

template <typename Scalar>
void check_input(const PointMatrix<Scalar>& points, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (points.rows() <= k) throw std::invalid_argument("insufficient points for k");
    if (!points.allFinite()) throw std::invalid_argument("coordinates must be finite");
}

// Eqs. of the algorithm evaluated from precomputed neighborhoods. Shared by
// nothing else; the brute-force oracle re-derives everything from scratch.
template <typename Scalar>
std::vector<Score<Scalar>> scores_from_neighborhoods(
    const std::vector<NeighborSet<Scalar>>& neighborhoods, RdConvention rd) {
    const std::size_t n = neighborhoods.size();
    const Scalar inf = std::numeric_limits<Scalar>::infinity();

    std::vector<Score<Scalar>> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const NeighborSet<Scalar>& ns = neighborhoods[i];
        Scalar sum_rd = Scalar(0);
        for (const auto& [sq, p] : ns.members) {
            const Scalar direct = std::sqrt(sq);
            const Scalar kd = rd == RdConvention::kNeighborKDistance
                                  ? neighborhoods[static_cast<std::size_t>(p)].k_distance
                                  : ns.k_distance;
            sum_rd += std::max(kd, direct);
        }
        scores[i].lrd = sum_rd == Scalar(0) ? inf
                                            : static_cast<Scalar>(ns.members.size()) / sum_rd;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const NeighborSet<Scalar>& ns = neighborhoods[i];
        Scalar sum_lrd = Scalar(0);
        for (const auto& [sq, p] : ns.members) sum_lrd += scores[static_cast<std::size_t>(p)].lrd;
        const Scalar mean_lrd = sum_lrd / static_cast<Scalar>(ns.members.size());
        Scalar lof = mean_lrd / scores[i].lrd;
        // inf/inf: a point inside a duplicate cluster is not an outlier.
        if (std::isnan(lof)) lof = Scalar(1);
        scores[i].lof = lof;
    }
    return scores;
}

}  // namespace detail

// Exact k-nearest neighborhoods (Euclidean, ties at the k-distance included,
// a point is never its own neighbor). Throws std::invalid_argument when
// rows(points) <= k.
template <typename Scalar>
std::vector<NeighborSet<Scalar>> knn(const PointMatrix<Scalar>& points, int k) {
    detail::check_input(points, k);
    const Eigen::Index n = points.rows();
    KdTree<Scalar> tree(points);

    std::vector<NeighborSet<Scalar>> result(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        NeighborSet<Scalar>& ns = result[static_cast<std::size_t>(i)];
        const Scalar kth_sq = tree.kth_sq_distance(i, k);
        tree.radius_search(i, kth_sq, ns.members);
        std::sort(ns.members.begin(), ns.members.end());
        ns.k_distance = std::sqrt(kth_sq);
    }
    return result;
}

// RD(a, b) = max(d_k(b), d(a, b)) under the canonical convention.
template <typename Scalar>
Scalar reachability_distance(const PointMatrix<Scalar>& points,
                             const std::vector<NeighborSet<Scalar>>& neighborhoods,
                             Eigen::Index a, Eigen::Index b,
                             RdConvention rd = RdConvention::kNeighborKDistance) {
    if (a < 0 || a >= points.rows() || b < 0 || b >= points.rows())
        throw std::invalid_argument("unknown point index");
    const Scalar direct = std::sqrt((points.row(a) - points.row(b)).squaredNorm());
    const Scalar kd = rd == RdConvention::kNeighborKDistance
                          ? neighborhoods[static_cast<std::size_t>(b)].k_distance
                          : neighborhoods[static_cast<std::size_t>(a)].k_distance;
    return std::max(kd, direct);
}

// LOF over all rows, kd-tree accelerated. Deterministic: depends only on the
// point set, not on row order of evaluation.
template <typename Scalar>
std::vector<Score<Scalar>> lof_scores(const PointMatrix<Scalar>& points, int k,
                                      RdConvention rd = RdConvention::kNeighborKDistance) {
    return detail::scores_from_neighborhoods(knn(points, k), rd);
}

// Reference implementation: O(n^2) scan, no spatial index. Kept deliberately
// separate from lof_scores() so the two can check each other.
template <typename Scalar>
std::vector<Score<Scalar>> lof_scores_bruteforce(
    const PointMatrix<Scalar>& points, int k,
    RdConvention rd = RdConvention::kNeighborKDistance) {
    detail::check_input(points, k);
    const Eigen::Index n = points.rows();
    const Scalar inf = std::numeric_limits<Scalar>::infinity();

    // Full pairwise neighborhoods by direct enumeration.
    std::vector<Scalar> k_distance(static_cast<std::size_t>(n));
    std::vector<std::vector<std::pair<Scalar, Eigen::Index>>> members(
        static_cast<std::size_t>(n));
    std::vector<std::pair<Scalar, Eigen::Index>> dists;
    for (Eigen::Index i = 0; i < n; ++i) {
        dists.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.emplace_back((points.row(i) - points.row(j)).squaredNorm(), j);
        }
        std::sort(dists.begin(), dists.end());
        const Scalar kth_sq = dists[static_cast<std::size_t>(k - 1)].first;
        k_distance[static_cast<std::size_t>(i)] = std::sqrt(kth_sq);
        auto& mem = members[static_cast<std::size_t>(i)];
        for (const auto& d : dists) {
            if (d.first > kth_sq) break;
            mem.push_back(d);
        }
    }

    std::vector<Score<Scalar>> scores(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Scalar sum_rd = Scalar(0);
        for (const auto& [sq, p] : members[static_cast<std::size_t>(i)]) {
            const Scalar direct = std::sqrt(sq);
            const Scalar kd = rd == RdConvention::kNeighborKDistance
                                  ? k_distance[static_cast<std::size_t>(p)]
                                  : k_distance[static_cast<std::size_t>(i)];
            sum_rd += std::max(kd, direct);
        }
        scores[static_cast<std::size_t>(i)].lrd =
            sum_rd == Scalar(0)
                ? inf
                : static_cast<Scalar>(members[static_cast<std::size_t>(i)].size()) / sum_rd;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& mem = members[static_cast<std::size_t>(i)];
        Scalar sum_lrd = Scalar(0);
        for (const auto& [sq, p] : mem) sum_lrd += scores[static_cast<std::size_t>(p)].lrd;
        Scalar lof = (sum_lrd / static_cast<Scalar>(mem.size())) /
                     scores[static_cast<std::size_t>(i)].lrd;
        if (std::isnan(lof)) lof = Scalar(1);
        scores[static_cast<std::size_t>(i)].lof = lof;
    }
    return scores;
}

}  // namespace nftaudit::lof
