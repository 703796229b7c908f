#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nftaudit::lof {

template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Exact kd-tree over the rows of a point matrix. Used as an internal
// accelerator for kNN; results must be identical to a linear scan, so all
// candidate distances are evaluated with the same expression the brute-force
// path uses.
template <typename Scalar>
class KdTree {
public:
    using Index = Eigen::Index;

    explicit KdTree(const PointMatrix<Scalar>& points, int leaf_size = 16)
        : points_(points), leaf_size_(std::max(1, leaf_size)) {
        const Index n = points_.rows();
        order_.resize(static_cast<std::size_t>(n));
        std::iota(order_.begin(), order_.end(), Index{0});
        if (n > 0) root_ = build(0, n);
    }

    Scalar sq_dist(Index a, Index b) const {
        return (points_.row(a) - points_.row(b)).squaredNorm();
    }

    // Squared distance to the k-th nearest row, excluding `self`.
    Scalar kth_sq_distance(Index self, int k) const {
        std::priority_queue<Scalar> heap;
        if (root_ >= 0) search_kth(root_, self, k, heap);
        if (static_cast<int>(heap.size()) < k)
            throw std::invalid_argument("insufficient points for k");
        return heap.top();
    }

    // All rows j != self with sq_dist(self, j) <= radius_sq, as (sq, j).
    void radius_search(Index self, Scalar radius_sq,
                       std::vector<std::pair<Scalar, Index>>& out) const {
        out.clear();
        if (root_ >= 0) search_radius(root_, self, radius_sq, out);
    }

private:
    struct Node {
        Index begin = 0, end = 0;   // range in order_ (leaf only)
        int split_dim = -1;
        Scalar split_val = Scalar(0);
        int left = -1, right = -1;
        bool is_leaf() const { return left < 0; }
    };

    int build(Index begin, Index end) {
        Node node;
        node.begin = begin;
        node.end = end;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        if (end - begin <= leaf_size_) return id;

        // Split on the widest dimension at the median.
        int dim = 0;
        Scalar best_spread = Scalar(-1);
        for (int d = 0; d < points_.cols(); ++d) {
            Scalar lo = points_(order_[begin], d), hi = lo;
            for (Index i = begin + 1; i < end; ++i) {
                const Scalar v = points_(order_[i], d);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                dim = d;
            }
        }
        if (best_spread <= Scalar(0)) return id;  // all points coincide: keep as leaf

        const Index mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](Index a, Index b) { return points_(a, dim) < points_(b, dim); });
        nodes_[id].split_dim = dim;
        nodes_[id].split_val = points_(order_[mid], dim);
        const int left = build(begin, mid);
        const int right = build(mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    void search_kth(int node_id, Index self, int k, std::priority_queue<Scalar>& heap) const {
        const Node& node = nodes_[node_id];
        if (node.is_leaf()) {
            for (Index i = node.begin; i < node.end; ++i) {
                const Index j = order_[i];
                if (j == self) continue;
                const Scalar d = sq_dist(self, j);
                if (static_cast<int>(heap.size()) < k) {
                    heap.push(d);
                } else if (d < heap.top()) {
                    heap.pop();
                    heap.push(d);
                }
            }
            return;
        }
        const Scalar diff = points_(self, node.split_dim) - node.split_val;
        const int near = diff < Scalar(0) ? node.left : node.right;
        const int far = diff < Scalar(0) ? node.right : node.left;
        search_kth(near, self, k, heap);
        if (static_cast<int>(heap.size()) < k || diff * diff <= heap.top())
            search_kth(far, self, k, heap);
    }

    void search_radius(int node_id, Index self, Scalar radius_sq,
                       std::vector<std::pair<Scalar, Index>>& out) const {
        const Node& node = nodes_[node_id];
        if (node.is_leaf()) {
            for (Index i = node.begin; i < node.end; ++i) {
                const Index j = order_[i];
                if (j == self) continue;
                const Scalar d = sq_dist(self, j);
                if (d <= radius_sq) out.emplace_back(d, j);
            }
            return;
        }
        const Scalar diff = points_(self, node.split_dim) - node.split_val;
        const int near = diff < Scalar(0) ? node.left : node.right;
        const int far = diff < Scalar(0) ? node.right : node.left;
        search_radius(near, self, radius_sq, out);
        if (diff * diff <= radius_sq) search_radius(far, self, radius_sq, out);
    }

    const PointMatrix<Scalar>& points_;
    int leaf_size_;
    std::vector<Index> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace nftaudit::lof
