#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mstatic/geometry.hpp"

namespace mstatic {

struct Assignment {
    std::vector<int> to_b;  // to_b[i] = index into b matched with a[i]
    double total_cost = 0.0;
};

/// Minimal total squared distance bipartite matching by exhaustive
/// permutation search. Optimal; cost grows as K!, intended for the small
/// target counts of this simulator.
inline Assignment optimal_assignment(std::span<const Position2D> a, std::span<const Position2D> b) {
    if (a.size() != b.size()) throw std::invalid_argument("optimal_assignment: size mismatch");
    if (a.empty()) return {};
    const std::size_t k = a.size();
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    Assignment best;
    best.total_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const Vec2 d = a[i] - b[static_cast<std::size_t>(perm[i])];
            cost += dot(d, d);
        }
        if (cost < best.total_cost) {
            best.total_cost = cost;
            best.to_b = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace mstatic
