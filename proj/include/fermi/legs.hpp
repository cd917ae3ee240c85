#pragma once

#include "fermi/types.hpp"

#include <functional>
#include <utility>

namespace fermi {

/// One way of closing the external lines of a normal-ordered word on the
/// smeared legs: every vertex with alpha_i = 1 pairs with a distinct left
/// leg, every vertex with beta_i = 1 with a distinct right leg.
struct LegContraction {
    int sign = 0;                               // parity of the two matching signs
    std::vector<std::pair<int, int>> left;      // (vertex, left leg)
    std::vector<std::pair<int, int>> right;     // (vertex, right leg)
    std::vector<int> left_rest, right_rest;     // legs left for the residual gram
};

/// Visits every contraction whose residual leg lists have equal length
/// (others have a vanishing residual gram). alpha/beta mark the creators and
/// annihilators actually present in the word, so callers mask them first.
void for_each_leg_contraction(const Bits& alpha, const Bits& beta, int km, int kp,
                              const std::function<void(const LegContraction&)>& fn);

}  // namespace fermi
