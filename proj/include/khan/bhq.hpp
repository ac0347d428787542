#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace khan {

struct BhResult {
    double alpha_hat = 0.0;
    std::size_t j_max = 0;
    /// Indices into the input with p < alpha_hat, ordered by (p, index).
    std::vector<std::size_t> rejected;
};

/// Benjamini-Hochberg step-up. `total` may exceed pvalues.size(): the missing
/// hypotheses carry p = 1 and only enter the denominator. With
/// `order_strict` the scan uses p_(j) < q j / total, otherwise <=.
BhResult bh_step_up(std::span<const double> pvalues, double q, double total, bool order_strict);

/// Reference evaluation of sup{alpha > 0 : alpha * total / #{p_j < alpha} <= q}
/// by direct scan of the candidate thresholds. Quadratic; meant for tests.
double bh_threshold_sup_oracle(std::span<const double> pvalues, double q, double total);

}  // namespace khan
