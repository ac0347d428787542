#include "khan/bhq.hpp"

#include <algorithm>
#include <numeric>

#include "khan/error.hpp"

namespace khan {

namespace {

void check_args(std::span<const double> pvalues, double q, double total) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("BH level q must lie in (0,1)");
    if (!(total >= static_cast<double>(pvalues.size())))
        throw ConfigError("BH denominator must be at least the number of p-values");
}

}  // namespace

BhResult bh_step_up(std::span<const double> pvalues, double q, double total, bool order_strict) {
    check_args(pvalues, q, total);
    std::vector<std::size_t> order(pvalues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    BhResult res;
    for (std::size_t j = 1; j <= order.size(); ++j) {
        const double p = pvalues[order[j - 1]];
        const double bound = q * static_cast<double>(j) / total;
        if (order_strict ? p < bound : p <= bound) res.j_max = j;
    }
    res.alpha_hat = q * static_cast<double>(res.j_max) / total;
    if (res.j_max == 0) return res;
    for (std::size_t idx : order) {
        if (pvalues[idx] < res.alpha_hat)
            res.rejected.push_back(idx);
        else
            break;
    }
    return res;
}

double bh_threshold_sup_oracle(std::span<const double> pvalues, double q, double total) {
    check_args(pvalues, q, total);
    auto rejections_at = [&](double a) {
        std::size_t r = 0;
        for (double p : pvalues)
            if (p < a) ++r;
        return r;
    };

    double best = 0.0;
    // Grid candidates a = q j / total: the ratio condition a * total / R <= q is j <= R.
    const auto jt = static_cast<std::size_t>(total);
    for (std::size_t j = 1; j <= jt; ++j) {
        const double a = q * static_cast<double>(j) / total;
        const std::size_t r = rejections_at(a);
        if (r > 0 && j <= r && a > best) best = a;
    }
    for (double a : pvalues) {
        if (!(a > 0.0)) continue;
        const std::size_t r = rejections_at(a);
        if (r > 0 && a * total <= q * static_cast<double>(r) && a > best) best = a;
    }
    return best;
}

}  // namespace khan
