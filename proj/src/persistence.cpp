#include "khan/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "khan/bhq.hpp"
#include "khan/error.hpp"
#include "khan/homology.hpp"

namespace khan {

namespace {

struct Scored {
    double p;
    Edge e;
};

std::vector<Scored> scored_pairs(const EdgeStatistics& stats, double mu, std::vector<std::string>* warnings) {
    std::vector<Scored> out;
    out.reserve(static_cast<std::size_t>(stats.d) * (stats.d - 1) / 2);
    for (int u = 0; u < stats.d; ++u)
        for (int v = u + 1; v < stats.d; ++v) {
            const double s = stats.sigma_hat(u, v);
            if (!(s > 0.0)) {
                if (warnings)
                    warnings->push_back("zero variance on edge (" + std::to_string(u) + "," + std::to_string(v) +
                                        "); treated as p = 1");
                out.push_back({1.0, Edge(u, v)});
                continue;
            }
            out.push_back({filtered_pvalue(stats.what(u, v), s, stats.n, mu, stats.scenario), Edge(u, v)});
        }
    return out;
}

bool same_selection(const DgsOutput& a, const PersistenceStep& b) {
    return a.rank == b.rank && a.selected_edges == b.edges;
}

PersistenceStep to_step(const DgsOutput& o) { return {o.mu, o.selected_edges, o.rank, o.alpha_hat}; }

}  // namespace

DgsOutput dgs(const EdgeStatistics& stats, double mu, double q, int max_dim) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0,1)");
    if (!std::isfinite(mu)) throw ConfigError("filtration level must be finite");
    DgsOutput out;
    out.mu = mu;
    out.q = q;
    out.max_dim = max_dim;
    out.jbar = complete_graph_cycle_rank(stats.d, max_dim);

    auto pairs = scored_pairs(stats, mu, &out.warnings);
    std::erase_if(pairs, [&](const Scored& s) { return !(s.p < q); });
    std::sort(pairs.begin(), pairs.end(), [](const Scored& a, const Scored& b) {
        return a.p != b.p ? a.p < b.p : a.e < b.e;
    });

    CycleRankTracker tracker(stats.d, max_dim);
    std::vector<std::uint64_t> prefix_rank;
    prefix_rank.reserve(pairs.size());
    for (const auto& s : pairs) {
        const std::uint64_t ell = tracker.add_edge(s.e);
        out.generator_pvalues.insert(out.generator_pvalues.end(), ell, s.p);
        out.processed.push_back(s.e);
        prefix_rank.push_back(tracker.rank());
    }

    const BhResult bh = bh_step_up(out.generator_pvalues, q, static_cast<double>(out.jbar), false);
    out.alpha_hat = bh.alpha_hat;
    out.j_max = bh.j_max;

    std::size_t cut = 0;
    while (cut < pairs.size() && pairs[cut].p < out.alpha_hat) ++cut;
    out.selected_edges = EdgeSet(std::vector<Edge>(out.processed.begin(), out.processed.begin() + cut));
    out.rank = cut == 0 ? 0 : prefix_rank[cut - 1];
    return out;
}

PersistenceResult khan_select(const EdgeStatistics& stats, double mu0, double mu1, double q, int max_dim) {
    if (!(mu0 < mu1)) throw ConfigError("mu0 must be smaller than mu1");
    if (!std::isfinite(mu0)) throw ConfigError("mu0 must be finite");
    PersistenceResult res;
    res.mu0 = mu0;
    res.mu1 = mu1;
    res.q = q;
    res.max_dim = max_dim;
    res.scenario = stats.scenario;

    DgsOutput cur = dgs(stats, mu0, q, max_dim);
    res.jbar = cur.jbar;
    res.warnings = cur.warnings;
    res.steps.push_back(to_step(cur));

    const double split = stats.scenario == Scenario::TwoSided ? 2.0 : 1.0;
    // A step can hold edges at rank 0 when a generator's p-value sits exactly on the threshold.
    while (res.steps.back().rank > 0 || !res.steps.back().edges.empty()) {
        const PersistenceStep& last = res.steps.back();
        const double alpha = q * static_cast<double>(last.rank) / (split * static_cast<double>(res.jbar));
        double next = std::numeric_limits<double>::infinity();
        for (const Edge& e : last.edges) {
            if (last.rank == 0) break;
            const double s = stats.sigma(e);
            if (!(s > 0.0)) continue;
            next = std::min(next, lower_conf_bound(stats.weight(e), s, stats.n, alpha, stats.scenario));
        }

        // lo always holds a level with the current selection, hi one where it differs.
        auto differs = [&](double mu, DgsOutput& o) {
            o = dgs(stats, mu, q, max_dim);
            return !same_selection(o, last);
        };
        DgsOutput cand;
        double lo = last.mu;
        double hi = 0.0;
        bool found = false;
        if (std::isfinite(next) && next > last.mu + 1e-12) {
            if (differs(next, cand)) {
                hi = next;
                found = true;
            } else {
                lo = next;
            }
        }
        if (found) {
            // The closed form can overshoot by a few ulps; walk down until the selection is back.
            double step = hi - std::nextafter(hi, -std::numeric_limits<double>::infinity());
            for (;;) {
                const double probe = std::max(last.mu, hi - step);
                if (probe <= last.mu) break;
                DgsOutput o;
                if (!differs(probe, o)) {
                    lo = probe;
                    break;
                }
                hi = probe;
                cand = std::move(o);
                step *= 2.0;
            }
        } else {
            ++res.guarded_steps;
            if (lo > mu1) break;
            double step = std::max(1e-10, std::abs(lo) * 1e-12);
            hi = lo + step;
            bool beyond = false;
            while (!differs(hi, cand)) {
                lo = hi;
                if (lo > mu1) {
                    beyond = true;
                    break;
                }
                step *= 2.0;
                hi = lo + step;
                if (!std::isfinite(hi)) throw NumericError("change-point search diverged");
            }
            if (beyond) break;
        }
        while (std::nextafter(lo, hi) < hi) {
            const double mid = lo + (hi - lo) / 2.0;
            if (mid <= lo || mid >= hi) break;
            DgsOutput at_mid;
            if (differs(mid, at_mid)) {
                hi = mid;
                cand = std::move(at_mid);
            } else {
                lo = mid;
            }
        }
        if (cand.mu > mu1) break;
        if (!cand.selected_edges.empty() && !last.edges.contains_all(cand.selected_edges))
            throw NumericError("selected edge sets failed to shrink along the filtration");
        res.steps.push_back(to_step(cand));
    }
    return res;
}

std::pair<EdgeSet, std::uint64_t> evaluate_at(const PersistenceResult& r, double mu) {
    if (mu < r.mu0) throw ConfigError("evaluate_at: mu below mu0");
    if (mu > r.mu1 || r.steps.empty()) return {EdgeSet{}, 0};
    auto it = std::upper_bound(r.steps.begin(), r.steps.end(), mu,
                               [](double x, const PersistenceStep& s) { return x < s.mu; });
    --it;
    return {it->edges, it->rank};
}

std::vector<Bar> barcode(const PersistenceResult& r) {
    std::vector<Bar> bars;
    for (std::size_t t = 1; t < r.steps.size(); ++t) {
        const auto prev = r.steps[t - 1].rank;
        const auto now = r.steps[t].rank;
        if (now < prev) bars.push_back({r.mu0, r.steps[t].mu, prev - now, false});
    }
    if (!r.steps.empty() && r.steps.back().rank > 0)
        bars.push_back({r.mu0, r.mu1, r.steps.back().rank, true});
    return bars;
}

std::vector<double> ufdp_grid(const PersistenceResult& r, const WeightedGraph& truth, Scenario scenario,
                              double mu0, double mu1) {
    std::vector<double> pts{mu0};
    for (const auto& s : r.steps)
        if (s.mu >= mu0 && s.mu <= mu1) pts.push_back(s.mu);
    for (int u = 0; u < truth.d(); ++u)
        for (int v = u + 1; v < truth.d(); ++v) {
            const double w = scenario == Scenario::TwoSided ? std::fabs(truth.weight(u, v)) : truth.weight(u, v);
            if (w > mu0 && w <= mu1) pts.push_back(w);
        }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i + 1 < n; ++i) pts.push_back(pts[i] + (pts[i + 1] - pts[i]) / 2.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double ufdp(const PersistenceResult& r, const WeightedGraph& truth, Scenario scenario, int max_dim, double mu0,
            double mu1) {
    double worst = 0.0;
    for (double mu : ufdp_grid(r, truth, scenario, mu0, mu1)) {
        const auto [edges, rank] = evaluate_at(r, mu);
        if (rank == 0) continue;
        const EdgeSet star = filter_edges(truth, mu, scenario);
        const auto both = intersection_cycle_rank(star, edges, truth.d(), max_dim);
        worst = std::max(worst, static_cast<double>(rank - std::min(both, rank)) / static_cast<double>(rank));
    }
    return worst;
}

double homology_power(const PersistenceResult& r, const WeightedGraph& truth, Scenario scenario, int max_dim,
                      double delta, const std::vector<double>& grid) {
    if (grid.empty()) return 0.0;
    double sum = 0.0;
    for (double mu : grid) {
        const EdgeSet star = filter_edges(truth, mu + delta, scenario);
        const auto truth_rank = cycle_rank(star, truth.d(), max_dim);
        const auto edges = evaluate_at(r, mu).first;
        const auto hit = intersection_cycle_rank(star, edges, truth.d(), max_dim);
        sum += static_cast<double>(hit) / static_cast<double>(std::max<std::uint64_t>(1, truth_rank));
    }
    return sum / static_cast<double>(grid.size());
}

namespace {

nlohmann::json real_or_inf(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

}  // namespace

void write_persistence_json(std::ostream& out, const PersistenceResult& r) {
    nlohmann::json j;
    j["mu0"] = r.mu0;
    j["mu1"] = real_or_inf(r.mu1);
    j["q"] = r.q;
    j["K"] = r.max_dim;
    j["jbar"] = r.jbar;
    j["scenario"] = to_string(r.scenario);
    j["guarded_steps"] = r.guarded_steps;
    j["steps"] = nlohmann::json::array();
    for (const auto& s : r.steps) {
        nlohmann::json e = nlohmann::json::array();
        for (const auto& x : s.edges) e.push_back({x.u, x.v});
        j["steps"].push_back({{"mu", s.mu}, {"rank", s.rank}, {"alpha_hat", s.alpha_hat}, {"edges", e}});
    }
    j["warnings"] = r.warnings;
    out << j.dump(2) << '\n';
}

void write_barcode_csv(std::ostream& out, const std::vector<Bar>& bars) {
    out << "birth,death,multiplicity,censored\n";
    const auto old = out.precision(17);
    for (const auto& b : bars)
        out << b.birth << ',' << b.death << ',' << b.multiplicity << ',' << (b.censored ? 1 : 0) << '\n';
    out.precision(old);
}

}  // namespace khan
