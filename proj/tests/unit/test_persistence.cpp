#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "khan/error.hpp"
#include "khan/homology.hpp"
#include "khan/normal.hpp"
#include "khan/persistence.hpp"
#include "khan/rng.hpp"
#include "khan/simulation.hpp"
#include "oracles.hpp"

using namespace khan;

namespace {

// One-sided statistics with n = 1 and sigma = 1: the edge p-value at mu = 0 is `p`.
EdgeStatistics stats_from_pvalues(int d, const std::vector<std::pair<Edge, double>>& p, double rest = 0.9) {
    EdgeStatistics s;
    s.d = d;
    s.n = 1;
    s.scenario = Scenario::OneSided;
    s.what = Eigen::MatrixXd::Constant(d, d, normal_quantile(1.0 - rest));
    s.sigma_hat = Eigen::MatrixXd::Ones(d, d);
    for (auto [e, pv] : p) s.what(e.u, e.v) = s.what(e.v, e.u) = normal_quantile(1.0 - pv);
    s.what.diagonal().setZero();
    s.sigma_hat.diagonal().setZero();
    return s;
}

PersistenceResult manual_result(std::vector<std::pair<double, std::uint64_t>> steps, double mu1) {
    PersistenceResult r;
    r.mu0 = steps.front().first;
    r.mu1 = mu1;
    for (auto [mu, rank] : steps) r.steps.push_back({mu, EdgeSet{}, rank, 0.0});
    return r;
}

double fdp_at(const PersistenceResult& r, const WeightedGraph& truth, Scenario sc, int k, double mu) {
    auto [edges, rank] = evaluate_at(r, mu);
    if (rank == 0) return 0.0;
    auto both = oracle::kernel_intersection_rank(filter_edges(truth, mu, sc), edges, truth.d(), k);
    return static_cast<double>(rank - std::min<std::uint64_t>(both, rank)) / static_cast<double>(rank);
}

WeightedGraph truth_from(const EdgeStatistics& s, Rng& rng) {
    WeightedGraph g(s.d);
    for (int u = 0; u < s.d; ++u)
        for (int v = u + 1; v < s.d; ++v)
            // perturbed estimate so truth and selection disagree somewhere
            g.set_weight(u, v, rng.bernoulli(0.7) ? s.what(u, v) + rng.uniform(-0.15, 0.15) : 0.0);
    return g;
}

}  // namespace

TEST_CASE("dgs with nothing below q") {
    auto s = stats_from_pvalues(4, {}, 0.5);
    auto o = dgs(s, 0.0, 0.05, 2);
    CHECK(o.selected_edges.empty());
    CHECK(o.rank == 0);
    CHECK(o.alpha_hat == 0.0);
    CHECK(o.processed.empty());
}

TEST_CASE("dgs on a triangle") {
    auto s = stats_from_pvalues(3, {{Edge(0, 1), 1e-9}, {Edge(1, 2), 2e-9}, {Edge(0, 2), 3e-9}});
    auto o = dgs(s, 0.0, 0.05, 1);
    CHECK(o.jbar == 1);
    REQUIRE(o.processed.size() == 3);
    CHECK(o.processed[0] == Edge(0, 1));
    CHECK(o.processed[2] == Edge(0, 2));
    REQUIRE(o.generator_pvalues.size() == 1);
    CHECK(o.generator_pvalues[0] == doctest::Approx(3e-9).epsilon(1e-6));
    CHECK(o.j_max == 1);
    CHECK(o.alpha_hat == doctest::Approx(0.05));
    CHECK(o.selected_edges.size() == 3);
    CHECK(o.rank == 1);
}

TEST_CASE("dgs on a four-cycle with chords") {
    std::vector<std::pair<Edge, double>> p{{Edge(0, 1), 1e-8}, {Edge(1, 2), 1e-8}, {Edge(2, 3), 1e-8},
                                           {Edge(0, 3), 1e-8}, {Edge(0, 2), 0.04}, {Edge(1, 3), 0.04}};
    auto o = dgs(stats_from_pvalues(4, p), 0.0, 0.05, 1);
    CHECK(o.jbar == 3);
    REQUIRE(o.generator_pvalues.size() == 3);
    CHECK(o.generator_pvalues[0] == doctest::Approx(1e-8).epsilon(1e-6));
    CHECK(o.generator_pvalues[1] == doctest::Approx(0.04).epsilon(1e-9));
    CHECK(o.generator_pvalues[2] == doctest::Approx(0.04).epsilon(1e-9));
    CHECK(o.j_max == 3);
    CHECK(o.alpha_hat == doctest::Approx(0.05));
    CHECK(o.selected_edges.size() == 6);
    CHECK(o.rank == 3);
}

TEST_CASE("dgs invariants on random inputs") {
    Rng rng(101);
    for (int rep = 0; rep < 60; ++rep) {
        const int d = 3 + static_cast<int>(rng.uniform_int(9));
        const int k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::min(2, d - 1))));
        auto sc = rng.bernoulli(0.5) ? Scenario::OneSided : Scenario::TwoSided;
        auto s = oracle::random_stats(d, sc, rng);
        const double mu = rng.uniform(0.0, 0.5);
        auto o = dgs(s, mu, 0.1, k);
        CHECK(o.rank == cycle_rank(o.selected_edges, d, k));
        CHECK(o.generator_pvalues.size() == cycle_rank(EdgeSet(o.processed), d, k));
        CHECK(std::is_sorted(o.generator_pvalues.begin(), o.generator_pvalues.end()));
        bool on_grid = false;
        for (std::size_t i = 0; i <= o.jbar; ++i)
            on_grid = on_grid || o.alpha_hat == 0.1 * static_cast<double>(i) / static_cast<double>(o.jbar);
        CHECK(on_grid);
        for (Edge e : o.selected_edges) CHECK(filtered_pvalue(s, e, mu) < o.alpha_hat);
    }
}

TEST_CASE("dgs treats zero variance as p = 1") {
    auto s = stats_from_pvalues(3, {{Edge(0, 1), 1e-9}, {Edge(1, 2), 1e-9}, {Edge(0, 2), 1e-9}});
    s.sigma_hat(0, 2) = s.sigma_hat(2, 0) = 0.0;
    auto o = dgs(s, 0.0, 0.05, 1);
    CHECK_FALSE(o.warnings.empty());
    CHECK(o.rank == 0);
}

TEST_CASE("khan on a triangle with one weak edge") {
    EdgeStatistics s;
    s.d = 3;
    s.n = 100;
    s.scenario = Scenario::OneSided;
    s.what = Eigen::MatrixXd::Zero(3, 3);
    s.sigma_hat = Eigen::MatrixXd::Ones(3, 3);
    s.sigma_hat.diagonal().setZero();
    s.what(0, 1) = s.what(1, 0) = 1.0;
    s.what(1, 2) = s.what(2, 1) = 1.0;
    s.what(0, 2) = s.what(2, 0) = 0.5;

    auto r = khan_select(s, 0.0, 1.0, 0.05, 1);
    REQUIRE(r.steps.size() == 2);
    CHECK(r.steps[0].rank == 1);
    CHECK(r.steps[0].edges.size() == 3);
    CHECK(r.steps[1].rank == 0);
    CHECK(std::abs(r.steps[1].mu - 0.3355) < 1e-3);
    CHECK(std::abs(r.steps[1].mu - (0.5 - normal_quantile(0.95) / 10)) < 1e-12);
    auto bars = barcode(r);
    REQUIRE(bars.size() == 1);
    CHECK(bars[0].birth == 0.0);
    CHECK(bars[0].death == r.steps[1].mu);
    CHECK(bars[0].multiplicity == 1);
    CHECK_FALSE(bars[0].censored);

    auto inf = khan_select(s, 0.0, std::numeric_limits<double>::infinity(), 0.05, 1);
    CHECK(inf.steps.back().rank == 0);
}

TEST_CASE("khan with an empty start") {
    auto s = stats_from_pvalues(4, {}, 0.5);
    auto r = khan_select(s, 0.0, 1.0, 0.05, 2);
    REQUIRE(r.steps.size() == 1);
    CHECK(r.steps[0].mu == 0.0);
    CHECK(r.steps[0].rank == 0);
    CHECK(barcode(r).empty());
    CHECK_THROWS_AS(khan_select(s, 1.0, 1.0, 0.05, 2), ConfigError);
}

TEST_CASE("evaluate_at is right-continuous") {
    auto r = manual_result({{0.0, 3}, {0.4, 1}, {0.7, 0}}, 1.0);
    r.steps[0].edges = EdgeSet{{0, 1}, {1, 2}};
    r.steps[1].edges = EdgeSet{{0, 1}};
    CHECK(evaluate_at(r, 0.0).second == 3);
    CHECK(evaluate_at(r, std::nextafter(0.4, 0.0)).second == 3);
    CHECK(evaluate_at(r, 0.4).second == 1);
    CHECK(evaluate_at(r, 0.4).first == EdgeSet{{0, 1}});
    CHECK(evaluate_at(r, 0.9).second == 0);
    CHECK(evaluate_at(r, 2.0).first.empty());
    CHECK_THROWS_AS(evaluate_at(r, -0.1), ConfigError);
}

TEST_CASE("barcode examples") {
    auto bars = barcode(manual_result({{0.0, 3}, {0.4, 1}, {0.7, 0}}, 1.0));
    REQUIRE(bars.size() == 2);
    CHECK(bars[0].death == 0.4);
    CHECK(bars[0].multiplicity == 2);
    CHECK(bars[1].death == 0.7);
    CHECK(bars[1].multiplicity == 1);

    auto cens = barcode(manual_result({{0.0, 2}}, 1.0));
    REQUIRE(cens.size() == 1);
    CHECK(cens[0].death == 1.0);
    CHECK(cens[0].multiplicity == 2);
    CHECK(cens[0].censored);

    CHECK(barcode(manual_result({{0.0, 0}}, 1.0)).empty());

    std::ostringstream csv;
    write_barcode_csv(csv, bars);
    CHECK(csv.str() == "birth,death,multiplicity,censored\n0,0.40000000000000002,2,0\n0,0.69999999999999996,1,0\n");
}

TEST_CASE("khan matches pointwise dgs") {
    Rng rng(202);
    for (int rep = 0; rep < 25; ++rep) {
        const int d = 3 + static_cast<int>(rng.uniform_int(8));
        const int k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::min(2, d - 1))));
        auto sc = rng.bernoulli(0.5) ? Scenario::OneSided : Scenario::TwoSided;
        auto s = oracle::random_stats(d, sc, rng);
        const double q = rng.uniform(0.05, 0.2);
        const double top = s.what.cwiseAbs().maxCoeff();
        auto r = khan_select(s, 0.0, top, q, k);
        for (std::size_t t = 1; t < r.steps.size(); ++t) {
            CHECK(r.steps[t - 1].edges.contains_all(r.steps[t].edges));
            CHECK(r.steps[t].rank <= r.steps[t - 1].rank);
            CHECK(r.steps[t].mu > r.steps[t - 1].mu);
        }
        std::uint64_t mass = 0;
        for (const auto& b : barcode(r)) mass += b.multiplicity;
        CHECK(mass == r.steps.front().rank);
        for (int i = 0; i < 100; ++i) {
            const double mu = top * i / 99.0;
            auto [edges, rank] = evaluate_at(r, mu);
            auto o = dgs(s, mu, q, k);
            CHECK(edges == o.selected_edges);
            CHECK(rank == o.rank);
        }
        // just before and at each change point
        for (std::size_t t = 1; t < r.steps.size(); ++t) {
            const double m = r.steps[t].mu;
            CHECK(dgs(s, m, q, k).selected_edges == r.steps[t].edges);
            CHECK(dgs(s, std::nextafter(m, 0.0), q, k).selected_edges == r.steps[t - 1].edges);
        }
    }
}

TEST_CASE("khan runs until the selection is empty") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const int d = 4 + static_cast<int>(rng.uniform_int(8));
        const int k = 1 + static_cast<int>(rng.uniform_int(2));
        const Scenario sc = rng.bernoulli(0.5) ? Scenario::TwoSided : Scenario::OneSided;
        const auto stats = oracle::random_stats(d, sc, rng);
        const double q = rng.uniform(0.05, 0.3);
        const auto r = khan_select(stats, 0.0, std::numeric_limits<double>::infinity(), q, k);
        REQUIRE(!r.steps.empty());
        CHECK(r.steps.back().rank == 0);
        CHECK(r.steps.back().edges.empty());
        const double after = std::nextafter(r.steps.back().mu, std::numeric_limits<double>::infinity());
        CHECK(dgs(stats, after, q, k).selected_edges.empty());
        for (const auto& s : r.steps) {
            const auto ref = dgs(stats, s.mu, q, k);
            CHECK(ref.selected_edges == s.edges);
            CHECK(ref.rank == s.rank);
        }
    }
}

TEST_CASE("uFDP with an oracle selection is zero") {
    Rng rng(303);
    auto model = gen_ggm_model(GgmDesign::homology(2, 2, 1), rng);
    EdgeStatistics s;
    s.d = model.truth.d();
    s.n = 400;
    s.scenario = Scenario::TwoSided;
    s.what = model.truth.matrix();
    s.sigma_hat = Eigen::MatrixXd::Constant(s.d, s.d, 1e-6);
    s.sigma_hat.diagonal().setZero();
    auto r = khan_select(s, 0.0, 1.0, 0.05, 2);
    CHECK(r.steps.front().rank > 0);
    CHECK(ufdp(r, model.truth, Scenario::TwoSided, 2, 0.0, 1.0) == 0.0);
}

TEST_CASE("uFDP counts a spurious loop") {
    WeightedGraph truth(4);
    truth.set_weight(0, 1, 0.5);
    auto r = manual_result({{0.0, 1}, {0.3, 0}}, 1.0);
    r.steps[0].edges = EdgeSet{{0, 1}, {1, 2}, {0, 2}};
    CHECK(ufdp(r, truth, Scenario::TwoSided, 1, 0.0, 1.0) == 1.0);
}

TEST_CASE("uFDP grid matches a dense scan") {
    Rng rng(404);
    int exact_cases = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const int d = 4 + static_cast<int>(rng.uniform_int(4));
        const int k = 1 + static_cast<int>(rng.uniform_int(2));
        auto sc = rng.bernoulli(0.5) ? Scenario::OneSided : Scenario::TwoSided;
        auto s = oracle::random_stats(d, sc, rng, 0.6);
        auto truth = truth_from(s, rng);
        auto r = khan_select(s, 0.0, 1.0, 0.1, k);
        const double u = ufdp(r, truth, sc, k, 0.0, 1.0);

        double dense = 0.0;
        for (int i = 0; i < 1000; ++i) dense = std::max(dense, fdp_at(r, truth, sc, k, i / 999.0));
        CHECK(dense <= u);

        // the supremum is attained at some grid point
        bool attained = false;
        for (double mu : ufdp_grid(r, truth, sc, 0.0, 1.0)) attained = attained || fdp_at(r, truth, sc, k, mu) == u;
        CHECK(attained);

        // when every constant piece is wider than the scan spacing, the scan sees all of them
        auto pts = ufdp_grid(r, truth, sc, 0.0, 1.0);
        double gap = 1.0;
        for (std::size_t i = 1; i < pts.size(); ++i) gap = std::min(gap, pts[i] - pts[i - 1]);
        if (gap > 2.0 / 999.0) {
            ++exact_cases;
            CHECK(dense == u);
        }
    }
    CHECK(exact_cases > 0);
}

TEST_CASE("persistence json") {
    auto r = manual_result({{0.0, 1}, {0.5, 0}}, std::numeric_limits<double>::infinity());
    r.steps[0].edges = EdgeSet{{0, 1}};
    std::ostringstream out;
    write_persistence_json(out, r);
    auto j = nlohmann::json::parse(out.str());
    CHECK(j["mu1"] == "inf");
    CHECK(j["steps"].size() == 2);
    CHECK(j["steps"][0]["edges"][0] == nlohmann::json::array({0, 1}));
    CHECK(j["steps"][1]["mu"] == 0.5);
}
