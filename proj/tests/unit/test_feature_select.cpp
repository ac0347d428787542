#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <vector>

#include "khan/bhq.hpp"
#include "khan/error.hpp"
#include "khan/feature_select.hpp"
#include "khan/normal.hpp"
#include "khan/rng.hpp"

using namespace khan;

namespace {

// One-sided statistics with n = 1 and sigma = 1 reproduce the requested p-values.
EdgeStatistics stats_from_pvalues(const Eigen::MatrixXd& p) {
    const int d = static_cast<int>(p.rows());
    EdgeStatistics s;
    s.d = d;
    s.n = 1;
    s.scenario = Scenario::OneSided;
    s.what = Eigen::MatrixXd::Zero(d, d);
    s.sigma_hat = Eigen::MatrixXd::Zero(d, d);
    for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v)
            if (u != v) {
                s.sigma_hat(u, v) = 1.0;
                s.what(u, v) = p(u, v) >= 1.0 ? -40.0 : normal_quantile(1.0 - p(u, v));
            }
    return s;
}

Eigen::MatrixXd constant_p(int d, double value) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(d, d, value);
    p.diagonal().setZero();
    return p;
}

void set_p(Eigen::MatrixXd& p, int u, int v, double value) { p(u, v) = p(v, u) = value; }

using Signature = std::pair<std::vector<Vertex>, std::vector<Edge>>;

Signature signature(const GraphFeature& f) { return {f.vertices, f.edges.edges()}; }

// Every placement of the template on d vertices, by brute force over injective maps.
std::vector<GraphFeature> all_placements(const FeatureShape& shape, int d) {
    const int m = shape.vertex_count();
    std::set<Signature> seen;
    std::vector<GraphFeature> out;
    std::vector<int> pick(static_cast<std::size_t>(d));
    std::iota(pick.begin(), pick.end(), 0);
    std::vector<bool> mask(static_cast<std::size_t>(d), false);
    std::fill(mask.begin(), mask.begin() + m, true);
    std::sort(mask.begin(), mask.end());
    do {
        std::vector<int> chosen;
        for (int i = 0; i < d; ++i)
            if (mask[static_cast<std::size_t>(i)]) chosen.push_back(i);
        do {
            std::vector<Edge> edges;
            for (Edge e : shape.edges()) edges.emplace_back(chosen[e.u], chosen[e.v]);
            GraphFeature f(EdgeSet(std::move(edges)));
            if (seen.insert(signature(f)).second) out.push_back(f);
        } while (std::next_permutation(chosen.begin(), chosen.end()));
    } while (std::next_permutation(mask.begin(), mask.end()));
    return out;
}

std::set<Signature> selected_signatures(const SelectionResult& r) {
    std::set<Signature> s;
    for (const auto& f : r.selected) s.insert(signature(f));
    return s;
}

}  // namespace

TEST_CASE("automorphism counts") {
    CHECK(FeatureShape::triangle().automorphism_count() == 6);
    CHECK(FeatureShape::path(5).automorphism_count() == 2);
    CHECK(FeatureShape::cycle(4).automorphism_count() == 8);
    CHECK(FeatureShape::cycle(5).automorphism_count() == 10);
    CHECK(FeatureShape::star(5).automorphism_count() == 24);
    CHECK(FeatureShape::clique(4).automorphism_count() == 24);
    CHECK(FeatureShape::spider().automorphism_count() == 2);
    CHECK(automorphism_count(8, FeatureShape::cycle(8).edges()) == 16);
    CHECK_THROWS_AS(automorphism_count(9, EdgeSet{{0, 8}}), ConfigError);
    for (auto s : {FeatureShape::path(6), FeatureShape::star(7), FeatureShape::spider(), FeatureShape::clique(5)}) {
        std::uint64_t fact = 1;
        for (int i = 2; i <= s.vertex_count(); ++i) fact *= static_cast<std::uint64_t>(i);
        CHECK(fact % s.automorphism_count() == 0);
    }
}

TEST_CASE("shape parsing") {
    CHECK(FeatureShape::parse("triangle").vertex_count() == 3);
    CHECK(FeatureShape::parse("cycle:5").edges().size() == 5);
    CHECK(FeatureShape::parse("clique:4").edges().size() == 6);
    CHECK(FeatureShape::parse("star:5").edges().size() == 4);
    CHECK(FeatureShape::parse("path:5").edges().size() == 4);
    CHECK(FeatureShape::parse("spider").edges().size() == 4);
    CHECK_THROWS_AS(FeatureShape::parse("hexagon"), ConfigError);
    CHECK_THROWS_AS(FeatureShape::parse("cycle:9"), ConfigError);
    CHECK_THROWS_AS(FeatureShape::parse("cycle:x"), ConfigError);

    const std::string path = "test_feature_template.csv";
    {
        std::ofstream f(path);
        f << "u,v\n0,1\n1,2\n2,3\n1,3\n";
    }
    auto t = FeatureShape::parse("template:" + path);
    CHECK(t.vertex_count() == 4);
    CHECK(t.edges().size() == 4);
    CHECK(t.automorphism_count() == 2);
    std::remove(path.c_str());
    CHECK_THROWS_AS(FeatureShape::parse("template:/nonexistent/file.csv"), ConfigError);
}

TEST_CASE("candidate counts") {
    auto tri = count_total_candidates(FeatureShape::triangle(), 200);
    REQUIRE(tri.exact);
    CHECK(*tri.exact == 1313400);
    CHECK(*count_total_candidates(FeatureShape::cycle(4), 4).exact == 3);
    CHECK(*count_total_candidates(FeatureShape::cycle(5), 5).exact == 12);
    for (int d = 5; d <= 7; ++d)
        for (auto s : {FeatureShape::triangle(), FeatureShape::cycle(4), FeatureShape::path(4), FeatureShape::star(4)})
            CHECK(*count_total_candidates(s, d).exact == all_placements(s, d).size());
    // 8-vertex path on 5e6 vertices overflows 63 bits: the float path takes over
    auto big = count_total_candidates(FeatureShape::path(8), 5'000'000);
    CHECK_FALSE(big.exact);
    CHECK(big.value == doctest::Approx(std::pow(5e6, 8) / 2).epsilon(1e-5));
    CHECK_THROWS_AS(count_total_candidates(FeatureShape::cycle(5), 4), ConfigError);
}

TEST_CASE("enumeration examples") {
    EdgeSet tri{{0, 1}, {1, 2}, {0, 2}};
    auto one = enumerate_candidates(FeatureShape::triangle(), tri, 3);
    REQUIRE(one.size() == 1);
    CHECK(one[0].vertices == std::vector<Vertex>{0, 1, 2});

    auto k4 = EdgeSet::complete(4);
    CHECK(enumerate_candidates(FeatureShape::triangle(), k4, 4).size() == 4);
    CHECK(enumerate_candidates(FeatureShape::cycle(4), k4, 4).size() == 3);

    EnumerationOptions cap;
    cap.max_candidates = 2;
    CHECK_THROWS_AS(enumerate_candidates(FeatureShape::triangle(), k4, 4, cap), BudgetError);
}

TEST_CASE("enumeration matches brute force on random graphs") {
    Rng rng(31);
    for (int rep = 0; rep < 40; ++rep) {
        const int d = 4 + static_cast<int>(rng.uniform_int(4));
        std::vector<Edge> edges;
        for (int u = 0; u < d; ++u)
            for (int v = u + 1; v < d; ++v)
                if (rng.bernoulli(0.6)) edges.emplace_back(u, v);
        EdgeSet e0(edges);
        for (auto shape : {FeatureShape::triangle(), FeatureShape::cycle(4), FeatureShape::path(4),
                           FeatureShape::star(4), FeatureShape::spider()}) {
            if (shape.vertex_count() > d) continue;
            std::set<Signature> expect;
            for (const auto& f : all_placements(shape, d))
                if (feature_embedded(f, e0)) expect.insert(signature(f));
            auto got = enumerate_candidates(shape, e0, d);
            std::set<Signature> got_set;
            for (const auto& f : got) got_set.insert(signature(f));
            CHECK(got.size() == got_set.size());
            CHECK(got_set == expect);
            CHECK(std::is_sorted(got.begin(), got.end(), signature_less));
        }
    }
}

TEST_CASE("selection examples") {
    auto none = select_features(stats_from_pvalues(constant_p(5, 1.0)), FeatureShape::triangle(), 0.05);
    CHECK(none.selected.empty());
    CHECK(none.alpha_hat == 0.0);

    auto three = stats_from_pvalues(constant_p(3, 1e-9));
    auto r3 = select_features(three, FeatureShape::triangle(), 0.05);
    CHECK(r3.total_j == 1);
    CHECK(r3.selected.size() == 1);

    Eigen::MatrixXd p = constant_p(5, 0.9);
    set_p(p, 0, 1, 1e-6);
    set_p(p, 1, 2, 1e-6);
    set_p(p, 0, 2, 1e-6);
    auto r5 = select_features(stats_from_pvalues(p), FeatureShape::triangle(), 0.05);
    CHECK(r5.total_j == 10);
    REQUIRE(r5.selected.size() == 1);
    CHECK(r5.selected[0].pvalue == doctest::Approx(1e-6).epsilon(1e-6));
    CHECK(r5.alpha_hat == doctest::Approx(0.005));
    CHECK(r5.prescreened_edges == 3);
}

TEST_CASE("zero-variance pairs become p = 1 with a warning") {
    Eigen::MatrixXd p = constant_p(4, 1e-9);
    auto s = stats_from_pvalues(p);
    s.sigma_hat(0, 1) = s.sigma_hat(1, 0) = 0.0;
    auto r = select_features(s, FeatureShape::triangle(), 0.05);
    CHECK_FALSE(r.warnings.empty());
    for (const auto& f : r.selected) CHECK_FALSE(f.edges.contains(Edge(0, 1)));
    CHECK(r.selected.size() == 2);
}

TEST_CASE("prescreening is equivalent to testing every placement") {
    Rng rng(77);
    for (int rep = 0; rep < 60; ++rep) {
        const int d = 5 + static_cast<int>(rng.uniform_int(3));
        const double q = rng.uniform(0.05, 0.3);
        Eigen::MatrixXd p = constant_p(d, 1.0);
        for (int u = 0; u < d; ++u)
            for (int v = u + 1; v < d; ++v) {
                double x = rng.bernoulli(0.5) ? std::pow(rng.uniform(), 6.0) : rng.uniform();
                set_p(p, u, v, std::max(x, 1e-12));
            }
        const auto stats = stats_from_pvalues(p);
        const Eigen::MatrixXd pm = edge_pvalue_matrix(stats);
        for (auto shape : {FeatureShape::triangle(), FeatureShape::cycle(4), FeatureShape::path(4)}) {
            auto all = all_placements(shape, d);
            std::vector<double> alphas;
            for (const auto& f : all) alphas.push_back(feature_pvalue(f, pm));
            auto bh = bh_step_up(alphas, q, static_cast<double>(all.size()), true);
            std::set<Signature> expect;
            for (auto idx : bh.rejected) expect.insert(signature(all[idx]));

            auto r = select_features(stats, shape, q);
            CHECK(r.total_j == static_cast<double>(all.size()));
            CHECK(r.alpha_hat == doctest::Approx(bh.alpha_hat).epsilon(1e-14));
            CHECK(selected_signatures(r) == expect);
            for (const auto& f : r.candidates) {
                double mx = 0;
                for (Edge e : f.edges) mx = std::max(mx, pm(e.u, e.v));
                CHECK(f.pvalue == mx);
            }
            for (const auto& f : r.selected) CHECK(f.pvalue < r.alpha_hat);

            auto again = select_features(stats, shape, q);
            CHECK(selected_signatures(again) == selected_signatures(r));
            CHECK(again.candidates.size() == r.candidates.size());

            auto listed = select_features(stats, all, static_cast<double>(all.size()), q);
            CHECK(selected_signatures(listed) == expect);
        }
    }
}

TEST_CASE("explicit family checks its denominator") {
    std::vector<GraphFeature> fs{GraphFeature(EdgeSet{{0, 1}}), GraphFeature(EdgeSet{{1, 2}})};
    auto s = stats_from_pvalues(constant_p(3, 1e-9));
    CHECK_THROWS_AS(select_features(s, fs, 1.0, 0.05), ConfigError);
    CHECK(select_features(s, fs, 2.0, 0.05).selected.size() == 2);
    CHECK_THROWS_AS(select_features(s, fs, 2.0, 1.5), ConfigError);
}
