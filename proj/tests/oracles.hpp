#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Everything here works on small dense matrices in double precision and never
// calls the elimination code under test.

#include <algorithm>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "khan/estimators.hpp"
#include "khan/graph.hpp"
#include "khan/homology.hpp"
#include "khan/normal.hpp"
#include "khan/rng.hpp"

namespace oracle {

inline khan::EdgeSet random_edges(int d, double density, khan::Rng& rng) {
    std::vector<khan::Edge> out;
    for (int u = 0; u < d; ++u)
        for (int v = u + 1; v < d; ++v)
            if (rng.bernoulli(density)) out.emplace_back(u, v);
    return khan::EdgeSet(std::move(out));
}

inline Eigen::MatrixXd dense(const khan::SparseIntMatrix& m) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows),
                                                 static_cast<Eigen::Index>(m.cols()));
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (auto [r, v] : m.columns[c]) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    return out;
}

inline std::size_t svd_rank(const Eigen::MatrixXd& m, double tol = 1e-8) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol * std::max<double>(1.0, s(0))) ++r;
    return r;
}

// Boundary matrix of the k-simplices of `sub` expressed in the simplex
// coordinates of the larger complex `ambient` (rows: (k-1)-simplices,
// columns: k-simplices of ambient; columns not in `sub` are zero).
inline Eigen::MatrixXd boundary_in(const khan::CliqueComplex& ambient, const khan::CliqueComplex& sub, int k) {
    const auto& rows = ambient.simplices[static_cast<std::size_t>(k - 1)];
    const auto& cols = ambient.simplices[static_cast<std::size_t>(k)];
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                              static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& s = cols[c];
        if (!sub.index_of(k, s)) continue;
        for (std::size_t i = 0; i < s.size(); ++i) {
            khan::Simplex face;
            for (std::size_t j = 0; j < s.size(); ++j)
                if (j != i) face.push_back(s[j]);
            auto r = std::find(rows.begin(), rows.end(), face) - rows.begin();
            b(r, static_cast<Eigen::Index>(c)) = (i % 2 == 0) ? 1.0 : -1.0;
        }
    }
    return b;
}

// Columns span ker(b) restricted to the coordinates flagged in `support`.
inline Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& b, const std::vector<bool>& support) {
    std::vector<Eigen::Index> cols;
    for (std::size_t i = 0; i < support.size(); ++i)
        if (support[i]) cols.push_back(static_cast<Eigen::Index>(i));
    const Eigen::Index n = static_cast<Eigen::Index>(support.size());
    if (cols.empty()) return Eigen::MatrixXd::Zero(n, 0);
    Eigen::MatrixXd sub(b.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = b.col(cols[j]);
    Eigen::MatrixXd ker;
    if (sub.rows() == 0) {
        ker = Eigen::MatrixXd::Identity(sub.cols(), sub.cols());
    } else {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        lu.setThreshold(1e-10);
        ker = lu.kernel();
        if (lu.rank() == sub.cols()) ker.resize(sub.cols(), 0);
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, ker.cols());
    for (std::size_t j = 0; j < cols.size(); ++j) out.row(cols[j]) = ker.row(static_cast<Eigen::Index>(j));
    return out;
}

// rank Z(E) by dense linear algebra: sum_k (n_k - rank d_k).
inline std::uint64_t cycle_rank(const khan::EdgeSet& e, int d, int max_dim) {
    auto cx = khan::build_clique_complex(e, d, max_dim);
    std::uint64_t total = 0;
    for (int k = 1; k <= max_dim; ++k) {
        auto b = boundary_in(cx, cx, k);
        total += static_cast<std::uint64_t>(b.cols()) - svd_rank(b);
    }
    return total;
}

// dim(Z(E1) ∩ Z(E2)) as r1 + r2 - rank[K1 K2] per dimension, with the kernels
// taken inside the clique complex of E1 ∪ E2.
inline std::uint64_t kernel_intersection_rank(const khan::EdgeSet& e1, const khan::EdgeSet& e2, int d,
                                              int max_dim) {
    auto amb = khan::build_clique_complex(e1.unite(e2), d, max_dim);
    auto c1 = khan::build_clique_complex(e1, d, max_dim);
    auto c2 = khan::build_clique_complex(e2, d, max_dim);
    std::uint64_t total = 0;
    for (int k = 1; k <= max_dim; ++k) {
        const auto& cols = amb.simplices[static_cast<std::size_t>(k)];
        if (cols.empty()) continue;
        std::vector<bool> s1(cols.size()), s2(cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            s1[c] = c1.index_of(k, cols[c]).has_value();
            s2[c] = c2.index_of(k, cols[c]).has_value();
        }
        auto b = boundary_in(amb, amb, k);
        auto k1 = kernel_basis(b, s1);
        auto k2 = kernel_basis(b, s2);
        Eigen::MatrixXd stacked(b.cols(), k1.cols() + k2.cols());
        stacked << k1, k2;
        const auto r1 = static_cast<std::uint64_t>(k1.cols()), r2 = static_cast<std::uint64_t>(k2.cols());
        total += r1 + r2 - svd_rank(stacked, 1e-9);
    }
    return total;
}

// Edge statistics with random weights and standard deviations; a share of
// pairs carries strong signal so that selections are non-trivial.
inline khan::EdgeStatistics random_stats(int d, khan::Scenario sc, khan::Rng& rng, double signal = 0.4) {
    khan::EdgeStatistics s;
    s.d = d;
    s.n = 50 + static_cast<int>(rng.uniform_int(400));
    s.scenario = sc;
    s.what = Eigen::MatrixXd::Zero(d, d);
    s.sigma_hat = Eigen::MatrixXd::Zero(d, d);
    for (int u = 0; u < d; ++u)
        for (int v = u + 1; v < d; ++v) {
            double w = rng.bernoulli(signal) ? rng.uniform(0.2, 1.0) : rng.uniform(-0.1, 0.1);
            if (sc == khan::Scenario::TwoSided && rng.bernoulli(0.5)) w = -w;
            s.what(u, v) = s.what(v, u) = w;
            s.sigma_hat(u, v) = s.sigma_hat(v, u) = rng.uniform(0.5, 1.5);
        }
    return s;
}

}  // namespace oracle
