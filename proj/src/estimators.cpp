#include "khan/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "csv_util.hpp"
#include "khan/error.hpp"
#include "khan/kernels.hpp"
#include "khan/normal.hpp"

namespace khan {

namespace {

std::span<const double> col(const Eigen::MatrixXd& m, Eigen::Index j) {
    return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

std::span<double> col(Eigen::MatrixXd& m, Eigen::Index j) {
    return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// Positive floor applied to sigma only when it is strictly positive.
constexpr double kSigmaFloor = 1e-12;

double effective_sigma(double sigma, Edge e) {
    if (!(sigma > 0.0)) throw DegenerateVariance(e.u, e.v);
    return std::max(sigma, kSigmaFloor);
}

}  // namespace

void EdgeStatistics::validate() const {
    if (d <= 0 || n <= 0) throw DataError("edge statistics need d > 0 and n > 0");
    if (what.rows() != d || what.cols() != d || sigma_hat.rows() != d || sigma_hat.cols() != d)
        throw DataError("edge statistics matrices must be d x d");
    for (int u = 0; u < d; ++u)
        for (int v = u + 1; v < d; ++v) {
            if (what(u, v) != what(v, u) || sigma_hat(u, v) != sigma_hat(v, u))
                throw DataError("edge statistics must be symmetric");
            if (!(sigma_hat(u, v) >= 0.0)) throw DataError("edge standard deviations must be nonnegative");
        }
}

Eigen::MatrixXd sample_covariance(const SampleMatrix& x) {
    const int d = x.d();
    const double inv_n = 1.0 / x.n();
    Eigen::MatrixXd s(d, d);
    for (int u = 0; u < d; ++u)
        for (int v = u; v < d; ++v) {
            const double val = kernels::dot(col(x.data, u), col(x.data, v)) * inv_n;
            s(u, v) = val;
            s(v, u) = val;
        }
    return s;
}

double default_glasso_lambda(int d, int n) {
    return 0.5 * std::sqrt(std::log(static_cast<double>(std::max(d, 2))) / n);
}

GlassoResult graphical_lasso(const Eigen::MatrixXd& s, double lambda, const GlassoOptions& opts) {
    const Eigen::Index d = s.rows();
    if (s.cols() != d) throw ConfigError("graphical_lasso: covariance must be square");
    if (!(lambda >= 0.0)) throw ConfigError("graphical_lasso: lambda must be nonnegative");

    GlassoResult res;
    Eigen::MatrixXd& w = res.w;
    w = s;
    if (opts.penalize_diagonal) w.diagonal().array() += lambda;
    // Column j of beta holds the lasso coefficients of the j-th subproblem; beta(j,j) stays 0.
    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd w_prev(d, d);
    std::vector<double> r(static_cast<std::size_t>(d));
    std::vector<Eigen::Index> active;

    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
        w_prev = w;
        for (Eigen::Index j = 0; j < d; ++j) {
            // r = W_{-j,-j} beta_j, kept over all rows; row j is ignored.
            std::fill(r.begin(), r.end(), 0.0);
            for (Eigen::Index l = 0; l < d; ++l)
                if (beta(l, j) != 0.0) kernels::axpy(beta(l, j), col(w, l), r);

            auto coordinate = [&](Eigen::Index k) {
                const double wkk = w(k, k);
                const double old = beta(k, j);
                const double partial = s(k, j) - (r[k] - wkk * old);
                const double next = soft_threshold(partial, lambda) / wkk;
                const double delta = next - old;
                if (delta != 0.0) {
                    beta(k, j) = next;
                    kernels::axpy(delta, col(w, k), r);
                }
                return std::fabs(delta);
            };

            for (int inner = 0; inner < opts.max_inner; ++inner) {
                double change = 0.0;
                active.clear();
                for (Eigen::Index k = 0; k < d; ++k) {
                    if (k == j) continue;
                    change = std::max(change, coordinate(k));
                    if (beta(k, j) != 0.0) active.push_back(k);
                }
                if (change < opts.inner_tol) break;
                for (int a = 0; a < opts.max_inner; ++a) {
                    double ac = 0.0;
                    for (Eigen::Index k : active) ac = std::max(ac, coordinate(k));
                    if (ac < opts.inner_tol) break;
                }
            }
            for (Eigen::Index k = 0; k < d; ++k) {
                if (k == j) continue;
                w(k, j) = r[k];
                w(j, k) = r[k];
            }
        }
        res.sweeps = sweep;
        if (kernels::max_abs_diff({w.data(), static_cast<std::size_t>(w.size())},
                                  {w_prev.data(), static_cast<std::size_t>(w_prev.size())}) < opts.tol) {
            res.converged = true;
            break;
        }
    }

    res.theta.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double cross = 0.0;
        for (Eigen::Index k = 0; k < d; ++k)
            if (k != j) cross += w(k, j) * beta(k, j);
        const double tjj = 1.0 / (w(j, j) - cross);
        for (Eigen::Index k = 0; k < d; ++k) res.theta(k, j) = (k == j) ? tjj : -beta(k, j) * tjj;
    }
    res.theta = 0.5 * (res.theta + res.theta.transpose()).eval();
    return res;
}

PrecisionEstimate debias(const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& sample_cov) {
    const Eigen::Index d = theta_hat.rows();
    if (theta_hat.cols() != d || sample_cov.rows() != d || sample_cov.cols() != d)
        throw ConfigError("debias: dimension mismatch");

    PrecisionEstimate est;
    est.theta_hat = theta_hat;
    est.sample_cov = sample_cov;

    // st(k, v) = (S theta_hat)_{kv} - [k == v]
    Eigen::MatrixXd st(d, d);
    for (Eigen::Index v = 0; v < d; ++v)
        for (Eigen::Index k = 0; k < d; ++k)
            st(k, v) = kernels::dot(col(sample_cov, k), col(theta_hat, v)) - (k == v ? 1.0 : 0.0);

    std::vector<double> denom(static_cast<std::size_t>(d));
    for (Eigen::Index u = 0; u < d; ++u) {
        denom[u] = kernels::dot(col(theta_hat, u), col(sample_cov, u));
        if (!(std::fabs(denom[u]) >= 1e-12)) throw DegenerateDenominator(static_cast<int>(u));
    }

    est.theta_d.resize(d, d);
    for (Eigen::Index v = 0; v < d; ++v)
        for (Eigen::Index u = 0; u < d; ++u)
            est.theta_d(u, v) = theta_hat(u, v) - kernels::dot(col(theta_hat, u), col(st, v)) / denom[u];

    est.sigma_hat = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index u = 0; u < d; ++u)
        for (Eigen::Index v = u + 1; v < d; ++v) {
            const double w = 0.5 * (est.theta_d(u, v) + est.theta_d(v, u));
            const double var = est.theta_d(u, u) * est.theta_d(v, v) + w * w;
            est.sigma_hat(u, v) = est.sigma_hat(v, u) = std::sqrt(std::max(0.0, var));
        }
    return est;
}

EdgeStatistics PrecisionEstimate::edge_statistics(int n) const {
    EdgeStatistics st;
    st.d = static_cast<int>(theta_d.rows());
    st.n = n;
    st.scenario = Scenario::TwoSided;
    st.what = 0.5 * (theta_d + theta_d.transpose());
    st.what.diagonal().setZero();
    st.sigma_hat = sigma_hat;
    return st;
}

GgmFit ggm_fit(const SampleMatrix& x, const GgmOptions& opts) {
    if (x.n() < 2) throw DataError("GGM estimation needs at least two samples");
    GgmFit fit;
    fit.lambda = opts.lambda.value_or(default_glasso_lambda(x.d(), x.n()));
    const Eigen::MatrixXd s = sample_covariance(x);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(x.d());
    if (opts.standardize)
        for (int u = 0; u < x.d(); ++u) {
            if (!(s(u, u) > 0.0)) throw DegenerateDenominator(u);
            scale(u) = 1.0 / std::sqrt(s(u, u));
        }
    const Eigen::MatrixXd r = scale.asDiagonal() * s * scale.asDiagonal();
    auto gl = graphical_lasso(r, fit.lambda, opts.glasso);
    fit.glasso_converged = gl.converged;
    fit.glasso_sweeps = gl.sweeps;
    if (!gl.theta.allFinite()) throw NumericError("graphical lasso produced non-finite entries");
    const Eigen::MatrixXd theta_hat = scale.asDiagonal() * gl.theta * scale.asDiagonal();
    fit.precision = debias(theta_hat, s);
    fit.stats = fit.precision.edge_statistics(x.n());
    return fit;
}

EdgeStatistics ggm_edge_statistics(const SampleMatrix& x, std::optional<double> lambda) {
    GgmOptions opts;
    opts.lambda = lambda;
    return ggm_fit(x, opts).stats;
}

EdgeStatistics ising_edge_statistics(const SampleMatrix& x, double theta) {
    if (x.n() < 2) throw DataError("Ising estimation needs at least two samples");
    if (!(theta >= 0.0)) throw ConfigError("Ising threshold theta must be nonnegative");
    for (int j = 0; j < x.d(); ++j)
        for (int i = 0; i < x.n(); ++i) {
            const double v = x.data(i, j);
            if (v != 1.0 && v != -1.0)
                throw DataError("non-±1 entry at row " + std::to_string(i) + ", col " + std::to_string(j));
        }
    EdgeStatistics st;
    st.d = x.d();
    st.n = x.n();
    st.scenario = Scenario::OneSided;
    st.what = Eigen::MatrixXd::Zero(st.d, st.d);
    st.sigma_hat = Eigen::MatrixXd::Zero(st.d, st.d);
    const double shift = std::tanh(theta);
    for (int u = 0; u < st.d; ++u)
        for (int v = u + 1; v < st.d; ++v) {
            // Sums of +-1 products are exact integers, so the kernel choice cannot change them.
            const double m = kernels::dot(col(x.data, u), col(x.data, v)) / x.n();
            if (std::fabs(m) >= 1.0) throw DegenerateVariance(u, v);
            st.what(u, v) = st.what(v, u) = m - shift;
            st.sigma_hat(u, v) = st.sigma_hat(v, u) = std::sqrt(1.0 - m * m);
        }
    return st;
}

double filtered_pvalue(double w, double sigma, int n, double mu, Scenario scenario) {
    const double s = effective_sigma(sigma, Edge(0, 1));
    const double shifted = (scenario == Scenario::TwoSided ? std::fabs(w) : w) - mu;
    const double z = std::sqrt(static_cast<double>(n)) * shifted / s;
    // 2 - 2 Phi(z) == erfc(z / sqrt 2); 1 - Phi(z) == Phi(-z).
    const double p = scenario == Scenario::TwoSided ? 2.0 * normal_sf(z) : normal_sf(z);
    return std::clamp(p, 0.0, 1.0);
}

double lower_conf_bound(double w, double sigma, int n, double alpha, Scenario scenario) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("lower_conf_bound: alpha must lie in (0,1)");
    const double s = effective_sigma(sigma, Edge(0, 1));
    const double base = scenario == Scenario::TwoSided ? std::fabs(w) : w;
    // Phi^{-1}(1 - alpha) == -Phi^{-1}(alpha), evaluated on the accurate side.
    return base + normal_quantile(alpha) * s / std::sqrt(static_cast<double>(n));
}

double edge_pvalue(const EdgeStatistics& s, Edge e) { return filtered_pvalue(s, e, 0.0); }

double filtered_pvalue(const EdgeStatistics& s, Edge e, double mu) {
    const double sigma = s.sigma(e);
    if (!(sigma > 0.0)) throw DegenerateVariance(e.u, e.v);
    return filtered_pvalue(s.weight(e), sigma, s.n, mu, s.scenario);
}

double lower_conf_bound(const EdgeStatistics& s, Edge e, double alpha) {
    const double sigma = s.sigma(e);
    if (!(sigma > 0.0)) throw DegenerateVariance(e.u, e.v);
    return lower_conf_bound(s.weight(e), sigma, s.n, alpha, s.scenario);
}

SampleMatrix read_samples_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank(line)) continue;
        auto fields = detail::split_csv(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            auto v = detail::parse_double(fields[j]);
            if (!v)
                throw DataError("sample file line " + std::to_string(lineno) + ", column " + std::to_string(j) +
                                ": not a number");
            row.push_back(*v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("sample file line " + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("sample file is empty");
    SampleMatrix x;
    x.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) x.data(i, j) = rows[i][j];
    return x;
}

void write_samples_csv(std::ostream& out, const SampleMatrix& x) {
    char buf[64];
    for (int i = 0; i < x.n(); ++i) {
        for (int j = 0; j < x.d(); ++j) {
            if (j) out << ',';
            auto res = std::to_chars(buf, buf + sizeof buf, x.data(i, j));
            out << std::string_view(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

namespace {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
}

template <class T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw DataError("binary sample file truncated");
    return to_little(v);
}

template <class T>
void write_le(std::ostream& out, T v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

SampleMatrix read_samples_binary(std::istream& in) {
    const auto n = read_le<std::int32_t>(in);
    const auto d = read_le<std::int32_t>(in);
    if (n <= 0 || d <= 0) throw DataError("binary sample header must hold positive n and d");
    SampleMatrix x;
    x.data.resize(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x.data(i, j) = read_le<double>(in);
    return x;
}

void write_samples_binary(std::ostream& out, const SampleMatrix& x) {
    write_le<std::int32_t>(out, x.n());
    write_le<std::int32_t>(out, x.d());
    for (int i = 0; i < x.n(); ++i)
        for (int j = 0; j < x.d(); ++j) write_le<double>(out, x.data(i, j));
}

SampleMatrix read_samples_file(const std::string& path) {
    const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw DataError("cannot open sample file '" + path + "'");
    return binary ? read_samples_binary(in) : read_samples_csv(in);
}

}  // namespace khan
