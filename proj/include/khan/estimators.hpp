#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "khan/graph.hpp"

namespace khan {

/// n observations (rows) of a d-dimensional vector (columns).
struct SampleMatrix {
    Eigen::MatrixXd data;

    int n() const { return static_cast<int>(data.rows()); }
    int d() const { return static_cast<int>(data.cols()); }
};

/// Per-edge estimate, its standard deviation, and the scenario that turns
/// them into p-values. Diagonals are unused and held at zero.
struct EdgeStatistics {
    int d = 0;
    int n = 0;
    Eigen::MatrixXd what;
    Eigen::MatrixXd sigma_hat;
    Scenario scenario = Scenario::TwoSided;

    double weight(Edge e) const { return what(e.u, e.v); }
    double sigma(Edge e) const { return sigma_hat(e.u, e.v); }

    /// Throws DataError on shape or symmetry violations.
    void validate() const;
};

struct PrecisionEstimate {
    Eigen::MatrixXd theta_hat;
    Eigen::MatrixXd theta_d;
    Eigen::MatrixXd sigma_hat;
    Eigen::MatrixXd sample_cov;

    /// Symmetrized debiased weights with scenario (a).
    EdgeStatistics edge_statistics(int n) const;
};

/// (1/n) X^T X without centering.
Eigen::MatrixXd sample_covariance(const SampleMatrix& x);

struct GlassoOptions {
    double tol = 1e-4;
    int max_iter = 200;
    /// Inner coordinate-descent sweeps per column.
    int max_inner = 1000;
    double inner_tol = 1e-7;
    /// Also penalize the diagonal (W starts at S + lambda I instead of S).
    bool penalize_diagonal = false;
};

struct GlassoResult {
    Eigen::MatrixXd theta;
    Eigen::MatrixXd w;  // working covariance
    int sweeps = 0;
    bool converged = false;
};

/// Block coordinate descent for -logdet(T) + tr(S T) + lambda |T|_1,off.
/// Non-convergence is reported through `converged`, not thrown.
GlassoResult graphical_lasso(const Eigen::MatrixXd& s, double lambda, const GlassoOptions& opts = {});

double default_glasso_lambda(int d, int n);

/// Throws DegenerateDenominator when |theta_u^T S_u| < 1e-12.
PrecisionEstimate debias(const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& sample_cov);

struct GgmOptions {
    std::optional<double> lambda;  // default_glasso_lambda when unset
    GlassoOptions glasso;
    /// Fit the lasso on the correlation scale and map the estimate back.
    bool standardize = true;
};

struct GgmFit {
    EdgeStatistics stats;
    PrecisionEstimate precision;
    bool glasso_converged = true;
    int glasso_sweeps = 0;
    double lambda = 0.0;
};

GgmFit ggm_fit(const SampleMatrix& x, const GgmOptions& opts = {});
EdgeStatistics ggm_edge_statistics(const SampleMatrix& x, std::optional<double> lambda = std::nullopt);

/// Throws DataError on a non-+-1 entry and DegenerateVariance when |m_uv| = 1.
EdgeStatistics ising_edge_statistics(const SampleMatrix& x, double theta);

/// Throws DegenerateVariance when sigma_e = 0.
double edge_pvalue(const EdgeStatistics& s, Edge e);
double filtered_pvalue(const EdgeStatistics& s, Edge e, double mu);
double lower_conf_bound(const EdgeStatistics& s, Edge e, double alpha);

/// Same formulas on raw numbers; shared by the EdgeStatistics overloads.
double filtered_pvalue(double w, double sigma, int n, double mu, Scenario scenario);
double lower_conf_bound(double w, double sigma, int n, double alpha, Scenario scenario);

/// CSV: n rows x d columns, no header.
SampleMatrix read_samples_csv(std::istream& in);
void write_samples_csv(std::ostream& out, const SampleMatrix& x);
/// Binary: int32 n, int32 d (little-endian), then n*d float64 in row-major order.
SampleMatrix read_samples_binary(std::istream& in);
void write_samples_binary(std::ostream& out, const SampleMatrix& x);
/// Picks the binary reader for `.bin` files, CSV otherwise.
SampleMatrix read_samples_file(const std::string& path);

}  // namespace khan
