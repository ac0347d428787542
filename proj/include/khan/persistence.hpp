#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "khan/estimators.hpp"
#include "khan/graph.hpp"

namespace khan {

struct DgsOutput {
    double mu = 0.0;
    double q = 0.0;
    int max_dim = 1;
    std::uint64_t jbar = 0;
    EdgeSet selected_edges;
    std::uint64_t rank = 0;
    double alpha_hat = 0.0;
    std::size_t j_max = 0;
    /// Ascending; one entry per unit of rank gained while scanning E0.
    std::vector<double> generator_pvalues;
    /// E0 in processing order (p ascending, then edge order).
    std::vector<Edge> processed;
    std::vector<std::string> warnings;
};

/// Screening at a fixed filtration level with denominator
/// complete_graph_cycle_rank(d, K). Pairs with sigma = 0 get p = 1.
DgsOutput dgs(const EdgeStatistics& stats, double mu, double q, int max_dim);

struct PersistenceStep {
    double mu = 0.0;
    EdgeSet edges;
    std::uint64_t rank = 0;
    double alpha_hat = 0.0;
};

struct PersistenceResult {
    double mu0 = 0.0;
    double mu1 = 0.0;  // may be +inf
    double q = 0.0;
    int max_dim = 1;
    std::uint64_t jbar = 0;
    Scenario scenario = Scenario::TwoSided;
    std::vector<PersistenceStep> steps;  // steps[t] holds on [mu_t, mu_{t+1})
    /// Iterations where the closed-form change point did not move the selection.
    std::size_t guarded_steps = 0;
    std::vector<std::string> warnings;
};

PersistenceResult khan_select(const EdgeStatistics& stats, double mu0, double mu1, double q, int max_dim);

/// Right-continuous lookup. Throws ConfigError for mu < mu0; (empty, 0) past mu1.
std::pair<EdgeSet, std::uint64_t> evaluate_at(const PersistenceResult& r, double mu);

struct Bar {
    double birth = 0.0;
    double death = 0.0;
    std::uint64_t multiplicity = 0;
    bool censored = false;
};

std::vector<Bar> barcode(const PersistenceResult& r);

/// sup over mu in [mu0, mu1] of (r_hat - rank(Z(mu) ∩ Z_hat(mu))) / max(1, r_hat),
/// evaluated exactly on the joint breakpoints of both step functions.
double ufdp(const PersistenceResult& r, const WeightedGraph& truth, Scenario scenario, int max_dim,
            double mu0, double mu1);

/// The points ufdp evaluates at, ascending.
std::vector<double> ufdp_grid(const PersistenceResult& r, const WeightedGraph& truth, Scenario scenario,
                              double mu0, double mu1);

/// Mean over `grid` of rank(Z(E*(mu + delta)) ∩ Z_hat(mu)) / max(1, rank Z(E*(mu + delta))).
double homology_power(const PersistenceResult& r, const WeightedGraph& truth, Scenario scenario, int max_dim,
                      double delta, const std::vector<double>& grid);

void write_persistence_json(std::ostream& out, const PersistenceResult& r);
void write_barcode_csv(std::ostream& out, const std::vector<Bar>& bars);

}  // namespace khan
