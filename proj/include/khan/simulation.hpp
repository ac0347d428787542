#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "khan/estimators.hpp"
#include "khan/feature_select.hpp"
#include "khan/graph.hpp"
#include "khan/rng.hpp"

namespace khan {

enum class GgmFlavor { Table1, Homology };

/// Block-diagonal precision design: m1 blocks of 3, m2 of 4 and m3 of 5 vertices.
/// Table1 plants a triangle, a 4-cycle plus one chord and a 5-cycle plus three
/// chords. Homology plants 3-, 4- and 5-cliques and drops each 5-clique edge
/// with probability `edge_drop`.
struct GgmDesign {
    GgmFlavor flavor = GgmFlavor::Table1;
    int m1 = 0, m2 = 0, m3 = 0;
    double weight_low = 0.85;
    double weight_high = 1.0;
    double diag_pad = 0.1;
    double edge_drop = 0.1;

    int d() const { return 3 * m1 + 4 * m2 + 5 * m3; }
    static GgmDesign table1(int m1, int m2, int m3);
    static GgmDesign homology(int m1, int m2, int m3);
};

struct GgmModel {
    Eigen::MatrixXd theta;
    WeightedGraph truth;  // off-diagonal part of theta
    EdgeSet support;
};

GgmModel gen_ggm_model(const GgmDesign& design, Rng& rng);

/// Rows L z with L the Cholesky factor of theta^{-1}. Throws CholeskyFailure.
SampleMatrix sample_gaussian(const Eigen::MatrixXd& theta, int n, Rng& rng);

/// Forest of uniformly random labeled trees (Prüfer codes) with sizes drawn
/// uniformly from [size_low, size_high], packed into consecutive vertex blocks
/// until fewer vertices remain than the next drawn size. When `templates` is
/// non-empty, tree shapes cycle through the templates instead.
struct IsingDesign {
    int d = 200;
    int size_low = 6;
    int size_high = 10;
    double weight_low = 0.9;
    double weight_high = 1.0;
    double theta = 0.45;
    std::vector<FeatureShape> templates;

    static IsingDesign table2(int d);
};

struct IsingModel {
    WeightedGraph weights;
    EdgeSet support;
};

IsingModel gen_ising_forest(const IsingDesign& design, Rng& rng);

/// Exact sampling by propagating signs from a root of each tree. Throws NotAForest.
SampleMatrix sample_ising_forest(const WeightedGraph& weights, int n, Rng& rng);

struct FdpPower {
    double fdp = 0.0;
    double power = 0.0;
};

FdpPower fdp_power(const std::vector<GraphFeature>& selected, const std::vector<GraphFeature>& truth);

enum class ModelKind { Ggm, Ising };

struct ExperimentConfig {
    ModelKind model = ModelKind::Ggm;
    std::string preset = "custom";
    /// "feature" or "homology" (GGM only).
    std::string experiment = "feature";
    GgmDesign ggm;
    IsingDesign ising;
    std::vector<std::string> shapes{"triangle"};
    int n = 400;
    double q = 0.05;
    std::optional<double> lambda;
    // homology experiments
    int max_dim = 2;
    double mu0 = 0.0;
    double mu1 = 1.0;
    double power_c = 1.0;
    int power_grid = 101;

    int reps = 1;
    std::uint64_t seed = 0;
    int parallelism = 1;

    nlohmann::json to_json() const;
    /// Throws ConfigError on unknown keys or invalid values.
    static ExperimentConfig from_json(const nlohmann::json& j);
    /// Paper designs: "table1" (d in {200,250,300,350}), "table2" and "homology".
    static ExperimentConfig preset_config(const std::string& name, int d = 0);
    /// Throws ConfigError on invalid values.
    void validate() const;
};

struct RepResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    // feature experiments, one entry per shape
    std::vector<double> fdp;
    std::vector<double> power;
    std::vector<std::size_t> selected;
    std::vector<std::size_t> true_features;
    // homology experiments
    double ufdp = 0.0;
    double homology_power = 0.0;
    std::size_t change_points = 0;
    std::uint64_t initial_rank = 0;

    bool operator==(const RepResult&) const = default;
};

struct ExperimentReport {
    std::string kind;  // "feature" or "homology"
    ExperimentConfig config;
    std::vector<std::string> labels;
    std::vector<RepResult> reps;
    std::vector<double> fdr;         // per label, mean over successful reps
    std::vector<double> mean_power;  // per label
    double ufdr = 0.0;
    double mean_homology_power = 0.0;
    std::size_t failures = 0;
    double wall_seconds = 0.0;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
};

ExperimentReport run_feature_experiment(const ExperimentConfig& cfg);
ExperimentReport run_homology_experiment(const ExperimentConfig& cfg);

/// Dispatches on `experiment`.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Single-rep building blocks, exposed for tests and the CLI.
RepResult feature_rep(const ExperimentConfig& cfg, std::size_t index);
RepResult homology_rep(const ExperimentConfig& cfg, std::size_t index);

}  // namespace khan
