#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "khan/estimators.hpp"
#include "khan/graph.hpp"

namespace khan {

/// A graph template on vertices 0..m-1 whose placements on the data graph
/// are the hypotheses being tested.
class FeatureShape {
public:
    static constexpr int kMaxVertices = 8;

    /// Throws ConfigError for m > 8, m < 2, or a template without edges.
    FeatureShape(std::string name, int m, EdgeSet edges);

    static FeatureShape triangle();
    static FeatureShape cycle(int m);
    static FeatureShape clique(int m);
    /// One center joined to m-1 leaves.
    static FeatureShape star(int m);
    static FeatureShape path(int m);
    /// The five-vertex tree with one degree-3 vertex and legs of length 2, 1, 1.
    static FeatureShape spider();
    /// Template from a CSV edge list on vertices 0..m-1.
    static FeatureShape from_file(const std::string& path);
    /// Parses `triangle|spider|cycle:K|clique:K|star:K|path:K|template:FILE`.
    static FeatureShape parse(const std::string& spec);

    const std::string& name() const { return name_; }
    int vertex_count() const { return m_; }
    const EdgeSet& edges() const { return edges_; }
    bool connected() const { return connected_; }
    std::uint64_t automorphism_count() const { return automorphisms_; }

private:
    std::string name_;
    int m_;
    EdgeSet edges_;
    bool connected_ = true;
    std::uint64_t automorphisms_ = 1;
};

/// Brute force over all m! relabelings. Throws ConfigError for m > 8.
std::uint64_t automorphism_count(int m, const EdgeSet& edges);

struct CandidateCount {
    double value = 0.0;                  // always set
    std::optional<std::uint64_t> exact;  // set when the count fits in 63 bits
};

/// Distinct placements of the shape on d labeled vertices: d!/(d-m)! / |Aut|.
CandidateCount count_total_candidates(const FeatureShape& shape, int d);

struct EnumerationOptions {
    std::size_t max_candidates = 10'000'000;
};

/// Every placement of the shape whose edges lie in `e0`, in signature order.
std::vector<GraphFeature> enumerate_candidates(const FeatureShape& shape, const EdgeSet& e0, int d,
                                               const EnumerationOptions& opts = {});

struct SelectionResult {
    double q = 0.0;
    double total_j = 0.0;
    std::optional<std::uint64_t> total_j_exact;
    double alpha_hat = 0.0;
    std::size_t j_max = 0;
    std::size_t prescreened_edges = 0;
    std::vector<GraphFeature> candidates;  // instantiated, with p-values
    std::vector<GraphFeature> selected;
    std::vector<std::string> warnings;
};

/// Edge p-value matrix; pairs with sigma = 0 get p = 1 and a warning.
Eigen::MatrixXd edge_pvalue_matrix(const EdgeStatistics& stats, std::vector<std::string>* warnings = nullptr);

SelectionResult select_features(const EdgeStatistics& stats, const FeatureShape& shape, double q,
                                const EnumerationOptions& opts = {});

/// Caller-supplied candidate family with its own total J >= features.size().
SelectionResult select_features(const EdgeStatistics& stats, const std::vector<GraphFeature>& features,
                                double total_j, double q);

/// Max edge p-value; 0 for a feature with no edges.
double feature_pvalue(const GraphFeature& f, const Eigen::MatrixXd& pvalues);

}  // namespace khan
