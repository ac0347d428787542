#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace khan {

using Vertex = int;

/// Unordered vertex pair stored with u < v.
struct Edge {
    Vertex u = 0;
    Vertex v = 0;

    Edge() = default;
    Edge(Vertex a, Vertex b) : u(a < b ? a : b), v(a < b ? b : a) {}

    auto operator<=>(const Edge&) const = default;
};

/// Two-sided: an edge is present iff |W_e| > mu. One-sided: iff W_e > mu.
enum class Scenario { TwoSided, OneSided };

const char* to_string(Scenario s);

/// Sorted, duplicate-free set of edges. Immutable once built.
class EdgeSet {
public:
    EdgeSet() = default;
    /// Normalizes, sorts and deduplicates. Throws DataError on self-loops.
    explicit EdgeSet(std::vector<Edge> edges);
    EdgeSet(std::initializer_list<Edge> edges) : EdgeSet(std::vector<Edge>(edges)) {}

    /// Throws DataError if any endpoint is >= d.
    void check_vertices(int d) const;

    bool contains(Edge e) const;
    bool contains_all(const EdgeSet& other) const;
    std::size_t size() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }
    const std::vector<Edge>& edges() const { return edges_; }
    auto begin() const { return edges_.begin(); }
    auto end() const { return edges_.end(); }

    EdgeSet intersect(const EdgeSet& other) const;
    EdgeSet unite(const EdgeSet& other) const;
    EdgeSet with(Edge e) const;

    /// Every unordered pair on d vertices.
    static EdgeSet complete(int d);

    bool operator==(const EdgeSet&) const = default;

private:
    std::vector<Edge> edges_;
};

/// Symmetric edge-weight matrix with zero diagonal.
class WeightedGraph {
public:
    WeightedGraph() = default;
    explicit WeightedGraph(int d);
    /// Validates symmetry (exact) and zero diagonal; throws DataError.
    explicit WeightedGraph(Eigen::MatrixXd weights);

    int d() const { return static_cast<int>(w_.rows()); }
    double weight(Vertex a, Vertex b) const { return w_(a, b); }
    void set_weight(Vertex a, Vertex b, double value);
    const Eigen::MatrixXd& matrix() const { return w_; }

    /// Edges with nonzero weight.
    EdgeSet support() const;

private:
    Eigen::MatrixXd w_;
};

/// Candidate subgraph with its assigned p-value.
struct GraphFeature {
    std::vector<Vertex> vertices;  // sorted
    EdgeSet edges;
    double pvalue = 1.0;

    GraphFeature() = default;
    /// Derives the vertex list from the edges.
    explicit GraphFeature(EdgeSet e);
    GraphFeature(std::vector<Vertex> verts, EdgeSet e);

    /// Canonical signature ordering: (vertices, edges). P-values are ignored.
    bool same_placement(const GraphFeature& other) const {
        return vertices == other.vertices && edges == other.edges;
    }
};

bool signature_less(const GraphFeature& a, const GraphFeature& b);

EdgeSet filter_edges(const WeightedGraph& w, double mu, Scenario scenario);

bool feature_embedded(const GraphFeature& f, const EdgeSet& e);

/// CSV edge list `u,v,weight`. Vertex columns may be integers or labels;
/// labels are mapped to 0..d-1 in order of first appearance.
struct LabeledGraph {
    WeightedGraph graph;
    std::vector<std::string> labels;  // empty when the file used integer ids
};

LabeledGraph read_weighted_graph_csv(std::istream& in, int d_hint = 0);
void write_weighted_graph_csv(std::ostream& out, const WeightedGraph& g);

/// Unweighted edge list (`u,v` with optional header and optional third column).
EdgeSet read_edge_list_csv(std::istream& in, int* max_vertex_plus_one = nullptr);

}  // namespace khan
