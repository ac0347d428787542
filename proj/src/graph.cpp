#include "khan/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "csv_util.hpp"
#include "khan/error.hpp"

namespace khan {

const char* to_string(Scenario s) { return s == Scenario::TwoSided ? "two_sided" : "one_sided"; }

EdgeSet::EdgeSet(std::vector<Edge> edges) : edges_(std::move(edges)) {
    for (auto& e : edges_) {
        if (e.u == e.v) throw DataError("self-loop on vertex " + std::to_string(e.u));
        if (e.u < 0) throw DataError("negative vertex index");
        e = Edge(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

void EdgeSet::check_vertices(int d) const {
    for (const auto& e : edges_)
        if (e.v >= d)
            throw DataError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") references a vertex >= d=" + std::to_string(d));
}

bool EdgeSet::contains(Edge e) const { return std::binary_search(edges_.begin(), edges_.end(), Edge(e.u, e.v)); }

bool EdgeSet::contains_all(const EdgeSet& other) const {
    return std::includes(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end());
}

EdgeSet EdgeSet::intersect(const EdgeSet& other) const {
    EdgeSet out;
    std::set_intersection(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end(),
                          std::back_inserter(out.edges_));
    return out;
}

EdgeSet EdgeSet::unite(const EdgeSet& other) const {
    EdgeSet out;
    std::set_union(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end(),
                   std::back_inserter(out.edges_));
    return out;
}

EdgeSet EdgeSet::with(Edge e) const {
    EdgeSet out = *this;
    auto it = std::lower_bound(out.edges_.begin(), out.edges_.end(), e);
    if (it == out.edges_.end() || *it != e) out.edges_.insert(it, e);
    return out;
}

EdgeSet EdgeSet::complete(int d) {
    EdgeSet out;
    out.edges_.reserve(static_cast<std::size_t>(d) * (d > 0 ? d - 1 : 0) / 2);
    for (Vertex u = 0; u < d; ++u)
        for (Vertex v = u + 1; v < d; ++v) out.edges_.emplace_back(u, v);
    return out;
}

WeightedGraph::WeightedGraph(int d) : w_(Eigen::MatrixXd::Zero(d, d)) {
    if (d <= 0) throw DataError("graph needs at least one vertex");
}

WeightedGraph::WeightedGraph(Eigen::MatrixXd weights) : w_(std::move(weights)) {
    if (w_.rows() != w_.cols() || w_.rows() == 0) throw DataError("weight matrix must be square and non-empty");
    for (Eigen::Index u = 0; u < w_.rows(); ++u) {
        if (w_(u, u) != 0.0) throw DataError("weight matrix diagonal must be zero");
        for (Eigen::Index v = u + 1; v < w_.cols(); ++v)
            if (w_(u, v) != w_(v, u)) throw DataError("weight matrix must be symmetric");
    }
}

void WeightedGraph::set_weight(Vertex a, Vertex b, double value) {
    if (a == b) throw DataError("cannot weight a self-loop");
    w_(a, b) = value;
    w_(b, a) = value;
}

EdgeSet WeightedGraph::support() const {
    std::vector<Edge> out;
    for (Vertex u = 0; u < d(); ++u)
        for (Vertex v = u + 1; v < d(); ++v)
            if (w_(u, v) != 0.0) out.emplace_back(u, v);
    return EdgeSet(std::move(out));
}

GraphFeature::GraphFeature(EdgeSet e) : edges(std::move(e)) {
    for (const auto& x : edges) {
        vertices.push_back(x.u);
        vertices.push_back(x.v);
    }
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
}

GraphFeature::GraphFeature(std::vector<Vertex> verts, EdgeSet e) : vertices(std::move(verts)), edges(std::move(e)) {
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    for (const auto& x : edges)
        if (!std::binary_search(vertices.begin(), vertices.end(), x.u) ||
            !std::binary_search(vertices.begin(), vertices.end(), x.v))
            throw DataError("feature edge endpoint missing from its vertex list");
}

bool signature_less(const GraphFeature& a, const GraphFeature& b) {
    if (a.vertices != b.vertices) return a.vertices < b.vertices;
    return a.edges.edges() < b.edges.edges();
}

EdgeSet filter_edges(const WeightedGraph& w, double mu, Scenario scenario) {
    std::vector<Edge> out;
    const auto& m = w.matrix();
    for (Vertex u = 0; u < w.d(); ++u)
        for (Vertex v = u + 1; v < w.d(); ++v) {
            const double x = scenario == Scenario::TwoSided ? std::abs(m(u, v)) : m(u, v);
            if (x > mu) out.emplace_back(u, v);
        }
    return EdgeSet(std::move(out));
}

bool feature_embedded(const GraphFeature& f, const EdgeSet& e) { return e.contains_all(f.edges); }

namespace {

struct RawRow {
    std::string a, b;
    std::optional<double> w;
    std::size_t line;
};

}  // namespace

LabeledGraph read_weighted_graph_csv(std::istream& in, int d_hint) {
    std::vector<RawRow> rows;
    std::string line;
    std::size_t lineno = 0;
    bool all_int = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank(line)) continue;
        auto f = detail::split_csv(line);
        if (f.size() < 2) throw DataError("line " + std::to_string(lineno) + ": expected u,v,weight");
        if (rows.empty() && f[0] == "u" && f[1] == "v") continue;  // header
        RawRow r{std::string(f[0]), std::string(f[1]), std::nullopt, lineno};
        if (f.size() >= 3) {
            r.w = detail::parse_double(f[2]);
            if (!r.w) throw DataError("line " + std::to_string(lineno) + ": bad weight '" + std::string(f[2]) + "'");
        } else {
            r.w = 1.0;
        }
        if (!detail::parse_int(r.a) || !detail::parse_int(r.b)) all_int = false;
        rows.push_back(std::move(r));
    }

    LabeledGraph out;
    std::vector<std::pair<std::pair<int, int>, double>> triples;
    int dmax = 0;
    if (all_int) {
        for (const auto& r : rows) {
            const long long a = *detail::parse_int(r.a), b = *detail::parse_int(r.b);
            if (a < 0 || b < 0) throw DataError("line " + std::to_string(r.line) + ": negative vertex id");
            triples.push_back({{static_cast<int>(a), static_cast<int>(b)}, *r.w});
            dmax = std::max<int>(dmax, static_cast<int>(std::max(a, b)) + 1);
        }
    } else {
        std::unordered_map<std::string, int> ids;
        auto id_of = [&](const std::string& s) {
            auto [it, inserted] = ids.try_emplace(s, static_cast<int>(out.labels.size()));
            if (inserted) out.labels.push_back(s);
            return it->second;
        };
        for (const auto& r : rows) {
            const int a = id_of(r.a), b = id_of(r.b);
            triples.push_back({{a, b}, *r.w});
        }
        dmax = static_cast<int>(out.labels.size());
    }
    const int d = std::max(d_hint, dmax);
    if (d_hint > 0 && dmax > d_hint) throw DataError("edge list references vertices beyond d");
    if (d == 0) throw DataError("edge list is empty and no dimension was given");
    out.graph = WeightedGraph(d);
    for (const auto& [uv, w] : triples) {
        if (uv.first == uv.second) throw DataError("self-loop in edge list");
        out.graph.set_weight(uv.first, uv.second, w);
    }
    return out;
}

void write_weighted_graph_csv(std::ostream& out, const WeightedGraph& g) {
    out << "u,v,weight\n";
    char buf[64];
    for (Vertex u = 0; u < g.d(); ++u)
        for (Vertex v = u + 1; v < g.d(); ++v) {
            const double w = g.weight(u, v);
            if (w == 0.0) continue;
            auto res = std::to_chars(buf, buf + sizeof buf, w);
            out << u << ',' << v << ',' << std::string_view(buf, res.ptr - buf) << '\n';
        }
}

EdgeSet read_edge_list_csv(std::istream& in, int* max_vertex_plus_one) {
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    int dmax = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank(line)) continue;
        auto f = detail::split_csv(line);
        if (f.size() < 2) throw DataError("line " + std::to_string(lineno) + ": expected u,v");
        auto a = detail::parse_int(f[0]), b = detail::parse_int(f[1]);
        if (!a || !b) {
            if (edges.empty() && lineno == 1) continue;  // header
            throw DataError("line " + std::to_string(lineno) + ": vertex ids must be integers");
        }
        if (*a < 0 || *b < 0) throw DataError("line " + std::to_string(lineno) + ": negative vertex id");
        if (*a == *b) throw DataError("line " + std::to_string(lineno) + ": self-loop");
        edges.emplace_back(static_cast<Vertex>(*a), static_cast<Vertex>(*b));
        dmax = std::max<int>(dmax, static_cast<int>(std::max(*a, *b)) + 1);
    }
    if (max_vertex_plus_one) *max_vertex_plus_one = dmax;
    return EdgeSet(std::move(edges));
}

}  // namespace khan
