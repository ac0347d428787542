#include "khan/feature_select.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "khan/bhq.hpp"
#include "khan/error.hpp"

namespace khan {

namespace {

std::vector<std::vector<int>> automorphisms(int m, const EdgeSet& edges) {
    if (m > FeatureShape::kMaxVertices)
        throw ConfigError("feature templates are limited to " + std::to_string(FeatureShape::kMaxVertices) +
                          " vertices");
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        bool ok = true;
        for (const auto& e : edges)
            if (!edges.contains(Edge(perm[e.u], perm[e.v]))) {
                ok = false;
                break;
            }
        if (ok) out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

bool is_connected(int m, const EdgeSet& edges) {
    std::vector<int> parent(static_cast<std::size_t>(m));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    int components = m;
    for (const auto& e : edges) {
        const int a = find(e.u), b = find(e.v);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

class Adjacency {
public:
    Adjacency(const EdgeSet& edges, int d)
        : d_(d), words_((static_cast<std::size_t>(d) + 63) / 64), bits_(static_cast<std::size_t>(d) * words_),
          nbrs_(static_cast<std::size_t>(d)) {
        for (const auto& e : edges) {
            set(e.u, e.v);
            set(e.v, e.u);
            nbrs_[e.u].push_back(e.v);
            nbrs_[e.v].push_back(e.u);
        }
        for (auto& n : nbrs_) std::sort(n.begin(), n.end());
    }

    bool adjacent(int a, int b) const { return (bits_[a * words_ + (b >> 6)] >> (b & 63)) & 1u; }
    const std::vector<int>& neighbors(int a) const { return nbrs_[a]; }
    int d() const { return d_; }

private:
    void set(int a, int b) { bits_[a * words_ + (b >> 6)] |= std::uint64_t{1} << (b & 63); }

    int d_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::vector<int>> nbrs_;
};

// Backtracking embedder. Template vertices are visited in BFS order so each
// new vertex (except component roots) extends from an already-placed neighbor.
class Embedder {
public:
    Embedder(const FeatureShape& shape, const Adjacency& adj, std::size_t cap)
        : shape_(shape), adj_(adj), cap_(cap), auts_(automorphisms(shape.vertex_count(), shape.edges())) {
        const int m = shape.vertex_count();
        std::vector<std::vector<int>> tadj(static_cast<std::size_t>(m));
        for (const auto& e : shape.edges()) {
            tadj[e.u].push_back(e.v);
            tadj[e.v].push_back(e.u);
        }
        std::vector<int> pos(static_cast<std::size_t>(m), -1);
        while (static_cast<int>(order_.size()) < m) {
            int root = -1;
            for (int v = 0; v < m; ++v)
                if (pos[v] < 0 && (root < 0 || tadj[v].size() > tadj[root].size())) root = v;
            std::vector<int> queue{root};
            pos[root] = static_cast<int>(order_.size());
            order_.push_back(root);
            anchor_.push_back(-1);
            for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                const int t = queue[qi];
                for (int w : tadj[t])
                    if (pos[w] < 0) {
                        pos[w] = static_cast<int>(order_.size());
                        order_.push_back(w);
                        anchor_.push_back(pos[t]);
                        queue.push_back(w);
                    }
            }
        }
        back_.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            for (int w : tadj[order_[i]])
                if (pos[w] < i) back_[i].push_back(pos[w]);
        image_.assign(static_cast<std::size_t>(m), -1);
        used_.assign(static_cast<std::size_t>(adj.d()), 0);
    }

    std::vector<GraphFeature> run() {
        extend(0);
        std::sort(out_.begin(), out_.end(), signature_less);
        return std::move(out_);
    }

private:
    void extend(int i) {
        const int m = shape_.vertex_count();
        if (i == m) {
            emit();
            return;
        }
        auto try_vertex = [&](int g) {
            if (used_[g]) return;
            for (int b : back_[i])
                if (!adj_.adjacent(g, image_[order_[b]])) return;
            used_[g] = 1;
            image_[order_[i]] = g;
            extend(i + 1);
            used_[g] = 0;
            image_[order_[i]] = -1;
        };
        if (anchor_[i] >= 0) {
            for (int g : adj_.neighbors(image_[order_[anchor_[i]]])) try_vertex(g);
        } else {
            for (int g = 0; g < adj_.d(); ++g) try_vertex(g);
        }
    }

    // Each placement is reached once per automorphism; keep only the
    // lexicographically smallest image vector of its orbit.
    void emit() {
        const int m = shape_.vertex_count();
        for (const auto& a : auts_) {
            for (int t = 0; t < m; ++t) {
                const int lhs = image_[a[t]], rhs = image_[t];
                if (lhs < rhs) return;
                if (lhs > rhs) break;
            }
        }
        std::vector<Edge> edges;
        edges.reserve(shape_.edges().size());
        for (const auto& e : shape_.edges()) edges.emplace_back(image_[e.u], image_[e.v]);
        out_.emplace_back(image_, EdgeSet(std::move(edges)));
        if (out_.size() > cap_)
            throw BudgetError("candidate enumeration exceeded the cap of " + std::to_string(cap_) + " placements");
    }

    const FeatureShape& shape_;
    const Adjacency& adj_;
    std::size_t cap_;
    std::vector<std::vector<int>> auts_;
    std::vector<int> order_, anchor_;
    std::vector<std::vector<int>> back_;
    std::vector<int> image_;
    std::vector<char> used_;
    std::vector<GraphFeature> out_;
};

}  // namespace

std::uint64_t automorphism_count(int m, const EdgeSet& edges) { return automorphisms(m, edges).size(); }

FeatureShape::FeatureShape(std::string name, int m, EdgeSet edges)
    : name_(std::move(name)), m_(m), edges_(std::move(edges)) {
    if (m < 2) throw ConfigError("feature templates need at least two vertices");
    if (m > kMaxVertices)
        throw ConfigError("feature templates are limited to " + std::to_string(kMaxVertices) + " vertices");
    if (edges_.empty()) throw ConfigError("feature template has no edges");
    edges_.check_vertices(m);
    connected_ = is_connected(m, edges_);
    automorphisms_ = khan::automorphism_count(m, edges_);
}

FeatureShape FeatureShape::spider() { return FeatureShape("spider", 5, {{0, 1}, {0, 2}, {0, 3}, {3, 4}}); }

FeatureShape FeatureShape::triangle() { return FeatureShape("triangle", 3, {{0, 1}, {1, 2}, {0, 2}}); }

FeatureShape FeatureShape::cycle(int m) {
    if (m < 3) throw ConfigError("cycles need at least 3 vertices");
    std::vector<Edge> e;
    for (int i = 0; i < m; ++i) e.emplace_back(i, (i + 1) % m);
    return FeatureShape("cycle:" + std::to_string(m), m, EdgeSet(std::move(e)));
}

FeatureShape FeatureShape::clique(int m) {
    if (m < 2) throw ConfigError("cliques need at least 2 vertices");
    if (m > kMaxVertices) throw ConfigError("feature templates are limited to 8 vertices");
    return FeatureShape("clique:" + std::to_string(m), m, EdgeSet::complete(m));
}

FeatureShape FeatureShape::star(int m) {
    if (m < 2) throw ConfigError("stars need at least 2 vertices");
    std::vector<Edge> e;
    for (int i = 1; i < m; ++i) e.emplace_back(0, i);
    return FeatureShape("star:" + std::to_string(m), m, EdgeSet(std::move(e)));
}

FeatureShape FeatureShape::path(int m) {
    if (m < 2) throw ConfigError("paths need at least 2 vertices");
    std::vector<Edge> e;
    for (int i = 0; i + 1 < m; ++i) e.emplace_back(i, i + 1);
    return FeatureShape("path:" + std::to_string(m), m, EdgeSet(std::move(e)));
}

FeatureShape FeatureShape::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open template file '" + path + "'");
    int m = 0;
    EdgeSet edges = read_edge_list_csv(in, &m);
    return FeatureShape("template:" + path, m, std::move(edges));
}

FeatureShape FeatureShape::parse(const std::string& spec) {
    if (spec == "triangle") return triangle();
    if (spec == "spider") return spider();
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("unknown shape '" + spec + "'");
    const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
    if (kind == "template") return from_file(arg);
    int k = 0;
    try {
        std::size_t used = 0;
        k = std::stoi(arg, &used);
        if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
        throw ConfigError("shape '" + spec + "' needs an integer size");
    }
    if (kind == "cycle") return cycle(k);
    if (kind == "clique") return clique(k);
    if (kind == "star") return star(k);
    if (kind == "path") return path(k);
    throw ConfigError("unknown shape '" + spec + "'");
}

CandidateCount count_total_candidates(const FeatureShape& shape, int d) {
    const int m = shape.vertex_count();
    if (d < m) throw ConfigError("graph has fewer vertices than the feature template");
    CandidateCount c;
    unsigned __int128 falling = 1;
    bool overflow = false;
    long double approx = 1.0L;
    for (int i = 0; i < m; ++i) {
        approx *= static_cast<long double>(d - i);
        if (!overflow) {
            const unsigned __int128 next = falling * static_cast<unsigned>(d - i);
            if (next / static_cast<unsigned>(d - i) != falling) overflow = true;
            falling = next;
        }
    }
    const auto aut = shape.automorphism_count();
    if (!overflow) {
        const unsigned __int128 count = falling / aut;
        if (count <= static_cast<unsigned __int128>(INT64_MAX)) {
            c.exact = static_cast<std::uint64_t>(count);
            c.value = static_cast<double>(*c.exact);
            return c;
        }
    }
    c.value = static_cast<double>(approx / static_cast<long double>(aut));
    return c;
}

std::vector<GraphFeature> enumerate_candidates(const FeatureShape& shape, const EdgeSet& e0, int d,
                                               const EnumerationOptions& opts) {
    e0.check_vertices(d);
    if (d < shape.vertex_count()) return {};
    const Adjacency adj(e0, d);
    return Embedder(shape, adj, opts.max_candidates).run();
}

Eigen::MatrixXd edge_pvalue_matrix(const EdgeStatistics& stats, std::vector<std::string>* warnings) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Ones(stats.d, stats.d);
    for (int u = 0; u < stats.d; ++u)
        for (int v = u + 1; v < stats.d; ++v) {
            const Edge e(u, v);
            if (!(stats.sigma(e) > 0.0)) {
                if (warnings)
                    warnings->push_back("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                        ") has zero variance; treated as p = 1");
                continue;
            }
            p(u, v) = p(v, u) = edge_pvalue(stats, e);
        }
    return p;
}

double feature_pvalue(const GraphFeature& f, const Eigen::MatrixXd& pvalues) {
    double a = 0.0;
    for (const auto& e : f.edges) a = std::max(a, pvalues(e.u, e.v));
    return a;
}

namespace {

EdgeSet prescreen(const Eigen::MatrixXd& p, double q) {
    std::vector<Edge> out;
    for (int u = 0; u < p.rows(); ++u)
        for (int v = u + 1; v < p.cols(); ++v)
            if (p(u, v) < q) out.emplace_back(u, v);
    return EdgeSet(std::move(out));
}

void finish(SelectionResult& res) {
    std::vector<double> alphas;
    alphas.reserve(res.candidates.size());
    for (const auto& f : res.candidates) alphas.push_back(f.pvalue);
    const BhResult bh = bh_step_up(alphas, res.q, res.total_j, /*order_strict=*/true);
    res.alpha_hat = bh.alpha_hat;
    res.j_max = bh.j_max;
    for (const auto& f : res.candidates)
        if (f.pvalue < res.alpha_hat) res.selected.push_back(f);
}

void check_q(double q) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("FDR level q must lie in (0,1)");
}

}  // namespace

SelectionResult select_features(const EdgeStatistics& stats, const FeatureShape& shape, double q,
                                const EnumerationOptions& opts) {
    check_q(q);
    SelectionResult res;
    res.q = q;
    const auto total = count_total_candidates(shape, stats.d);
    res.total_j = total.value;
    res.total_j_exact = total.exact;

    const Eigen::MatrixXd p = edge_pvalue_matrix(stats, &res.warnings);
    const EdgeSet e0 = prescreen(p, q);
    res.prescreened_edges = e0.size();
    res.candidates = enumerate_candidates(shape, e0, stats.d, opts);
    for (auto& f : res.candidates) f.pvalue = feature_pvalue(f, p);
    finish(res);
    return res;
}

SelectionResult select_features(const EdgeStatistics& stats, const std::vector<GraphFeature>& features,
                                double total_j, double q) {
    check_q(q);
    if (!(total_j >= static_cast<double>(features.size())))
        throw ConfigError("explicit candidate family: J must be at least the number of features");
    SelectionResult res;
    res.q = q;
    res.total_j = total_j;
    const Eigen::MatrixXd p = edge_pvalue_matrix(stats, &res.warnings);
    const EdgeSet e0 = prescreen(p, q);
    res.prescreened_edges = e0.size();
    for (const auto& f : features) {
        f.edges.check_vertices(stats.d);
        if (!feature_embedded(f, e0)) continue;  // keeps alpha = 1, cannot be selected
        GraphFeature g = f;
        g.pvalue = feature_pvalue(g, p);
        res.candidates.push_back(std::move(g));
    }
    std::sort(res.candidates.begin(), res.candidates.end(), signature_less);
    finish(res);
    return res;
}

}  // namespace khan
