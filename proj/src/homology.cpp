#include "khan/homology.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <limits>
#include <queue>

#include "khan/error.hpp"

namespace khan {

namespace {

void check_dims(int d, int max_dim) {
    if (d < 2) throw ConfigError("clique complexes need d >= 2");
    if (max_dim < 1 || max_dim > d - 1)
        throw ConfigError("dimension K must satisfy 1 <= K <= d-1 (got K=" + std::to_string(max_dim) +
                          ", d=" + std::to_string(d) + ")");
}

struct Bitsets {
    Bitsets(int d) : words((static_cast<std::size_t>(d) + 63) / 64), bits(static_cast<std::size_t>(d) * words) {}
    std::uint64_t* row(int v) { return bits.data() + v * words; }
    const std::uint64_t* row(int v) const { return bits.data() + v * words; }
    void set(int a, int b) {
        row(a)[b >> 6] |= std::uint64_t{1} << (b & 63);
        row(b)[a >> 6] |= std::uint64_t{1} << (a & 63);
    }
    void reset(int a, int b) {
        row(a)[b >> 6] &= ~(std::uint64_t{1} << (b & 63));
        row(b)[a >> 6] &= ~(std::uint64_t{1} << (a & 63));
    }
    bool test(int a, int b) const { return (row(a)[b >> 6] >> (b & 63)) & 1u; }

    std::size_t words;
    std::vector<std::uint64_t> bits;
};

template <class Fn>
void for_each_bit(const std::vector<std::uint64_t>& set, Fn&& fn) {
    for (std::size_t w = 0; w < set.size(); ++w) {
        std::uint64_t x = set[w];
        while (x) {
            const int b = std::countr_zero(x);
            fn(static_cast<int>(w * 64 + b));
            x &= x - 1;
        }
    }
}

// Extends `clique` by vertices of `cand` (all larger than the clique's
// members and adjacent to all of them), depth-first in ascending order.
template <class Fn>
void extend_cliques(const Bitsets& adj, std::vector<int>& clique, const std::vector<std::uint64_t>& cand,
                    int remaining, Fn&& fn) {
    if (remaining == 0) return;
    for_each_bit(cand, [&](int w) {
        clique.push_back(w);
        fn(clique);
        if (remaining > 1) {
            std::vector<std::uint64_t> next(cand.size());
            const auto* nw = adj.row(w);
            for (std::size_t i = 0; i < cand.size(); ++i) next[i] = cand[i] & nw[i];
            // keep only vertices > w
            const std::size_t word = static_cast<std::size_t>(w) >> 6;
            for (std::size_t i = 0; i < word; ++i) next[i] = 0;
            next[word] &= (w & 63) == 63 ? 0 : ~((std::uint64_t{2} << (w & 63)) - 1);
            extend_cliques(adj, clique, next, remaining - 1, fn);
        }
        clique.pop_back();
    });
}

using Col = std::vector<std::pair<std::size_t, BigInt>>;

void normalize(Col& c) {
    if (c.empty()) return;
    BigInt g = 0;
    for (const auto& [r, v] : c) {
        g = boost::multiprecision::gcd(g, v);
        if (g == 1) break;
    }
    if (g < 0) g = -g;
    if (g > 1)
        for (auto& [r, v] : c) v /= g;
}

// a*x - b*y on sorted sparse columns.
Col combine(const BigInt& a, const Col& x, const BigInt& b, const Col& y) {
    Col out;
    out.reserve(x.size() + y.size());
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
            out.emplace_back(x[i].first, a * x[i].second);
            ++i;
        } else if (i == x.size() || y[j].first < x[i].first) {
            out.emplace_back(y[j].first, -(b * y[j].second));
            ++j;
        } else {
            BigInt v = a * x[i].second - b * y[j].second;
            if (v != 0) out.emplace_back(x[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    normalize(out);
    return out;
}

BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::uint64_t to_u64(const BigInt& v) {
    if (v > std::numeric_limits<std::uint64_t>::max()) throw ConfigError("cycle rank exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
}

}  // namespace

SimplexKeyer::SimplexKeyer(int d, int max_dim) {
    bits_ = std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(std::max(d - 1, 1)))));
    if ((max_dim + 1) * bits_ > 64)
        throw ConfigError("simplex dimension " + std::to_string(max_dim) + " too large for d=" + std::to_string(d));
}

std::uint64_t SimplexKeyer::key(const Vertex* v, int count) const {
    std::uint64_t k = 0;
    for (int i = 0; i < count; ++i) k = (k << bits_) | static_cast<std::uint64_t>(v[i]);
    return k;
}

std::optional<std::size_t> CliqueComplex::index_of(int k, const Simplex& s) const {
    if (k < 0 || k > max_dim || static_cast<int>(s.size()) != k + 1) return std::nullopt;
    if (k == 0) return (s[0] >= 0 && s[0] < d) ? std::optional<std::size_t>(s[0]) : std::nullopt;
    auto it = index[k].find(keyer->key(s));
    if (it == index[k].end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> CliqueComplex::dims() const {
    std::vector<std::size_t> out;
    for (const auto& s : simplices) out.push_back(s.size());
    return out;
}

CliqueComplex build_clique_complex(const EdgeSet& e, int d, int max_dim, const ComplexOptions& opts) {
    check_dims(d, max_dim);
    e.check_vertices(d);
    CliqueComplex cx;
    cx.d = d;
    cx.max_dim = max_dim;
    cx.keyer.emplace(d, max_dim);
    cx.simplices.resize(static_cast<std::size_t>(max_dim) + 1);
    cx.index.resize(static_cast<std::size_t>(max_dim) + 1);

    Bitsets adj(d);
    for (const auto& x : e) adj.set(x.u, x.v);

    std::size_t total = 0;
    std::vector<int> clique;
    for (int v = 0; v < d; ++v) {
        clique.assign(1, v);
        cx.simplices[0].push_back({v});
        ++total;
        std::vector<std::uint64_t> cand(adj.row(v), adj.row(v) + adj.words);
        const std::size_t word = static_cast<std::size_t>(v) >> 6;
        for (std::size_t i = 0; i < word; ++i) cand[i] = 0;
        cand[word] &= (v & 63) == 63 ? 0 : ~((std::uint64_t{2} << (v & 63)) - 1);
        extend_cliques(adj, clique, cand, max_dim, [&](const std::vector<int>& c) {
            const int k = static_cast<int>(c.size()) - 1;
            cx.simplices[k].push_back(c);
            if (++total > opts.max_simplices)
                throw BudgetError("clique complex exceeded the cap of " + std::to_string(opts.max_simplices) +
                                  " simplices");
        });
    }
    for (int k = 1; k <= max_dim; ++k) {
        std::sort(cx.simplices[k].begin(), cx.simplices[k].end());
        auto& idx = cx.index[k];
        idx.reserve(cx.simplices[k].size());
        for (std::size_t i = 0; i < cx.simplices[k].size(); ++i) idx.emplace(cx.keyer->key(cx.simplices[k][i]), i);
    }
    return cx;
}

BoundaryMatrix boundary_matrix(const CliqueComplex& cx, int k) {
    if (k < 1 || k > cx.max_dim) throw ConfigError("boundary dimension out of range");
    BoundaryMatrix bm;
    bm.k = k;
    bm.matrix.rows = cx.count(k - 1);
    bm.matrix.columns.reserve(cx.count(k));
    Simplex face;
    for (const auto& s : cx.simplices[k]) {
        std::vector<std::pair<std::size_t, std::int64_t>> col;
        for (int i = 0; i <= k; ++i) {
            face.clear();
            for (int j = 0; j <= k; ++j)
                if (j != i) face.push_back(s[j]);
            const auto row = cx.index_of(k - 1, face);
            if (!row) throw ConfigError("clique complex is missing a face");
            col.emplace_back(*row, (i % 2 == 0) ? 1 : -1);
        }
        std::sort(col.begin(), col.end());
        bm.matrix.columns.push_back(std::move(col));
    }
    return bm;
}

std::size_t exact_rank(const SparseIntMatrix& m) {
    const std::size_t ncols = m.cols();
    std::vector<Col> cols(ncols);
    std::vector<std::size_t> row_nnz(m.rows, 0);
    std::vector<std::vector<std::size_t>> row_cols(m.rows);
    std::vector<char> alive(ncols, 1);

    using Item = std::pair<std::size_t, std::size_t>;  // (nnz, column)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;

    for (std::size_t c = 0; c < ncols; ++c) {
        for (const auto& [r, v] : m.columns[c]) {
            if (r >= m.rows) throw ConfigError("sparse matrix row index out of range");
            if (v == 0) continue;
            cols[c].emplace_back(r, BigInt(v));
        }
        std::sort(cols[c].begin(), cols[c].end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < cols[c].size(); ++i)
            if (cols[c][i].first == cols[c][i - 1].first) throw ConfigError("duplicate row in sparse column");
        normalize(cols[c]);
        for (const auto& [r, v] : cols[c]) {
            ++row_nnz[r];
            row_cols[r].push_back(c);
        }
        if (!cols[c].empty()) heap.emplace(cols[c].size(), c);
    }

    auto has_row = [&](std::size_t c, std::size_t r) -> const BigInt* {
        auto it = std::lower_bound(cols[c].begin(), cols[c].end(), r,
                                   [](const auto& a, std::size_t row) { return a.first < row; });
        return (it != cols[c].end() && it->first == r) ? &it->second : nullptr;
    };

    std::size_t rank = 0;
    while (!heap.empty()) {
        const auto [nnz, c] = heap.top();
        heap.pop();
        if (!alive[c] || cols[c].size() != nnz) continue;
        if (cols[c].empty()) {
            alive[c] = 0;
            continue;
        }
        // Markowitz: among the pivot column's rows take the one in fewest columns.
        std::size_t prow = cols[c].front().first;
        for (const auto& [r, v] : cols[c])
            if (row_nnz[r] < row_nnz[prow]) prow = r;
        const BigInt a = *has_row(c, prow);

        std::vector<std::size_t> targets;
        for (std::size_t c2 : row_cols[prow])
            if (c2 != c && alive[c2] && has_row(c2, prow)) targets.push_back(c2);
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

        for (std::size_t c2 : targets) {
            const BigInt b = *has_row(c2, prow);
            for (const auto& [r, v] : cols[c2]) --row_nnz[r];
            cols[c2] = combine(a, cols[c2], b, cols[c]);
            for (const auto& [r, v] : cols[c2]) {
                ++row_nnz[r];
                row_cols[r].push_back(c2);
            }
            if (cols[c2].empty())
                alive[c2] = 0;
            else
                heap.emplace(cols[c2].size(), c2);
        }
        for (const auto& [r, v] : cols[c]) --row_nnz[r];
        row_cols[prow].clear();
        alive[c] = 0;
        ++rank;
    }
    return rank;
}

CycleRank cycle_rank_breakdown(const EdgeSet& e, int d, int max_dim, const ComplexOptions& opts) {
    const CliqueComplex cx = build_clique_complex(e, d, max_dim, opts);
    CycleRank out;
    for (int k = 1; k <= max_dim; ++k) {
        const std::size_t nk = cx.count(k);
        const std::size_t rk = nk == 0 ? 0 : exact_rank(boundary_matrix(cx, k).matrix);
        out.per_dim.push_back(nk - rk);
        out.total += nk - rk;
    }
    return out;
}

std::uint64_t cycle_rank(const EdgeSet& e, int d, int max_dim, const ComplexOptions& opts) {
    return cycle_rank_breakdown(e, d, max_dim, opts).total;
}

std::uint64_t complete_graph_cycle_rank(int d, int max_dim) {
    check_dims(d, max_dim);
    BigInt total = 0;
    for (int k = 1; k <= max_dim; ++k) total += binomial(d - 1, k + 1);
    return to_u64(total);
}

std::uint64_t paper_clique_cycle_rank(int d, int max_dim) {
    check_dims(d, max_dim);
    std::uint64_t total = 0;
    for (int k = 1; k <= max_dim; ++k)
        total += static_cast<std::uint64_t>(d - k) * static_cast<std::uint64_t>(d - k - 1) / 2;
    return total;
}

std::uint64_t intersection_cycle_rank(const EdgeSet& e1, const EdgeSet& e2, int d, int max_dim) {
    return cycle_rank(e1.intersect(e2), d, max_dim);
}

CycleRankTracker::CycleRankTracker(int d, int max_dim)
    : d_(d), max_dim_(max_dim), words_((static_cast<std::size_t>(d) + 63) / 64),
      adj_(static_cast<std::size_t>(d) * words_), keyer_(d, max_dim) {
    check_dims(d, max_dim);
    index_.resize(static_cast<std::size_t>(max_dim) + 1);
    counts_.assign(static_cast<std::size_t>(max_dim) + 1, 0);
    counts_[0] = static_cast<std::size_t>(d);
    basis_.resize(static_cast<std::size_t>(max_dim) + 1);
    rank_dim_.assign(static_cast<std::size_t>(max_dim) + 1, 0);
}

bool CycleRankTracker::has_edge(Edge e) const {
    return (adj_[e.u * words_ + (static_cast<std::size_t>(e.v) >> 6)] >> (e.v & 63)) & 1u;
}

std::uint64_t CycleRankTracker::rank(int k) const {
    if (k < 1 || k > max_dim_) throw ConfigError("dimension out of range");
    return counts_[k] - rank_dim_[k];
}

std::size_t CycleRankTracker::simplex_count(int k) const {
    if (k < 0 || k > max_dim_) throw ConfigError("dimension out of range");
    return counts_[k];
}

void CycleRankTracker::for_each_clique(Edge e, const std::function<void(const Simplex&)>& fn) const {
    // New simplices are e ∪ C for cliques C in the common neighborhood, |C| <= K-1.
    Simplex s{e.u, e.v};
    fn(s);
    if (max_dim_ < 2) return;
    Bitsets view(0);
    view.words = words_;
    view.bits = adj_;  // copy keeps extend_cliques' interface simple
    std::vector<std::uint64_t> common(words_);
    for (std::size_t i = 0; i < words_; ++i) common[i] = adj_[e.u * words_ + i] & adj_[e.v * words_ + i];
    std::vector<int> clique;
    extend_cliques(view, clique, common, max_dim_ - 1, [&](const std::vector<int>& c) {
        Simplex t(c.begin(), c.end());
        t.push_back(e.u);
        t.push_back(e.v);
        std::sort(t.begin(), t.end());
        fn(t);
    });
}

std::size_t CycleRankTracker::new_simplex_count(Edge e) const {
    std::size_t n = 0;
    for_each_clique(e, [&](const Simplex&) { ++n; });
    return n;
}

bool CycleRankTracker::reduce_and_insert(int k, Column col) {
    Col c;
    c.reserve(col.rows.size());
    for (std::size_t i = 0; i < col.rows.size(); ++i) c.emplace_back(col.rows[i], std::move(col.vals[i]));
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& basis = basis_[k];
    while (!c.empty()) {
        auto it = basis.find(c.back().first);
        if (it == basis.end()) break;
        Col pivot_col;
        pivot_col.reserve(it->second.rows.size());
        for (std::size_t i = 0; i < it->second.rows.size(); ++i)
            pivot_col.emplace_back(it->second.rows[i], it->second.vals[i]);
        const BigInt a = pivot_col.back().second;
        const BigInt b = c.back().second;
        c = combine(a, c, b, pivot_col);
    }
    if (c.empty()) return false;
    Column stored;
    stored.rows.reserve(c.size());
    stored.vals.reserve(c.size());
    for (auto& [r, v] : c) {
        stored.rows.push_back(r);
        stored.vals.push_back(std::move(v));
    }
    const std::size_t pivot = stored.rows.back();
    basis.emplace(pivot, std::move(stored));
    return true;
}

std::uint64_t CycleRankTracker::add_edge(Edge e) {
    e = Edge(e.u, e.v);
    if (e.u == e.v || e.u < 0 || e.v >= d_) throw ConfigError("edge out of range");
    if (has_edge(e)) throw ConfigError("edge already present");

    std::vector<std::vector<Simplex>> fresh(static_cast<std::size_t>(max_dim_) + 1);
    for_each_clique(e, [&](const Simplex& s) { fresh[s.size() - 1].push_back(s); });

    adj_[e.u * words_ + (static_cast<std::size_t>(e.v) >> 6)] |= std::uint64_t{1} << (e.v & 63);
    adj_[e.v * words_ + (static_cast<std::size_t>(e.u) >> 6)] |= std::uint64_t{1} << (e.u & 63);

    std::uint64_t before = rank_;
    Simplex face;
    for (int k = 1; k <= max_dim_; ++k) {
        for (const auto& s : fresh[k]) {
            Column col;
            for (int i = 0; i <= k; ++i) {
                face.clear();
                for (int j = 0; j <= k; ++j)
                    if (j != i) face.push_back(s[j]);
                std::size_t row;
                if (k == 1) {
                    row = static_cast<std::size_t>(face[0]);
                } else {
                    auto it = index_[k - 1].find(keyer_.key(face));
                    if (it == index_[k - 1].end()) throw ConfigError("internal: missing face in tracker");
                    row = it->second;
                }
                col.rows.push_back(row);
                col.vals.emplace_back((i % 2 == 0) ? 1 : -1);
            }
            index_[k].emplace(keyer_.key(s), counts_[k]);
            ++counts_[k];
            if (reduce_and_insert(k, std::move(col))) ++rank_dim_[k];
        }
    }
    rank_ = 0;
    for (int k = 1; k <= max_dim_; ++k) rank_ += counts_[k] - rank_dim_[k];
    return rank_ - before;
}

std::uint64_t rank_increment(const EdgeSet& base, Edge e, int d, int max_dim, const RankIncrementOptions& opts) {
    e = Edge(e.u, e.v);
    if (base.contains(e)) throw ConfigError("rank_increment: edge already in the base set");
    base.check_vertices(d);
    if (e.v >= d) throw ConfigError("rank_increment: edge out of range");
    CycleRankTracker tracker(d, max_dim);
    for (const auto& x : base) tracker.add_edge(x);
    if (tracker.new_simplex_count(e) <= opts.incremental_limit) return tracker.add_edge(e);
    return cycle_rank(base.with(e), d, max_dim) - cycle_rank(base, d, max_dim);
}

void write_complex_json(std::ostream& out, const CliqueComplex& cx) {
    out << "{\"dims\":[";
    for (int k = 0; k <= cx.max_dim; ++k) out << (k ? "," : "") << cx.count(k);
    out << "],\"simplices\":{";
    for (int k = 0; k <= cx.max_dim; ++k) {
        out << (k ? "," : "") << '"' << k << "\":[";
        for (std::size_t i = 0; i < cx.simplices[k].size(); ++i) {
            out << (i ? "," : "") << '[';
            for (std::size_t j = 0; j < cx.simplices[k][i].size(); ++j)
                out << (j ? "," : "") << cx.simplices[k][i][j];
            out << ']';
        }
        out << ']';
    }
    out << "}}";
}

}  // namespace khan
