#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "khan/graph.hpp"

namespace khan {

using Simplex = std::vector<Vertex>;  // ascending vertex ids
using BigInt = boost::multiprecision::cpp_int;

/// Packs an ascending simplex into 64 bits; requires (k+1) * ceil(log2 d) <= 64.
class SimplexKeyer {
public:
    SimplexKeyer(int d, int max_dim);
    std::uint64_t key(const Vertex* v, int count) const;
    std::uint64_t key(const Simplex& s) const { return key(s.data(), static_cast<int>(s.size())); }

private:
    int bits_;
};

/// Clique complex of an edge set truncated at dimension K. Dimension-k
/// simplices are (k+1)-cliques, sorted lexicographically.
struct CliqueComplex {
    int d = 0;
    int max_dim = 0;
    std::vector<std::vector<Simplex>> simplices;  // [k][i]

    std::size_t count(int k) const { return k <= max_dim ? simplices[k].size() : 0; }
    std::optional<std::size_t> index_of(int k, const Simplex& s) const;
    std::vector<std::size_t> dims() const;

    // Filled by build_clique_complex.
    std::vector<std::unordered_map<std::uint64_t, std::size_t>> index;
    std::optional<SimplexKeyer> keyer;
};

struct ComplexOptions {
    std::size_t max_simplices = 5'000'000;
};

/// Throws ConfigError unless 1 <= K <= d-1; BudgetError past the simplex cap.
CliqueComplex build_clique_complex(const EdgeSet& e, int d, int max_dim, const ComplexOptions& opts = {});

/// Column-major sparse integer matrix; each column sorted by row.
struct SparseIntMatrix {
    std::size_t rows = 0;
    std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> columns;

    std::size_t cols() const { return columns.size(); }
};

/// Rows index (k-1)-simplices, columns k-simplices. The face that drops the
/// i-th vertex gets sign (-1)^i.
struct BoundaryMatrix {
    int k = 0;
    SparseIntMatrix matrix;
};

BoundaryMatrix boundary_matrix(const CliqueComplex& cx, int k);

/// Rank over Q via fraction-free elimination on arbitrary-precision integers
/// with Markowitz-style pivoting (sparsest column, then sparsest row).
std::size_t exact_rank(const SparseIntMatrix& m);

struct CycleRank {
    std::vector<std::uint64_t> per_dim;  // index k-1 holds rank Z_k, k = 1..K
    std::uint64_t total = 0;
};

CycleRank cycle_rank_breakdown(const EdgeSet& e, int d, int max_dim, const ComplexOptions& opts = {});
std::uint64_t cycle_rank(const EdgeSet& e, int d, int max_dim, const ComplexOptions& opts = {});

/// rank Z of the complete graph's clique complex: sum_{k=1..K} C(d-1, k+1).
/// This is the BH denominator for homological screening.
std::uint64_t complete_graph_cycle_rank(int d, int max_dim);

/// sum_{k=1..K} (d-k)(d-k-1)/2. Agrees with complete_graph_cycle_rank only when
/// K = 1 or d <= 4; kept for comparison.
std::uint64_t paper_clique_cycle_rank(int d, int max_dim);

/// rank(Z(E1) ∩ Z(E2)). A chain supported on both complexes only uses cliques
/// of E1 ∩ E2, so this is cycle_rank(E1 ∩ E2).
std::uint64_t intersection_cycle_rank(const EdgeSet& e1, const EdgeSet& e2, int d, int max_dim);

/// Incrementally maintained rank of Z over a growing edge set. Each inserted
/// edge adds the cliques it completes; their boundary columns are reduced
/// against a cached echelon basis per dimension.
class CycleRankTracker {
public:
    CycleRankTracker(int d, int max_dim);

    /// Inserts e and returns the rank increase. Throws ConfigError if e is present.
    std::uint64_t add_edge(Edge e);
    /// Simplices that inserting e would create (dimensions 1..K), without inserting.
    std::size_t new_simplex_count(Edge e) const;

    bool has_edge(Edge e) const;
    std::uint64_t rank() const { return rank_; }
    std::uint64_t rank(int k) const;
    std::size_t simplex_count(int k) const;
    int d() const { return d_; }
    int max_dim() const { return max_dim_; }

private:
    struct Column {
        std::vector<std::size_t> rows;
        std::vector<BigInt> vals;
    };

    void for_each_clique(Edge e, const std::function<void(const Simplex&)>& fn) const;
    bool reduce_and_insert(int k, Column col);

    int d_;
    int max_dim_;
    std::size_t words_;
    std::vector<std::uint64_t> adj_;
    SimplexKeyer keyer_;
    // index_[k]: k-simplex key -> row/column position (k >= 1); vertices index themselves.
    std::vector<std::unordered_map<std::uint64_t, std::size_t>> index_;
    std::vector<std::size_t> counts_;
    // basis_[k][pivot row] -> column; pivot row = largest row index in the column.
    std::vector<std::unordered_map<std::size_t, Column>> basis_;
    std::vector<std::uint64_t> rank_dim_;
    std::uint64_t rank_ = 0;
};

struct RankIncrementOptions {
    /// Edges creating more simplices than this fall back to two full computations.
    std::size_t incremental_limit = 64;
};

/// cycle_rank(E_base ∪ {e}) - cycle_rank(E_base). Throws ConfigError if e ∈ E_base.
std::uint64_t rank_increment(const EdgeSet& base, Edge e, int d, int max_dim,
                             const RankIncrementOptions& opts = {});

void write_complex_json(std::ostream& out, const CliqueComplex& cx);

}  // namespace khan
