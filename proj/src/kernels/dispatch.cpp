#include <cstdlib>
#include <string>
#include <string_view>

#include "khan/error.hpp"
#include "khan/kernels.hpp"

namespace khan::kernels {

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*max_abs_diff)(const double*, const double*, std::size_t);
};

constexpr Table scalar_table{scalar::dot, scalar::axpy, scalar::max_abs_diff};
#if KHAN_HAVE_AVX2
constexpr Table avx2_table{avx2::dot, avx2::axpy, avx2::max_abs_diff};
#endif

bool cpu_has_avx2() {
#if KHAN_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa initial_isa() {
    Isa best = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
    if (const char* env = std::getenv("KHAN_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") return Isa::Scalar;
        if (v == "avx2" && best == Isa::Avx2) return Isa::Avx2;
    }
    return best;
}

Isa g_isa = initial_isa();

const Table& table() {
#if KHAN_HAVE_AVX2
    if (g_isa == Isa::Avx2) return avx2_table;
#endif
    return scalar_table;
}

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw ConfigError("kernel operands differ in length");
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return g_isa; }

void set_active_isa(Isa isa) {
    if (!isa_available(isa)) throw ConfigError(std::string("SIMD variant unavailable: ") + isa_name(isa));
    g_isa = isa;
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
    return table().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size());
    table().axpy(alpha, x.data(), y.data(), x.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
    return table().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace khan::kernels
