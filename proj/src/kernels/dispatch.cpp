#include "mprad/kernels.hpp"

namespace mprad::kernels {

namespace {

struct Table {
    Isa isa;
    MinMax (*min_max)(std::span<const float>);
    void (*bin_levels)(std::span<const float>, float, float, int, std::span<std::uint16_t>);
    CoocMoments (*cooc_moments)(std::span<const double>, int);
    double (*squared_distance)(std::span<const double>, std::span<const double>);
};

constexpr Table kScalar{Isa::scalar, detail::min_max_scalar, detail::bin_levels_scalar,
                        detail::cooc_moments_scalar, detail::squared_distance_scalar};

#if defined(MPRAD_HAVE_AVX2)
constexpr Table kAvx2{Isa::avx2, detail::min_max_avx2, detail::bin_levels_avx2,
                      detail::cooc_moments_avx2, detail::squared_distance_avx2};
#endif

bool avx2_supported() {
#if defined(MPRAD_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Table& best_table() {
#if defined(MPRAD_HAVE_AVX2)
    if (avx2_supported()) return kAvx2;
#endif
    return kScalar;
}

// Selected once at startup; set_isa is test-only and must not race with work.
const Table* g_table = &best_table();

} // namespace

Isa active_isa() { return g_table->isa; }

Isa set_isa(Isa isa) {
#if defined(MPRAD_HAVE_AVX2)
    if (isa == Isa::avx2 && avx2_supported()) {
        g_table = &kAvx2;
        return Isa::avx2;
    }
#endif
    (void)isa;
    g_table = &kScalar;
    return Isa::scalar;
}

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::avx2: return "avx2";
        case Isa::scalar: break;
    }
    return "scalar";
}

MinMax min_max(std::span<const float> values) { return g_table->min_max(values); }

void bin_levels(std::span<const float> values, float lo, float hi, int levels,
                std::span<std::uint16_t> out) {
    g_table->bin_levels(values, lo, hi, levels, out);
}

CoocMoments cooc_moments(std::span<const double> p, int g) { return g_table->cooc_moments(p, g); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
    return g_table->squared_distance(a, b);
}

} // namespace mprad::kernels
