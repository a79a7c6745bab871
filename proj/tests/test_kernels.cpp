#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mprad/kernels.hpp"

using namespace mprad::kernels;

namespace {

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n, float lo, float hi) {
    std::uniform_real_distribution<float> u(lo, hi);
    std::vector<float> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

} // namespace

TEST_CASE("dispatch reports a valid ISA and can be forced to scalar") {
    const Isa best = active_isa();
    CHECK((best == Isa::scalar || best == Isa::avx2));
    CHECK(set_isa(Isa::scalar) == Isa::scalar);
    CHECK(active_isa() == Isa::scalar);
    set_isa(best);
    CHECK(active_isa() == best);
}

TEST_CASE("min_max matches scalar reference bit-exactly") {
    std::mt19937_64 rng(0xA11CE);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 1000;
        const auto v = random_floats(rng, n, -1e6f, 1e6f);
        const auto ref = detail::min_max_scalar(v);
        const auto got = min_max(v);
        CHECK(got.lo == ref.lo);
        CHECK(got.hi == ref.hi);
#if defined(MPRAD_HAVE_AVX2)
        if (active_isa() == Isa::avx2) {
            const auto simd = detail::min_max_avx2(v);
            CHECK(simd.lo == ref.lo);
            CHECK(simd.hi == ref.hi);
        }
#endif
    }
}

TEST_CASE("bin_levels matches scalar reference bit-exactly") {
    std::mt19937_64 rng(0xB0B);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 777;
        auto v = random_floats(rng, n, -50.f, 150.f);
        const float lo = -10.f, hi = 120.f;
        const int levels = 2 + static_cast<int>(rng() % 200);
        std::vector<std::uint16_t> ref(n), got(n);
        detail::bin_levels_scalar(v, lo, hi, levels, ref);
        bin_levels(v, lo, hi, levels, got);
        CHECK(ref == got);
#if defined(MPRAD_HAVE_AVX2)
        if (active_isa() == Isa::avx2) {
            std::vector<std::uint16_t> simd(n);
            detail::bin_levels_avx2(v, lo, hi, levels, simd);
            CHECK(ref == simd);
        }
#endif
    }
}

TEST_CASE("bin_levels handles the degenerate and boundary cases") {
    const std::vector<float> v{0.f, 1.f, 2.f, 3.f};
    std::vector<std::uint16_t> out(4);

    bin_levels(v, 2.f, 2.f, 64, out); // hi == lo
    for (auto x : out) CHECK(x == 1);

    bin_levels(v, 0.f, 3.f, 4, out);
    CHECK(out == std::vector<std::uint16_t>{1, 2, 3, 4});

    // value exactly at max clamps to the top level
    const std::vector<float> at_max{3.f};
    std::vector<std::uint16_t> one(1);
    bin_levels(at_max, 0.f, 3.f, 7, one);
    CHECK(one[0] == 7);

    // out-of-range values clamp to [1, levels]
    const std::vector<float> wild{-100.f, 100.f};
    std::vector<std::uint16_t> two(2);
    bin_levels(wild, 0.f, 3.f, 5, two);
    CHECK(two[0] == 1);
    CHECK(two[1] == 5);
}

TEST_CASE("cooc_moments AVX2 agrees with scalar within 1e-12 relative") {
    std::mt19937_64 rng(0xC0C0A);
    for (int g : {1, 2, 3, 7, 8, 16, 64}) {
        std::vector<double> p(static_cast<std::size_t>(g) * g);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double tot = 0.0;
        for (auto& x : p) {
            x = u(rng);
            tot += x;
        }
        for (auto& x : p) x /= tot;
        const auto ref = detail::cooc_moments_scalar(p, g);
        const auto got = cooc_moments(p, g);
        const auto close = [](double a, double b) {
            return std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1.0});
        };
        CHECK(close(ref.energy, got.energy));
        CHECK(close(ref.contrast, got.contrast));
        CHECK(close(ref.dissimilarity, got.dissimilarity));
        CHECK(close(ref.homogeneity1, got.homogeneity1));
        CHECK(close(ref.homogeneity2, got.homogeneity2));
        CHECK(close(ref.idn, got.idn));
        CHECK(close(ref.idmn, got.idmn));
        CHECK(close(ref.autocorrelation, got.autocorrelation));
        CHECK(ref.max_probability == got.max_probability);
    }
}

TEST_CASE("squared_distance AVX2 agrees with scalar within 1e-12 relative") {
    std::mt19937_64 rng(0xD15);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (std::size_t n : {1u, 2u, 4u, 5u, 31u, 128u, 1000u}) {
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
        }
        const double ref = detail::squared_distance_scalar(a, b);
        const double got = squared_distance(a, b);
        CHECK(std::abs(ref - got) <= 1e-12 * std::max(std::abs(ref), 1.0));
    }
}
