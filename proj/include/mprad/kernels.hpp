#pragma once

#include <cstdint>
#include <span>

// Data-parallel inner loops used by the feature extractors. Every kernel has
// a scalar reference implementation and, on x86-64, an AVX2 variant selected
// once at startup. The two variants are equivalence-tested against each
// other; bin_levels and min_max are bit-exact across variants because each
// element is transformed by the identical sequence of IEEE operations, while
// the reductions may differ in summation order and are compared with a
// relative tolerance.
namespace mprad::kernels {

enum class Isa { scalar, avx2 };

// Instruction set currently backing the dispatched entry points.
Isa active_isa();

// Force a specific variant (used by the equivalence tests). Requesting an
// unsupported ISA falls back to scalar and returns the ISA actually set.
Isa set_isa(Isa isa);

const char* isa_name(Isa isa);

struct MinMax {
    float lo;
    float hi;
};

// Min and max of a non-empty float array.
MinMax min_max(std::span<const float> values);

// Affine binning shared by quantization and histogramming:
//   level(v) = clamp(floor((v - lo) * (levels / (hi - lo))) + 1, 1, levels)
// with the degenerate hi == lo range mapping everything to level 1.
// Output levels are 1-based.
void bin_levels(std::span<const float> values, float lo, float hi, int levels,
                std::span<std::uint16_t> out);

// One-pass weighted reductions over a row-major g x g co-occurrence
// probability matrix. These are the log-free Haralick ingredients; the
// entropy-style sums stay scalar at the call site.
struct CoocMoments {
    double energy;            // sum p^2
    double contrast;          // sum (m-n)^2 p
    double dissimilarity;     // sum |m-n| p
    double homogeneity1;      // sum p / (1 + |m-n|)
    double homogeneity2;      // sum p / (1 + (m-n)^2)
    double idn;               // sum p / (1 + |m-n|/g)
    double idmn;              // sum p / (1 + (m-n)^2/g^2)
    double autocorrelation;   // sum m n p   (1-based indices)
    double max_probability;   // max p
};
CoocMoments cooc_moments(std::span<const double> p, int g);

// Squared Euclidean distance between two equal-length vectors.
double squared_distance(std::span<const double> a, std::span<const double> b);

// Per-ISA entry points, exposed for the equivalence tests.
namespace detail {
MinMax min_max_scalar(std::span<const float> values);
void bin_levels_scalar(std::span<const float> values, float lo, float hi, int levels,
                       std::span<std::uint16_t> out);
CoocMoments cooc_moments_scalar(std::span<const double> p, int g);
double squared_distance_scalar(std::span<const double> a, std::span<const double> b);

#if defined(MPRAD_HAVE_AVX2)
MinMax min_max_avx2(std::span<const float> values);
void bin_levels_avx2(std::span<const float> values, float lo, float hi, int levels,
                     std::span<std::uint16_t> out);
CoocMoments cooc_moments_avx2(std::span<const double> p, int g);
double squared_distance_avx2(std::span<const double> a, std::span<const double> b);
#endif
} // namespace detail

} // namespace mprad::kernels
