#include "mprad/kernels.hpp"

#if defined(MPRAD_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace mprad::kernels::detail {

namespace {

inline double hsum_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

} // namespace

MinMax min_max_avx2(std::span<const float> values) {
    const std::size_t n = values.size();
    const float* x = values.data();
    std::size_t i = 0;
    float lo = x[0];
    float hi = x[0];
    if (n >= 8) {
        __m256 vlo = _mm256_loadu_ps(x);
        __m256 vhi = vlo;
        for (i = 8; i + 8 <= n; i += 8) {
            const __m256 v = _mm256_loadu_ps(x + i);
            vlo = _mm256_min_ps(vlo, v);
            vhi = _mm256_max_ps(vhi, v);
        }
        __m128 l = _mm_min_ps(_mm256_castps256_ps128(vlo), _mm256_extractf128_ps(vlo, 1));
        l = _mm_min_ps(l, _mm_shuffle_ps(l, l, _MM_SHUFFLE(0, 0, 3, 2)));
        l = _mm_min_ss(l, _mm_shuffle_ps(l, l, _MM_SHUFFLE(0, 0, 0, 1)));
        lo = _mm_cvtss_f32(l);
        __m128 h = _mm_max_ps(_mm256_castps256_ps128(vhi), _mm256_extractf128_ps(vhi, 1));
        h = _mm_max_ps(h, _mm_shuffle_ps(h, h, _MM_SHUFFLE(0, 0, 3, 2)));
        h = _mm_max_ss(h, _mm_shuffle_ps(h, h, _MM_SHUFFLE(0, 0, 0, 1)));
        hi = _mm_cvtss_f32(h);
    }
    for (; i < n; ++i) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
    }
    return {lo, hi};
}

void bin_levels_avx2(std::span<const float> values, float lo, float hi, int levels,
                     std::span<std::uint16_t> out) {
    if (!(hi > lo)) {
        std::fill(out.begin(), out.end(), std::uint16_t{1});
        return;
    }
    const double scale = static_cast<double>(levels) / (static_cast<double>(hi) - static_cast<double>(lo));
    const double lod = static_cast<double>(lo);
    const double top = static_cast<double>(levels);
    const __m256d vscale = _mm256_set1_pd(scale);
    const __m256d vlo = _mm256_set1_pd(lod);
    const __m256d vone = _mm256_set1_pd(1.0);
    const __m256d vtop = _mm256_set1_pd(top);
    const std::size_t n = values.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(values.data() + i));
        __m256d k = _mm256_floor_pd(_mm256_mul_pd(_mm256_sub_pd(v, vlo), vscale));
        k = _mm256_add_pd(k, vone);
        k = _mm256_max_pd(k, vone);
        k = _mm256_min_pd(k, vtop);
        const __m128i ki = _mm256_cvttpd_epi32(k);
        alignas(16) std::int32_t tmp[4];
        _mm_store_si128(reinterpret_cast<__m128i*>(tmp), ki);
        out[i + 0] = static_cast<std::uint16_t>(tmp[0]);
        out[i + 1] = static_cast<std::uint16_t>(tmp[1]);
        out[i + 2] = static_cast<std::uint16_t>(tmp[2]);
        out[i + 3] = static_cast<std::uint16_t>(tmp[3]);
    }
    for (; i < n; ++i) {
        double k = std::floor((static_cast<double>(values[i]) - lod) * scale) + 1.0;
        k = std::min(std::max(k, 1.0), top);
        out[i] = static_cast<std::uint16_t>(k);
    }
}

CoocMoments cooc_moments_avx2(std::span<const double> p, int g) {
    const double gd = static_cast<double>(g);
    const __m256d vgd = _mm256_set1_pd(gd);
    const __m256d vg2 = _mm256_set1_pd(gd * gd);
    const __m256d vone = _mm256_set1_pd(1.0);
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d energy = _mm256_setzero_pd();
    __m256d contrast = _mm256_setzero_pd();
    __m256d dissim = _mm256_setzero_pd();
    __m256d hom1 = _mm256_setzero_pd();
    __m256d hom2 = _mm256_setzero_pd();
    __m256d idn = _mm256_setzero_pd();
    __m256d idmn = _mm256_setzero_pd();
    __m256d autoc = _mm256_setzero_pd();
    __m256d maxp = _mm256_setzero_pd();
    CoocMoments tail{0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (int m = 0; m < g; ++m) {
        const double* row = p.data() + static_cast<std::size_t>(m) * g;
        const double md = static_cast<double>(m + 1);
        const __m256d vmd = _mm256_set1_pd(md);
        int n = 0;
        __m256d vnd = _mm256_set_pd(4.0, 3.0, 2.0, 1.0);
        const __m256d vstep = _mm256_set1_pd(4.0);
        for (; n + 4 <= g; n += 4) {
            const __m256d v = _mm256_loadu_pd(row + n);
            const __m256d diff = _mm256_sub_pd(vmd, vnd);
            const __m256d ad = _mm256_andnot_pd(sign_mask, diff);
            const __m256d d2 = _mm256_mul_pd(diff, diff);
            energy = _mm256_add_pd(energy, _mm256_mul_pd(v, v));
            contrast = _mm256_add_pd(contrast, _mm256_mul_pd(d2, v));
            dissim = _mm256_add_pd(dissim, _mm256_mul_pd(ad, v));
            hom1 = _mm256_add_pd(hom1, _mm256_div_pd(v, _mm256_add_pd(vone, ad)));
            hom2 = _mm256_add_pd(hom2, _mm256_div_pd(v, _mm256_add_pd(vone, d2)));
            idn = _mm256_add_pd(idn, _mm256_div_pd(v, _mm256_add_pd(vone, _mm256_div_pd(ad, vgd))));
            idmn = _mm256_add_pd(idmn, _mm256_div_pd(v, _mm256_add_pd(vone, _mm256_div_pd(d2, vg2))));
            autoc = _mm256_add_pd(autoc, _mm256_mul_pd(_mm256_mul_pd(vmd, vnd), v));
            maxp = _mm256_max_pd(maxp, v);
            vnd = _mm256_add_pd(vnd, vstep);
        }
        for (; n < g; ++n) {
            const double v = row[n];
            const double nd = static_cast<double>(n + 1);
            const double diff = md - nd;
            const double ad = std::abs(diff);
            tail.energy += v * v;
            tail.contrast += diff * diff * v;
            tail.dissimilarity += ad * v;
            tail.homogeneity1 += v / (1.0 + ad);
            tail.homogeneity2 += v / (1.0 + diff * diff);
            tail.idn += v / (1.0 + ad / gd);
            tail.idmn += v / (1.0 + (diff * diff) / (gd * gd));
            tail.autocorrelation += md * nd * v;
            tail.max_probability = std::max(tail.max_probability, v);
        }
    }
    CoocMoments s;
    s.energy = hsum_pd(energy) + tail.energy;
    s.contrast = hsum_pd(contrast) + tail.contrast;
    s.dissimilarity = hsum_pd(dissim) + tail.dissimilarity;
    s.homogeneity1 = hsum_pd(hom1) + tail.homogeneity1;
    s.homogeneity2 = hsum_pd(hom2) + tail.homogeneity2;
    s.idn = hsum_pd(idn) + tail.idn;
    s.idmn = hsum_pd(idmn) + tail.idmn;
    s.autocorrelation = hsum_pd(autoc) + tail.autocorrelation;
    s.max_probability = std::max(hmax_pd(maxp), tail.max_probability);
    return s;
}

double squared_distance_avx2(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = hsum_pd(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace mprad::kernels::detail

#endif // MPRAD_HAVE_AVX2
