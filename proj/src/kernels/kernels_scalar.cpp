#include "mprad/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace mprad::kernels::detail {

MinMax min_max_scalar(std::span<const float> values) {
    float lo = values[0];
    float hi = values[0];
    for (float v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

void bin_levels_scalar(std::span<const float> values, float lo, float hi, int levels,
                       std::span<std::uint16_t> out) {
    if (!(hi > lo)) {
        std::fill(out.begin(), out.end(), std::uint16_t{1});
        return;
    }
    // One division up front; per element the op sequence is
    // sub -> mul -> floor -> add -> clamp, all in double. The AVX2 variant
    // replays the identical sequence per lane.
    const double scale = static_cast<double>(levels) / (static_cast<double>(hi) - static_cast<double>(lo));
    const double lod = static_cast<double>(lo);
    const double top = static_cast<double>(levels);
    for (std::size_t i = 0; i < values.size(); ++i) {
        double k = std::floor((static_cast<double>(values[i]) - lod) * scale) + 1.0;
        k = std::min(std::max(k, 1.0), top);
        out[i] = static_cast<std::uint16_t>(k);
    }
}

CoocMoments cooc_moments_scalar(std::span<const double> p, int g) {
    CoocMoments s{0, 0, 0, 0, 0, 0, 0, 0, 0};
    const double gd = static_cast<double>(g);
    for (int m = 0; m < g; ++m) {
        const double* row = p.data() + static_cast<std::size_t>(m) * g;
        const double md = static_cast<double>(m + 1);
        for (int n = 0; n < g; ++n) {
            const double v = row[n];
            const double nd = static_cast<double>(n + 1);
            const double diff = md - nd;
            const double ad = std::abs(diff);
            s.energy += v * v;
            s.contrast += diff * diff * v;
            s.dissimilarity += ad * v;
            s.homogeneity1 += v / (1.0 + ad);
            s.homogeneity2 += v / (1.0 + diff * diff);
            s.idn += v / (1.0 + ad / gd);
            s.idmn += v / (1.0 + (diff * diff) / (gd * gd));
            s.autocorrelation += md * nd * v;
            s.max_probability = std::max(s.max_probability, v);
        }
    }
    return s;
}

double squared_distance_scalar(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace mprad::kernels::detail
