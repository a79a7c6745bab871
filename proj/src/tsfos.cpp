#include "mprad/tsfos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mprad/errors.hpp"
#include "mprad/kernels.hpp"

namespace mprad {

const char* to_string(TshNormalization n) {
    return n == TshNormalization::per_channel ? "per-channel" : "pooled";
}

TshNormalization tsh_normalization_from_string(const std::string& s) {
    if (s == "per-channel") return TshNormalization::per_channel;
    if (s == "pooled") return TshNormalization::pooled;
    throw InputError("unknown normalization mode '" + s + "' (expected per-channel or pooled)");
}

TissueSignatureHistogram build_tsh(const VolumeStack& stack, const RoiMask& roi, int b,
                                   TshNormalization normalization) {
    if (b < 2) throw InputError("build_tsh: B must be >= 2, got " + std::to_string(b));
    if (!(roi.dims == stack.dims)) throw InputError("build_tsh: ROI dims do not match stack dims");

    std::vector<std::size_t> roi_idx;
    for (std::size_t i = 0; i < roi.inside.size(); ++i)
        if (roi.inside[i]) roi_idx.push_back(i);
    if (roi_idx.empty()) throw InputError("build_tsh: empty ROI");

    TissueSignatureHistogram tsh;
    tsh.b = b;
    tsh.bins.assign(static_cast<std::size_t>(b), 0);

    std::vector<float> gathered(roi_idx.size());
    std::vector<std::uint16_t> binned(roi_idx.size());

    if (normalization == TshNormalization::per_channel) {
        // Each channel spans [0,1] after its own min-max scaling, so the
        // shared binning axis is the unit interval.
        tsh.range = {0.0, 1.0};
        for (const auto& ch : stack.channels) {
            for (std::size_t i = 0; i < roi_idx.size(); ++i) gathered[i] = ch.voxels[roi_idx[i]];
            const auto mm = kernels::min_max(gathered);
            // bin = level - 1 with the shared 1-based binning kernel
            kernels::bin_levels(gathered, mm.lo, mm.hi, b, binned);
            for (auto lv : binned) ++tsh.bins[lv - 1];
        }
    } else {
        float lo = std::numeric_limits<float>::max();
        float hi = std::numeric_limits<float>::lowest();
        for (const auto& ch : stack.channels) {
            for (std::size_t i = 0; i < roi_idx.size(); ++i) gathered[i] = ch.voxels[roi_idx[i]];
            const auto mm = kernels::min_max(gathered);
            lo = std::min(lo, mm.lo);
            hi = std::max(hi, mm.hi);
        }
        tsh.range = {lo, hi};
        for (const auto& ch : stack.channels) {
            for (std::size_t i = 0; i < roi_idx.size(); ++i) gathered[i] = ch.voxels[roi_idx[i]];
            kernels::bin_levels(gathered, lo, hi, b, binned);
            for (auto lv : binned) ++tsh.bins[lv - 1];
        }
    }
    tsh.total = static_cast<std::uint64_t>(roi_idx.size()) * stack.channels.size();
    return tsh;
}

TsfosFeatures tsfos_features(const TissueSignatureHistogram& tsh) {
    if (tsh.total == 0) throw InputError("tsfos_features: empty histogram");
    const double total = static_cast<double>(tsh.total);
    const double b = static_cast<double>(tsh.b);

    TsfosFeatures f{};
    f.min_bin_fraction = 1.0;
    double hacc = 0.0, uacc = 0.0, mean = 0.0;
    for (int i = 0; i < tsh.b; ++i) {
        if (tsh.bins[i] == 0) continue;
        const double p = static_cast<double>(tsh.bins[i]) / total;
        hacc += p * std::log2(p);
        uacc += p * p;
        mean += p * ((i + 0.5) / b);
        f.min_bin_fraction = std::min(f.min_bin_fraction, p);
        f.max_bin_fraction = std::max(f.max_bin_fraction, p);
    }
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (int i = 0; i < tsh.b; ++i) {
        if (tsh.bins[i] == 0) continue;
        const double p = static_cast<double>(tsh.bins[i]) / total;
        const double d = (i + 0.5) / b - mean;
        m2 += p * d * d;
        m3 += p * d * d * d;
        m4 += p * d * d * d * d;
    }
    f.entropy = 0.0 - hacc;
    f.uniformity = uacc;
    f.energy = uacc;
    f.mean = mean;
    f.variance = m2;
    f.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    f.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
    return f;
}

std::vector<std::pair<std::string, double>> TsfosFeatures::named() const {
    return {
        {"TSFOS_entropy", entropy},
        {"TSFOS_uniformity", uniformity},
        {"TSFOS_energy", energy},
        {"TSFOS_mean", mean},
        {"TSFOS_variance", variance},
        {"TSFOS_skewness", skewness},
        {"TSFOS_kurtosis", kurtosis},
        {"TSFOS_min_bin_fraction", min_bin_fraction},
        {"TSFOS_max_bin_fraction", max_bin_fraction},
    };
}

} // namespace mprad
