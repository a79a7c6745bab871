#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mprad/volume.hpp"

namespace mprad {

enum class TshNormalization {
    per_channel, // min-max scale each channel over in-ROI voxels before pooling
    pooled       // pool raw intensities directly
};

const char* to_string(TshNormalization n);
TshNormalization tsh_normalization_from_string(const std::string& s);

// Pooled intensity histogram across all channels' in-ROI voxels.
struct TissueSignatureHistogram {
    std::vector<std::uint64_t> bins;
    int b = 0;
    std::pair<double, double> range; // pooled (min, max) on the binning axis
    std::uint64_t total = 0;         // = channel count * in-ROI voxel count
};

TissueSignatureHistogram build_tsh(const VolumeStack& stack, const RoiMask& roi, int b,
                                   TshNormalization normalization);

// First-order statistics of the histogram. Entropy is in bits; energy equals
// uniformity and is reported separately for column stability; moments use bin
// centers (i + 0.5)/B on the normalized axis; kurtosis is the plain fourth
// standardized moment (no -3); skewness and kurtosis are 0 for a degenerate
// single-bin histogram.
struct TsfosFeatures {
    double entropy;
    double uniformity;
    double energy;
    double mean;
    double variance;
    double skewness;
    double kurtosis;
    double min_bin_fraction; // smallest p over occupied bins
    double max_bin_fraction;

    std::vector<std::pair<std::string, double>> named() const; // "TSFOS_"-prefixed
};

TsfosFeatures tsfos_features(const TissueSignatureHistogram& tsh);

} // namespace mprad
