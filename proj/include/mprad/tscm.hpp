#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mprad/volume.hpp"

namespace mprad {

// The four in-plane co-occurrence directions, as (dx, dy) per axial slice.
enum class Angle { deg0, deg45, deg90, deg135 };

constexpr std::array<Angle, 4> kAllAngles{Angle::deg0, Angle::deg45, Angle::deg90, Angle::deg135};

const char* angle_suffix(Angle a);          // "0", "45", "90", "135"
Angle angle_from_degrees(int deg);
std::pair<int, int> angle_offset(Angle a, int d);

// G x G co-occurrence matrix for one (distance, angle), accumulated over all
// channels and all qualifying in-ROI voxel pairs, then symmetrized by adding
// the transpose and normalized.
class Tscm {
public:
    Tscm(int g, int d, Angle theta, std::vector<std::uint64_t> symmetric_counts,
         std::uint64_t raw_pair_increments);

    int g() const { return g_; }
    int d() const { return d_; }
    Angle theta() const { return theta_; }

    // Symmetrized integer counts (raw + transpose), row-major, 1-based levels
    // at [m-1][n-1].
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    // Probabilities; sums to 1.
    const std::vector<double>& normalized() const { return normalized_; }
    // Number of (pair, channel) increments before symmetrization.
    std::uint64_t raw_increments() const { return raw_increments_; }

private:
    int g_;
    int d_;
    Angle theta_;
    std::vector<std::uint64_t> counts_;
    std::vector<double> normalized_;
    std::uint64_t raw_increments_;
};

Tscm build_tscm(const QuantizedStack& q, const RoiMask& roi, int d, Angle theta, int threads = 1);

// The 22 co-occurrence texture features. Field order is the frozen export
// roster.
struct HaralickFeatureSet {
    double energy;
    double contrast;
    double correlation;
    double sum_of_squares_variance;
    double homogeneity1; // inverse difference
    double homogeneity2; // inverse difference moment
    double sum_average;
    double sum_variance;
    double sum_entropy;
    double entropy;
    double difference_variance;
    double difference_entropy;
    double imc1;
    double imc2;
    double max_correlation_coefficient;
    double autocorrelation;
    double dissimilarity;
    double cluster_shade;
    double cluster_prominence;
    double max_probability;
    double inverse_difference_normalized;
    double inverse_difference_moment_normalized;

    static const std::vector<std::string>& feature_names(); // frozen order
    static HaralickFeatureSet from_values(const std::vector<double>& v);
    std::vector<double> values() const;                     // same order
    double value(const std::string& name) const;
};

HaralickFeatureSet haralick_features(const Tscm& t);

// Per-angle feature sets plus their mean and range. The mean is the primary
// exported value.
struct DirectionalSummary {
    std::vector<Angle> angles;
    std::vector<HaralickFeatureSet> per_angle;
    HaralickFeatureSet mean;
    HaralickFeatureSet range;

    // "TSCM_<feature>_<mean|0|45|90|135|range>" in frozen order.
    std::vector<std::pair<std::string, double>> named() const;
};

DirectionalSummary directional_summary(const QuantizedStack& q, const RoiMask& roi, int d,
                                       std::span<const Angle> angles, int threads = 1);

// Sliding-window rendering of one feature. Values are defined at in-ROI
// voxels whose window holds at least 2 in-ROI voxels; everywhere else the
// sentinel (quiet NaN) is stored. Accepted names: the Haralick roster (bare
// or "TSCM_"-prefixed; directional mean over angles that have pairs),
// "TSPM_entropy" / "TSPM_uniformity" / "TSPM_mutual_information", and the
// "TSFOS_*" features computed from quantized levels.
struct FeatureMapVolume {
    GridDims dims;
    std::vector<float> values;
    int window_radius = 0;
    std::string feature_name;

    static float sentinel() { return std::numeric_limits<float>::quiet_NaN(); }
};

FeatureMapVolume feature_map(const QuantizedStack& q, const RoiMask& roi,
                             const std::string& feature_name, int window_radius, int d,
                             int threads = 1);

// Writes <prefix>.raw (float32 LE) and a <prefix>.json sidecar naming the
// feature and window.
void write_feature_map(const FeatureMapVolume& map, const std::filesystem::path& prefix);

} // namespace mprad
