#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mprad/feature_vector.hpp"
#include "mprad/phantom.hpp"
#include "mprad/tscm.hpp"
#include "mprad/tsfos.hpp"
#include "mprad/volume.hpp"

namespace mprad {

// Everything that shapes the extracted features and the classifier. Thread
// count is deliberately not part of the config: outputs must be identical
// across thread counts, and the config is echoed into every output header.
struct PipelineConfig {
    int g = 64;              // quantization levels
    int b = 64;              // TSFOS bins
    int d = 1;               // co-occurrence offset distance (voxels)
    std::vector<Angle> angles{Angle::deg0, Angle::deg45, Angle::deg90, Angle::deg135};
    int max_subset_size = 0; // 0 = all channels
    int isomap_k = 5;
    int isomap_dim = 2;
    double svm_c = 1.0;
    std::uint64_t seed = 0;
    TshNormalization normalization = TshNormalization::per_channel;

    std::string to_json() const; // lossless round trip
    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // grading: G=B=64; progression: G=B=16
    static PipelineConfig preset(const std::string& name);
};

// Full mpRadiomic feature vector for one ROI: TSPM subset features, TSFOS
// features, TSCM directional summaries, in that frozen column order.
StudyFeatureVector extract_features(const VolumeStack& stack, const RoiMask& roi,
                                    const PipelineConfig& config, int threads = 1);

// Feature file: one '#'-prefixed JSON header line (config provenance), a CSV
// header, and one data row.
void write_feature_csv(const StudyFeatureVector& row, const PipelineConfig& config,
                       const std::vector<std::string>& channels,
                       const std::filesystem::path& path);
StudyFeatureVector read_feature_csv(const std::filesystem::path& path);

// --- CLI-level commands ------------------------------------------------------

PhantomOutput cmd_phantom(const PhantomSpec& spec, const std::filesystem::path& out_dir);

StudyFeatureVector cmd_extract(const PipelineConfig& config,
                               const std::filesystem::path& manifest_path,
                               const std::filesystem::path& mask_path,
                               const std::filesystem::path& out_file, const std::string& study_id,
                               const std::optional<std::string>& label,
                               std::optional<int> time_point, int threads = 1);

// LOOCV IsoSVM over every feature file (*.csv) in cohort_dir; writes a JSON
// report with per-study scores, ROC points and summary metrics.
void cmd_classify(const PipelineConfig& config, const std::filesystem::path& cohort_dir,
                  const std::filesystem::path& out_report, int threads = 1);

// Two-group per-feature comparison CSV; groups are the two directories.
void cmd_compare(const PipelineConfig& config, const std::filesystem::path& group_a_dir,
                 const std::filesystem::path& group_b_dir, const std::filesystem::path& out_csv);

// Time-point deltas (t2 - t1 per study), then a two-group comparison of the
// deltas plus per-feature ROC curves. labels_csv maps study_id to one of two
// outcome labels. Writes comparison.csv and roc_curves.json into out_dir.
void cmd_progression(const PipelineConfig& config, const std::filesystem::path& t1_dir,
                     const std::filesystem::path& t2_dir, const std::filesystem::path& labels_csv,
                     const std::filesystem::path& out_dir);

// Sliding-window feature map rendered from a stack+mask; writes
// <out_prefix>.raw and <out_prefix>.json.
void cmd_feature_map(const PipelineConfig& config, const std::filesystem::path& manifest_path,
                     const std::filesystem::path& mask_path, const std::string& feature_name,
                     int window_radius, const std::filesystem::path& out_prefix, int threads = 1);

// Feature files found in a directory, sorted by filename for determinism.
std::vector<StudyFeatureVector> read_cohort_dir(const std::filesystem::path& dir);

} // namespace mprad
