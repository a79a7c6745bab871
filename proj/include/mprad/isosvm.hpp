#pragma once

#include <span>
#include <string>
#include <vector>

#include "mprad/feature_vector.hpp"

namespace mprad {

// Rows-by-features matrix of standardized values plus the transform record.
struct Standardization {
    std::vector<std::string> feature_names; // kept features, input order
    std::vector<double> means;              // per kept feature
    std::vector<double> stddevs;            // population (n denominator)
    std::vector<std::string> warnings;      // dropped zero-variance features
};

struct StandardizedData {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::vector<double> values; // row-major
    Standardization params;

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_features, n_features};
    }
};

// Mean 0, population stddev 1 per feature; zero-variance features are
// dropped and noted in params.warnings.
StandardizedData standardize(std::span<const StudyFeatureVector> rows);

struct IsomapModel {
    int k_requested = 0;
    int k_used = 0; // incremented until the neighbor graph is connected
    int embedding_dim_requested = 0;
    int embedding_dim = 0; // reduced if positive eigenvalues run out
    std::size_t n_points = 0;
    std::vector<double> geodesic;  // n x n, symmetric, zero diagonal
    std::vector<double> embedding; // n x embedding_dim, row-major
    std::vector<std::string> adjustments;

    std::span<const double> point(std::size_t i) const {
        return {embedding.data() + i * static_cast<std::size_t>(embedding_dim),
                static_cast<std::size_t>(embedding_dim)};
    }
    double geodesic_at(std::size_t i, std::size_t j) const { return geodesic[i * n_points + j]; }
};

// Symmetric k-NN graph (edge if either endpoint lists the other) weighted by
// Euclidean distance, all-pairs shortest paths, then classical MDS on the
// double-centered squared geodesic matrix. Deterministic: neighbor ties break
// by row index and eigenvector signs are canonical.
IsomapModel fit_isomap(const StandardizedData& data, int k, int embedding_dim);

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double c = 1.0;
    std::vector<double> alpha; // dual variables
    double dual_objective = 0.0;
    double primal_objective = 0.0;
    double duality_gap = 0.0;
    std::size_t iterations = 0;
    bool converged = false;

    double decision(std::span<const double> x) const;
};

// Soft-margin linear SVM (1/2 ||w||^2 + C sum hinge) solved by SMO on the
// dual with maximal-violating-pair selection; ties break by index, so the
// solve is deterministic. labels must be -1/+1 with both classes present.
LinearSvmModel train_linear_svm(std::span<const double> points, std::size_t n, std::size_t dim,
                                std::span<const int> labels, double c);

struct LoocvPrediction {
    std::string study_id;
    std::string true_label;
    std::string predicted_label;
    double score; // decision value of the held-out study
};

struct LoocvResult {
    std::vector<std::string> classes; // sorted; classes[1] is the positive class
    std::vector<LoocvPrediction> predictions;
    Standardization standardization;
    IsomapModel isomap;

    std::vector<double> scores() const;
    std::vector<int> true_labels01() const;
    std::vector<int> predicted_labels01() const;
};

// Isomap is fit once on all rows (label-blind); each fold then trains the
// SVM on the remaining embedded points and scores the held-out study.
LoocvResult loocv_isosvm(std::span<const StudyFeatureVector> rows, int k, int embedding_dim,
                         double c, int threads = 1);

} // namespace mprad
