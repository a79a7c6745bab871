#pragma once

// Independent oracle implementations used by the test suites. Everything in
// here deliberately takes its own route (naive enumeration, dense tables,
// Eigen/Boost special functions, projected-gradient QP) so agreement with the
// library is a genuine cross-check.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mprad/tscm.hpp"
#include "mprad/volume.hpp"

namespace oracle {

// All-pairs brute-force co-occurrence counts: iterate every ordered pair of
// in-ROI voxels, keep those offset by exactly (dx, dy, 0), accumulate over
// all channels, then add the transpose. Matches Tscm::counts().
std::vector<std::uint64_t> brute_force_tscm(const mprad::QuantizedStack& q,
                                            const mprad::RoiMask& roi, int d, mprad::Angle theta);

// Naive double-loop evaluation of all 22 co-occurrence features from a
// normalized g x g matrix. MCC uses Eigen's general (non-symmetric)
// eigensolver on Haralick's Q matrix directly.
mprad::HaralickFeatureSet naive_haralick(const std::vector<double>& p, int g);

// Dense two-channel probability table; returns H(X1) + H(X2) - H(X1,X2) in
// bits. pairs holds (level1, level2) per voxel, 1-based.
double mi_from_probability_table(const std::vector<std::pair<int, int>>& pairs, int g);

// Entropy of a dense count table (any arity flattened), in bits.
double entropy_from_counts(const std::vector<std::uint64_t>& counts);

// Welch t-test p-value recomputed from scratch with Boost.Math's Student-t
// distribution.
double welch_p_boost(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta via Boost.Math.
double ibeta_boost(double a, double b, double x);

// Mann-Whitney AUC (midranks) computed directly from score/label lists.
double mann_whitney_auc(std::span<const double> scores, std::span<const int> labels);

// Maximal dual objective of the soft-margin SVM dual
//   max sum(alpha) - 1/2 ||sum alpha_i y_i x_i||^2,  0 <= alpha <= C,
//   sum alpha_i y_i = 0
// by FISTA projected gradient plus an Eigen KKT polish on the detected
// active set.
double svm_dual_optimum(std::span<const double> points, std::size_t n, std::size_t dim,
                        std::span<const int> labels, double c);

// Eigenvalues of a symmetric matrix via Eigen, descending.
std::vector<double> symmetric_eigenvalues_eigen(const std::vector<double>& a, std::size_t n);

// Spearman rank correlation with midranks for ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// --- randomized-input helpers -------------------------------------------------

// Random quantized stack: levels uniform in [1, g] at every voxel, full ROI.
mprad::QuantizedStack random_quantized_stack(std::mt19937_64& rng, const mprad::GridDims& dims,
                                             int n_channels, int g);

// Random ROI with at least min_inside voxels inside.
mprad::RoiMask random_mask(std::mt19937_64& rng, const mprad::GridDims& dims,
                           double p_inside = 0.7, std::size_t min_inside = 4);

mprad::RoiMask full_mask(const mprad::GridDims& dims);

// Random normalized g x g matrix with strictly positive cells.
std::vector<double> random_normalized_matrix(std::mt19937_64& rng, int g);

} // namespace oracle
