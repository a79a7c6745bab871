#pragma once

#include <span>
#include <string>
#include <vector>

#include "mprad/feature_vector.hpp"

namespace mprad {

struct Summary {
    double mean;
    double sem; // sample stddev (n-1 denominator) / sqrt(n)
};

Summary summarize(std::span<const double> values);

struct TTestResult {
    double t;
    double p;  // two-sided, in (0, 1]
    double df; // Welch-Satterthwaite degrees of freedom
};

// Welch unequal-variance t-test. Two identical constant groups give t=0,
// p=1; distinct constant groups give p = DBL_MIN to keep p in (0, 1].
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction with
// the standard symmetry switch; absolute error below 1e-10 over the tested
// domain. Exposed for the statistics oracle tests.
double regularized_incomplete_beta(double a, double b, double x);

// P(T > t) for Student's t with df degrees of freedom (upper tail).
double student_t_sf(double t, double df);

struct RocCurve {
    std::vector<double> fpr;        // non-decreasing, starts 0 ends 1
    std::vector<double> tpr;        // non-decreasing, starts 0 ends 1
    std::vector<double> thresholds; // +inf at (0,0), then unique scores descending
    double auc;
};

// ROC by sweeping unique score thresholds descending; labels nonzero =
// positive. The trapezoid AUC is verified internally, in integer arithmetic,
// against the Mann-Whitney statistic with half credit for ties.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

struct ConfusionMetrics {
    double sensitivity;
    double specificity;
    double accuracy;
};

ConfusionMetrics confusion_metrics(std::span<const int> predictions, std::span<const int> labels);

struct FeatureComparison {
    std::string feature;
    double mean_a, sem_a;
    double mean_b, sem_b;
    double t, p;
    double auc;              // oriented so auc >= 0.5
    std::string orientation; // "B>A" or "A>B"
};

struct GroupComparison {
    std::string group_a_label;
    std::string group_b_label;
    std::vector<FeatureComparison> per_feature; // feature order of the inputs
};

// Per-feature two-group comparison. Every study must share one feature-name
// list; group A = rows whose label equals group_a_label, group B likewise.
GroupComparison group_compare(std::span<const StudyFeatureVector> cohort,
                              const std::string& group_a_label, const std::string& group_b_label);

// CSV with frozen column order:
// feature,mean_a,sem_a,mean_b,sem_b,t,p,auc,orientation
std::string group_comparison_csv(const GroupComparison& cmp);

} // namespace mprad
