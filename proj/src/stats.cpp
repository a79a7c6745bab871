#include "mprad/stats.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "mprad/errors.hpp"

namespace mprad {

Summary summarize(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) throw InputError("summarize: need at least 2 values");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return {mean, sd / std::sqrt(static_cast<double>(n))};
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz). Standard
// even/odd term recurrence; converges fast for x < (a+1)/(a+b+2).
double beta_cont_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw ComputeError("incomplete beta continued fraction did not converge");
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !(x <= 1.0))
        throw InputError("regularized_incomplete_beta: domain error");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_fraction(a, b, x) / a;
    return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
    if (!(df > 0.0)) throw InputError("student_t_sf: df must be positive");
    if (t < 0.0) return 1.0 - student_t_sf(-t, df);
    const double x = df / (df + t * t);
    return 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InputError("welch_t_test: each group needs n >= 2");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / na;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / nb;
    double va = 0.0, vb = 0.0;
    for (double v : a) va += (v - ma) * (v - ma);
    for (double v : b) vb += (v - mb) * (v - mb);
    va /= na - 1.0;
    vb /= nb - 1.0;

    const double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        if (ma == mb) return {0.0, 1.0, na + nb - 2.0};
        // distinct constants: separation is certain, keep p in (0, 1]
        return {ma > mb ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity(),
                DBL_MIN, na + nb - 2.0};
    }
    const double t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 /
                      ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    double p = 2.0 * student_t_sf(std::abs(t), df);
    p = std::min(1.0, std::max(DBL_MIN, p));
    return {t, p, df};
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InputError("roc_auc: scores/labels size mismatch");
    const std::size_t n = scores.size();
    std::int64_t n_pos = 0;
    for (auto l : labels) n_pos += (l != 0);
    const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw InputError("roc_auc: both classes must be present");

    // (score, is_positive) sorted by score descending
    std::vector<std::pair<double, int>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = {scores[i], labels[i] != 0};
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });

    RocCurve curve;
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());

    std::int64_t tp = 0, fp = 0, tp_prev = 0, fp_prev = 0;
    std::int64_t twice_area_num = 0; // sum (tp + tp_prev) * (fp - fp_prev)
    for (std::size_t i = 0; i < n;) {
        const double s = rows[i].first;
        std::size_t j = i;
        while (j < n && rows[j].first == s) {
            tp += rows[j].second;
            fp += 1 - rows[j].second;
            ++j;
        }
        twice_area_num += (tp + tp_prev) * (fp - fp_prev);
        curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
        curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
        curve.thresholds.push_back(s);
        tp_prev = tp;
        fp_prev = fp;
        i = j;
    }

    // Mann-Whitney with midranks, in doubled-rank integers so the check is
    // exact: 2U = 2*R_pos - n_pos*(n_pos+1) and AUC = U / (n_pos*n_neg).
    std::int64_t twice_rank_pos = 0;
    {
        std::vector<std::pair<double, int>> asc(rows.rbegin(), rows.rend());
        std::size_t i = 0;
        while (i < asc.size()) {
            std::size_t j = i;
            std::int64_t pos_in_group = 0;
            while (j < asc.size() && asc[j].first == asc[i].first) pos_in_group += asc[j++].second;
            // ranks i+1 .. j, midrank doubled = i + j + 1
            twice_rank_pos += pos_in_group * static_cast<std::int64_t>(i + j + 1);
            i = j;
        }
    }
    const std::int64_t twice_u = twice_rank_pos - n_pos * (n_pos + 1);
    if (twice_area_num != twice_u)
        throw ComputeError("roc_auc: trapezoid and Mann-Whitney AUC disagree");
    curve.auc = static_cast<double>(twice_area_num) / (2.0 * static_cast<double>(n_pos) *
                                                       static_cast<double>(n_neg));
    return curve;
}

ConfusionMetrics confusion_metrics(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw InputError("confusion_metrics: predictions/labels size mismatch");
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool truth = labels[i] != 0;
        const bool pred = predictions[i] != 0;
        tp += truth && pred;
        fn += truth && !pred;
        tn += !truth && !pred;
        fp += !truth && pred;
    }
    if (tp + fn == 0 || tn + fp == 0)
        throw InputError("confusion_metrics: both classes must be present in labels");
    return {static_cast<double>(tp) / static_cast<double>(tp + fn),
            static_cast<double>(tn) / static_cast<double>(tn + fp),
            static_cast<double>(tp + tn) / static_cast<double>(labels.size())};
}

GroupComparison group_compare(std::span<const StudyFeatureVector> cohort,
                              const std::string& group_a_label, const std::string& group_b_label) {
    std::vector<const StudyFeatureVector*> ga, gb;
    for (const auto& row : cohort) {
        if (!row.label) continue;
        if (*row.label == group_a_label) ga.push_back(&row);
        else if (*row.label == group_b_label) gb.push_back(&row);
    }
    if (ga.size() < 2)
        throw InputError("group_compare: group '" + group_a_label + "' needs n >= 2, got " +
                         std::to_string(ga.size()));
    if (gb.size() < 2)
        throw InputError("group_compare: group '" + group_b_label + "' needs n >= 2, got " +
                         std::to_string(gb.size()));
    const auto& names = ga.front()->names;
    for (const auto* r : ga)
        if (r->names != names) throw InputError("group_compare: feature-name lists differ");
    for (const auto* r : gb)
        if (r->names != names) throw InputError("group_compare: feature-name lists differ");

    GroupComparison out;
    out.group_a_label = group_a_label;
    out.group_b_label = group_b_label;
    for (std::size_t f = 0; f < names.size(); ++f) {
        std::vector<double> va, vb;
        for (const auto* r : ga) va.push_back(r->values[f]);
        for (const auto* r : gb) vb.push_back(r->values[f]);
        const auto sa = summarize(va);
        const auto sb = summarize(vb);
        const auto tt = welch_t_test(va, vb);

        // single-feature AUC with group B as positive class, flipped so the
        // reported AUC is >= 0.5
        std::vector<double> scores;
        std::vector<int> labels;
        for (double v : va) {
            scores.push_back(v);
            labels.push_back(0);
        }
        for (double v : vb) {
            scores.push_back(v);
            labels.push_back(1);
        }
        const double raw = roc_auc(scores, labels).auc;
        FeatureComparison fc;
        fc.feature = names[f];
        fc.mean_a = sa.mean;
        fc.sem_a = sa.sem;
        fc.mean_b = sb.mean;
        fc.sem_b = sb.sem;
        fc.t = tt.t;
        fc.p = tt.p;
        fc.auc = raw >= 0.5 ? raw : 1.0 - raw;
        fc.orientation = raw >= 0.5 ? "B>A" : "A>B";
        out.per_feature.push_back(std::move(fc));
    }
    return out;
}

std::string group_comparison_csv(const GroupComparison& cmp) {
    std::string out = "feature,mean_a,sem_a,mean_b,sem_b,t,p,auc,orientation\n";
    char buf[512];
    for (const auto& f : cmp.per_feature) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                      f.feature.c_str(), f.mean_a, f.sem_a, f.mean_b, f.sem_b, f.t, f.p, f.auc,
                      f.orientation.c_str());
        out += buf;
    }
    return out;
}

} // namespace mprad
