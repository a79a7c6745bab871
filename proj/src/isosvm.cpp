#include "mprad/isosvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mprad/errors.hpp"
#include "mprad/kernels.hpp"
#include "mprad/linalg.hpp"
#include "mprad/parallel.hpp"

namespace mprad {

StandardizedData standardize(std::span<const StudyFeatureVector> rows) {
    if (rows.size() < 2) throw InputError("standardize: need at least 2 rows");
    const auto& names = rows.front().names;
    for (const auto& r : rows)
        if (r.names != names)
            throw InputError("standardize: study '" + r.study_id +
                             "' has a different feature-name list");

    const std::size_t n = rows.size();
    const std::size_t m = names.size();
    StandardizedData out;
    out.n_rows = n;

    std::vector<std::size_t> kept;
    for (std::size_t f = 0; f < m; ++f) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r.values[f];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& r : rows) var += (r.values[f] - mean) * (r.values[f] - mean);
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (sd == 0.0) {
            out.params.warnings.push_back("dropped zero-variance feature '" + names[f] + "'");
            continue;
        }
        kept.push_back(f);
        out.params.feature_names.push_back(names[f]);
        out.params.means.push_back(mean);
        out.params.stddevs.push_back(sd);
    }
    if (kept.empty()) throw InputError("standardize: every feature has zero variance");

    out.n_features = kept.size();
    out.values.resize(n * kept.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < kept.size(); ++f)
            out.values[i * kept.size() + f] =
                (rows[i].values[kept[f]] - out.params.means[f]) / out.params.stddevs[f];
    return out;
}

namespace {

std::vector<double> pairwise_distances(const StandardizedData& data) {
    const std::size_t n = data.n_rows;
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dist = std::sqrt(kernels::squared_distance(data.row(i), data.row(j)));
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        }
    return d;
}

// Symmetric k-NN adjacency: edge when either endpoint ranks the other among
// its k nearest (distance ties broken by index).
std::vector<std::uint8_t> knn_adjacency(const std::vector<double>& dist, std::size_t n, int k) {
    std::vector<std::uint8_t> adj(n * n, 0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (dist[i * n + a] != dist[i * n + b]) return dist[i * n + a] < dist[i * n + b];
            return a < b;
        });
        int taken = 0;
        for (std::size_t r = 0; r < n && taken < k; ++r) {
            if (order[r] == i) continue;
            adj[i * n + order[r]] = 1;
            adj[order[r] * n + i] = 1;
            ++taken;
        }
    }
    return adj;
}

bool connected(const std::vector<std::uint8_t>& adj, std::size_t n) {
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v)
            if (adj[u * n + v] && !seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
    }
    return count == n;
}

} // namespace

IsomapModel fit_isomap(const StandardizedData& data, int k, int embedding_dim) {
    const std::size_t n = data.n_rows;
    if (k < 1) throw InputError("fit_isomap: k must be >= 1");
    if (static_cast<std::size_t>(k) >= n)
        throw InputError("fit_isomap: k must be smaller than the number of rows");
    if (embedding_dim < 1 || static_cast<std::size_t>(embedding_dim) > n - 1)
        throw InputError("fit_isomap: embedding_dim must be in [1, n-1]");

    IsomapModel model;
    model.k_requested = k;
    model.embedding_dim_requested = embedding_dim;
    model.n_points = n;

    const auto dist = pairwise_distances(data);
    std::vector<std::uint8_t> adj;
    int k_used = k;
    for (;; ++k_used) {
        adj = knn_adjacency(dist, n, k_used);
        if (connected(adj, n)) break;
        if (static_cast<std::size_t>(k_used) >= n - 1)
            throw ComputeError("fit_isomap: neighbor graph cannot be connected");
        model.adjustments.push_back("k incremented to " + std::to_string(k_used + 1) +
                                    " to connect the neighbor graph");
    }
    model.k_used = k_used;

    // Floyd-Warshall on the weighted graph.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double>& geo = model.geodesic;
    geo.assign(n * n, inf);
    for (std::size_t i = 0; i < n; ++i) geo[i * n + i] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (adj[i * n + j]) geo[i * n + j] = dist[i * n + j];
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i) {
            const double dim_ = geo[i * n + m];
            if (dim_ == inf) continue;
            for (std::size_t j = 0; j < n; ++j) {
                const double cand = dim_ + geo[m * n + j];
                if (cand < geo[i * n + j]) geo[i * n + j] = cand;
            }
        }

    // Classical MDS: B = -1/2 J D^2 J, top eigenpairs scaled by sqrt(lambda).
    std::vector<double> d2(n * n);
    for (std::size_t i = 0; i < n * n; ++i) d2[i] = geo[i] * geo[i];
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row_mean[i] += d2[i * n + j];
        row_mean[i] /= static_cast<double>(n);
        grand += row_mean[i];
    }
    grand /= static_cast<double>(n);
    std::vector<double> b(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b[i * n + j] = -0.5 * (d2[i * n + j] - row_mean[i] - row_mean[j] + grand);

    const auto eig = symmetric_eigen(std::move(b), n);
    const double lead = std::max(eig.eigenvalues.front(), 0.0);
    int positive = 0;
    for (double ev : eig.eigenvalues)
        if (ev > 1e-12 * std::max(lead, 1.0)) ++positive;
    int dim_used = std::min(embedding_dim, positive);
    if (dim_used < 1)
        throw ComputeError("fit_isomap: no positive eigenvalue in the MDS spectrum");
    if (dim_used < embedding_dim)
        model.adjustments.push_back("embedding_dim reduced to " + std::to_string(dim_used) +
                                    " (only " + std::to_string(positive) +
                                    " positive eigenvalues)");
    model.embedding_dim = dim_used;
    model.embedding.resize(n * static_cast<std::size_t>(dim_used));
    for (std::size_t i = 0; i < n; ++i)
        for (int t = 0; t < dim_used; ++t)
            model.embedding[i * dim_used + t] =
                eig.vector_entry(i, static_cast<std::size_t>(t)) * std::sqrt(eig.eigenvalues[t]);
    return model;
}

double LinearSvmModel::decision(std::span<const double> x) const {
    double acc = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * x[i];
    return acc;
}

namespace {

double primal_objective_at(std::span<const double> points, std::size_t n, std::size_t dim,
                           std::span<const int> labels, double c,
                           const std::vector<double>& w, double b) {
    double obj = 0.0;
    for (double wi : w) obj += wi * wi;
    obj *= 0.5;
    for (std::size_t i = 0; i < n; ++i) {
        double f = b;
        for (std::size_t t = 0; t < dim; ++t) f += w[t] * points[i * dim + t];
        obj += c * std::max(0.0, 1.0 - labels[i] * f);
    }
    return obj;
}

} // namespace

LinearSvmModel train_linear_svm(std::span<const double> points, std::size_t n, std::size_t dim,
                                std::span<const int> labels, double c) {
    if (!(c > 0.0)) throw InputError("train_linear_svm: C must be positive");
    if (labels.size() != n || points.size() != n * dim)
        throw InputError("train_linear_svm: inconsistent input sizes");
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw InputError("train_linear_svm: labels must be -1 or +1");
    }
    if (!has_pos || !has_neg) throw InputError("train_linear_svm: both classes must be present");

    // dense linear kernel
    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < dim; ++t)
                acc += points[i * dim + t] * points[j * dim + t];
            kmat[i * n + j] = acc;
            kmat[j * n + i] = acc;
        }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n, 0.0); // f_i = sum_j alpha_j y_j K_ij
    constexpr double tol = 1e-10;
    const std::size_t max_iter = 1000000;
    std::size_t it = 0;
    bool converged = false;
    for (; it < max_iter; ++it) {
        // maximal violating pair over I_up / I_low; g_i = y_i f_i - 1
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::size_t i_up = n, i_low = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double yg = labels[t] - f[t]; // -y_t g_t with g_t = y_t f_t - 1
            const bool in_up = (labels[t] == 1 && alpha[t] < c) || (labels[t] == -1 && alpha[t] > 0);
            const bool in_low = (labels[t] == -1 && alpha[t] < c) || (labels[t] == 1 && alpha[t] > 0);
            if (in_up && yg > up_best) {
                up_best = yg;
                i_up = t;
            }
            if (in_low && yg < low_best) {
                low_best = yg;
                i_low = t;
            }
        }
        if (i_up == n || i_low == n || up_best - low_best < tol) {
            converged = true;
            break;
        }
        const std::size_t i = i_up, j = i_low;
        const int yi = labels[i], yj = labels[j];
        // direction alpha_i += yi*delta, alpha_j -= yj*delta keeps sum(alpha*y)
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        if (yi == 1) {
            lo = std::max(lo, -alpha[i]);
            hi = std::min(hi, c - alpha[i]);
        } else {
            lo = std::max(lo, alpha[i] - c);
            hi = std::min(hi, alpha[i]);
        }
        if (yj == 1) {
            lo = std::max(lo, alpha[j] - c);
            hi = std::min(hi, alpha[j]);
        } else {
            lo = std::max(lo, -alpha[j]);
            hi = std::min(hi, c - alpha[j]);
        }
        const double slope = (f[i] - f[j]) - yi + yj; // d obj / d delta at 0, always < 0 here
        const double eta = kmat[i * n + i] + kmat[j * n + j] - 2.0 * kmat[i * n + j];
        double delta;
        if (eta > 1e-12) {
            delta = std::clamp(-slope / eta, lo, hi);
        } else {
            delta = slope < 0.0 ? hi : lo;
        }
        if (!(std::isfinite(delta)) || delta == 0.0) {
            converged = true; // numerically stuck at the boundary
            break;
        }
        alpha[i] += yi * delta;
        alpha[j] -= yj * delta;
        for (std::size_t t = 0; t < n; ++t)
            f[t] += delta * (kmat[t * n + i] - kmat[t * n + j]);
    }

    LinearSvmModel model;
    model.c = c;
    model.alpha = alpha;
    model.iterations = it;
    model.converged = converged;
    model.weights.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0.0) continue;
        for (std::size_t t = 0; t < dim; ++t)
            model.weights[t] += alpha[i] * labels[i] * points[i * dim + t];
    }

    double dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual += alpha[i];
    double wnorm2 = 0.0;
    for (double w : model.weights) wnorm2 += w * w;
    dual -= 0.5 * wnorm2;
    model.dual_objective = dual;

    // bias minimizing the primal hinge sum given w: the objective is convex
    // piecewise linear in b with breakpoints y_i - w.x_i, so scan them and
    // take the midpoint of the minimizing interval
    std::vector<double> bps(n);
    for (std::size_t i = 0; i < n; ++i) {
        double wx = 0.0;
        for (std::size_t t = 0; t < dim; ++t) wx += model.weights[t] * points[i * dim + t];
        bps[i] = labels[i] - wx;
    }
    std::sort(bps.begin(), bps.end());
    double best = std::numeric_limits<double>::infinity();
    std::size_t first = 0, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double obj = primal_objective_at(points, n, dim, labels, c, model.weights, bps[i]);
        if (obj < best - 1e-12 * (1.0 + std::abs(best))) {
            best = obj;
            first = last = i;
        } else if (obj <= best + 1e-12 * (1.0 + std::abs(best))) {
            last = i;
        }
    }
    model.bias = 0.5 * (bps[first] + bps[last]);
    model.primal_objective =
        primal_objective_at(points, n, dim, labels, c, model.weights, model.bias);
    model.duality_gap = model.primal_objective - model.dual_objective;
    return model;
}

std::vector<double> LoocvResult::scores() const {
    std::vector<double> s;
    for (const auto& p : predictions) s.push_back(p.score);
    return s;
}

std::vector<int> LoocvResult::true_labels01() const {
    std::vector<int> s;
    for (const auto& p : predictions) s.push_back(p.true_label == classes[1] ? 1 : 0);
    return s;
}

std::vector<int> LoocvResult::predicted_labels01() const {
    std::vector<int> s;
    for (const auto& p : predictions) s.push_back(p.predicted_label == classes[1] ? 1 : 0);
    return s;
}

LoocvResult loocv_isosvm(std::span<const StudyFeatureVector> rows, int k, int embedding_dim,
                         double c, int threads) {
    if (rows.size() < 4) throw InputError("loocv_isosvm: need at least 4 studies");
    std::set<std::string> classes;
    for (const auto& r : rows) {
        if (!r.label) throw InputError("loocv_isosvm: study '" + r.study_id + "' has no label");
        classes.insert(*r.label);
    }
    if (classes.size() != 2)
        throw InputError("loocv_isosvm: expected exactly 2 classes, got " +
                         std::to_string(classes.size()));

    LoocvResult result;
    result.classes.assign(classes.begin(), classes.end());

    const auto data = standardize(rows);
    result.standardization = data.params;
    result.isomap = fit_isomap(data, k, embedding_dim);

    const std::size_t n = rows.size();
    const std::size_t dim = static_cast<std::size_t>(result.isomap.embedding_dim);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = (*rows[i].label == result.classes[1]) ? 1 : -1;

    result.predictions.resize(n);
    parallel_for_blocks(n, threads, [&](std::size_t lo, std::size_t hi, int) {
        std::vector<double> train_pts((n - 1) * dim);
        std::vector<int> train_y(n - 1);
        for (std::size_t held = lo; held < hi; ++held) {
            std::size_t w = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == held) continue;
                for (std::size_t t = 0; t < dim; ++t)
                    train_pts[w * dim + t] = result.isomap.embedding[i * dim + t];
                train_y[w] = y[i];
                ++w;
            }
            bool pos = false, neg = false;
            for (int yy : train_y) (yy == 1 ? pos : neg) = true;
            if (!pos || !neg)
                throw InputError("loocv_isosvm: a fold lost one class entirely (class too small)");
            const auto model = train_linear_svm(train_pts, n - 1, dim, train_y, c);
            const double score = model.decision(result.isomap.point(held));
            LoocvPrediction p;
            p.study_id = rows[held].study_id;
            p.true_label = *rows[held].label;
            p.predicted_label = score >= 0.0 ? result.classes[1] : result.classes[0];
            p.score = score;
            result.predictions[held] = std::move(p);
        }
    });
    return result;
}

} // namespace mprad
