#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace oracle {

std::vector<std::uint64_t> brute_force_tscm(const mprad::QuantizedStack& q,
                                            const mprad::RoiMask& roi, int d, mprad::Angle theta) {
    const int g = q.g;
    const auto [dx, dy] = mprad::angle_offset(theta, d);
    std::vector<std::uint64_t> raw(static_cast<std::size_t>(g) * g, 0);

    // collect in-ROI voxel coordinates, then test every ordered pair
    struct Vox {
        int x, y, z;
        std::size_t lin;
    };
    std::vector<Vox> vox;
    for (int z = 0; z < q.dims.nz; ++z)
        for (int y = 0; y < q.dims.ny; ++y)
            for (int x = 0; x < q.dims.nx; ++x) {
                const std::size_t lin = q.dims.index(x, y, z);
                if (roi.inside[lin]) vox.push_back({x, y, z, lin});
            }
    for (const auto& a : vox)
        for (const auto& b : vox) {
            if (b.x - a.x != dx || b.y - a.y != dy || b.z != a.z) continue;
            for (int c = 0; c < q.channel_count(); ++c) {
                const int la = q.levels[c][a.lin];
                const int lb = q.levels[c][b.lin];
                ++raw[static_cast<std::size_t>(la - 1) * g + (lb - 1)];
            }
        }
    std::vector<std::uint64_t> sym(raw.size());
    for (int m = 0; m < g; ++m)
        for (int n = 0; n < g; ++n)
            sym[static_cast<std::size_t>(m) * g + n] =
                raw[static_cast<std::size_t>(m) * g + n] + raw[static_cast<std::size_t>(n) * g + m];
    return sym;
}

namespace {

double naive_mcc(const std::vector<double>& p, int g) {
    std::vector<double> px(g, 0.0), py(g, 0.0);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            px[i] += p[static_cast<std::size_t>(i) * g + j];
            py[j] += p[static_cast<std::size_t>(i) * g + j];
        }
    std::vector<int> rows, cols;
    for (int i = 0; i < g; ++i) {
        if (px[i] > 0.0) rows.push_back(i);
        if (py[i] > 0.0) cols.push_back(i);
    }
    if (rows.size() < 2 || cols.size() < 2) return 0.0;

    // Haralick's Q on the occupied rows, straight from the definition
    const std::size_t nr = rows.size();
    Eigen::MatrixXd q(nr, nr);
    for (std::size_t a = 0; a < nr; ++a)
        for (std::size_t b = 0; b < nr; ++b) {
            double acc = 0.0;
            for (int k : cols)
                acc += p[static_cast<std::size_t>(rows[a]) * g + k] *
                       p[static_cast<std::size_t>(rows[b]) * g + k] / (px[rows[a]] * py[k]);
            q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
        }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(q);
    std::vector<double> evals;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        evals.push_back(solver.eigenvalues()[i].real());
    std::sort(evals.begin(), evals.end(), std::greater<>());
    return std::sqrt(std::max(evals[1], 0.0));
}

} // namespace

mprad::HaralickFeatureSet naive_haralick(const std::vector<double>& p, int g) {
    const auto at = [&](int i, int j) { return p[static_cast<std::size_t>(i) * g + j]; };
    std::vector<double> px(g, 0.0), py(g, 0.0);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            px[i] += at(i, j);
            py[j] += at(i, j);
        }
    double mu_x = 0.0, mu_y = 0.0;
    for (int i = 0; i < g; ++i) {
        mu_x += (i + 1.0) * px[i];
        mu_y += (i + 1.0) * py[i];
    }
    double var_x = 0.0, var_y = 0.0;
    for (int i = 0; i < g; ++i) {
        var_x += (i + 1.0 - mu_x) * (i + 1.0 - mu_x) * px[i];
        var_y += (i + 1.0 - mu_y) * (i + 1.0 - mu_y) * py[i];
    }
    std::vector<double> pxy(2 * g - 1, 0.0), pd(g, 0.0);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            pxy[i + j] += at(i, j);
            pd[std::abs(i - j)] += at(i, j);
        }

    mprad::HaralickFeatureSet f{};
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double v = at(i, j);
            f.energy += v * v;
            f.contrast += (i - j) * (i - j) * v;
            f.dissimilarity += std::abs(i - j) * v;
            f.homogeneity1 += v / (1.0 + std::abs(i - j));
            f.homogeneity2 += v / (1.0 + (i - j) * (i - j));
            f.inverse_difference_normalized += v / (1.0 + std::abs(i - j) / static_cast<double>(g));
            f.inverse_difference_moment_normalized +=
                v / (1.0 + (i - j) * (i - j) / (static_cast<double>(g) * g));
            f.autocorrelation += (i + 1.0) * (j + 1.0) * v;
            f.max_probability = std::max(f.max_probability, v);
            if (v > 0.0) f.entropy -= v * std::log2(v);
            const double u = (i + 1.0) + (j + 1.0) - mu_x - mu_y;
            f.cluster_shade += u * u * u * v;
            f.cluster_prominence += u * u * u * u * v;
        }
    const double sigma = std::sqrt(var_x) * std::sqrt(var_y);
    f.correlation = sigma > 0.0 ? (f.autocorrelation - mu_x * mu_y) / sigma : 1.0;
    f.sum_of_squares_variance = var_x;
    for (int k = 0; k < 2 * g - 1; ++k) f.sum_average += (k + 2.0) * pxy[k];
    for (int k = 0; k < 2 * g - 1; ++k)
        f.sum_variance += (k + 2.0 - f.sum_average) * (k + 2.0 - f.sum_average) * pxy[k];
    for (int k = 0; k < 2 * g - 1; ++k)
        if (pxy[k] > 0.0) f.sum_entropy -= pxy[k] * std::log2(pxy[k]);
    double mu_d = 0.0;
    for (int k = 0; k < g; ++k) mu_d += k * pd[k];
    for (int k = 0; k < g; ++k) f.difference_variance += (k - mu_d) * (k - mu_d) * pd[k];
    for (int k = 0; k < g; ++k)
        if (pd[k] > 0.0) f.difference_entropy -= pd[k] * std::log2(pd[k]);

    double hx = 0.0, hy = 0.0, hxy1 = 0.0, hxy2 = 0.0;
    for (int i = 0; i < g; ++i) {
        if (px[i] > 0.0) hx -= px[i] * std::log2(px[i]);
        if (py[i] > 0.0) hy -= py[i] * std::log2(py[i]);
    }
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double w = px[i] * py[j];
            if (w <= 0.0) continue;
            if (at(i, j) > 0.0) hxy1 -= at(i, j) * std::log2(w);
            hxy2 -= w * std::log2(w);
        }
    const double hmax = std::max(hx, hy);
    f.imc1 = hmax > 0.0 ? (f.entropy - hxy1) / hmax : 0.0;
    f.imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - f.entropy))));
    f.max_correlation_coefficient = naive_mcc(p, g);
    return f;
}

double entropy_from_counts(const std::vector<std::uint64_t>& counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double mi_from_probability_table(const std::vector<std::pair<int, int>>& pairs, int g) {
    std::vector<std::uint64_t> joint(static_cast<std::size_t>(g) * g, 0);
    std::vector<std::uint64_t> m1(g, 0), m2(g, 0);
    for (const auto& [a, b] : pairs) {
        ++joint[static_cast<std::size_t>(a - 1) * g + (b - 1)];
        ++m1[a - 1];
        ++m2[b - 1];
    }
    return entropy_from_counts(m1) + entropy_from_counts(m2) - entropy_from_counts(joint);
}

double ibeta_boost(double a, double b, double x) { return boost::math::ibeta(a, b, x); }

double welch_p_boost(std::span<const double> a, std::span<const double> b) {
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
    const double t = (ma - mb) / std::sqrt(se2);
    const double df =
        se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double mann_whitney_auc(std::span<const double> scores, std::span<const int> labels) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) rank[order[t]] = mid;
        i = j;
    }
    double rank_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t t = 0; t < n; ++t)
        if (labels[t] != 0) {
            rank_pos += rank[t];
            ++n_pos;
        }
    const std::size_t n_neg = n - n_pos;
    const double u = rank_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

// projection onto {0 <= alpha <= C, y.alpha = 0} by bisection on the
// multiplier of the equality constraint
Eigen::VectorXd project_dual(const Eigen::VectorXd& v, const Eigen::VectorXd& y, double c) {
    const auto clipped = [&](double lambda) {
        Eigen::VectorXd out = v - lambda * y;
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], 0.0, c);
        return out;
    };
    const auto h = [&](double lambda) { return y.dot(clipped(lambda)); };
    double lo = -(v.cwiseAbs().maxCoeff() + c + 1.0);
    double hi = -lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return clipped(0.5 * (lo + hi));
}

} // namespace

double svm_dual_optimum(std::span<const double> points, std::size_t n, std::size_t dim,
                        std::span<const int> labels, double c) {
    Eigen::MatrixXd x(n, dim);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[static_cast<Eigen::Index>(i)] = labels[i];
        for (std::size_t t = 0; t < dim; ++t)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = points[i * dim + t];
    }
    const Eigen::MatrixXd q = (y * y.transpose()).cwiseProduct(x * x.transpose());
    const auto dual = [&](const Eigen::VectorXd& a) {
        return a.sum() - 0.5 * a.dot(q * a);
    };

    // FISTA with step 1/L
    const double l = std::max(q.operatorNorm(), 1e-12);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = alpha;
    double tk = 1.0;
    for (int it = 0; it < 60000; ++it) {
        const Eigen::VectorXd grad = q * z - Eigen::VectorXd::Ones(n);
        const Eigen::VectorXd next = project_dual(z - grad / l, y, c);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        z = next + ((tk - 1.0) / t_next) * (next - alpha);
        alpha = next;
        tk = t_next;
    }
    double best = dual(alpha);

    // KKT polish: solve the equality system on the detected free set
    const double tol = 1e-6 * std::max(c, 1.0);
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[static_cast<Eigen::Index>(i)] > tol &&
            alpha[static_cast<Eigen::Index>(i)] < c - tol)
            free_idx.push_back(i);
    if (!free_idx.empty()) {
        const std::size_t nf = free_idx.size();
        Eigen::MatrixXd kkt(nf + 1, nf + 1);
        Eigen::VectorXd rhs(nf + 1);
        kkt.setZero();
        double ysum_bound = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool is_free =
                std::find(free_idx.begin(), free_idx.end(), i) != free_idx.end();
            if (!is_free) ysum_bound += y[static_cast<Eigen::Index>(i)] *
                                        alpha[static_cast<Eigen::Index>(i)];
        }
        for (std::size_t a = 0; a < nf; ++a) {
            for (std::size_t b = 0; b < nf; ++b)
                kkt(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    q(static_cast<Eigen::Index>(free_idx[a]), static_cast<Eigen::Index>(free_idx[b]));
            double dot_bound = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool is_free =
                    std::find(free_idx.begin(), free_idx.end(), i) != free_idx.end();
                if (!is_free)
                    dot_bound += q(static_cast<Eigen::Index>(free_idx[a]),
                                   static_cast<Eigen::Index>(i)) *
                                 alpha[static_cast<Eigen::Index>(i)];
            }
            rhs[static_cast<Eigen::Index>(a)] = 1.0 - dot_bound;
            kkt(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(nf)) =
                y[static_cast<Eigen::Index>(free_idx[a])];
            kkt(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(a)) =
                y[static_cast<Eigen::Index>(free_idx[a])];
        }
        rhs[static_cast<Eigen::Index>(nf)] = -ysum_bound;
        const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
        Eigen::VectorXd polished = alpha;
        bool feasible = true;
        for (std::size_t a = 0; a < nf; ++a) {
            const double v = sol[static_cast<Eigen::Index>(a)];
            if (v < -1e-9 || v > c + 1e-9) feasible = false;
            polished[static_cast<Eigen::Index>(free_idx[a])] = std::clamp(v, 0.0, c);
        }
        if (feasible) {
            polished = project_dual(polished, y, c);
            best = std::max(best, dual(polished));
        }
    }
    return best;
}

std::vector<double> symmetric_eigenvalues_eigen(const std::vector<double>& a, std::size_t n) {
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i * n + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    std::vector<double> evals(solver.eigenvalues().data(),
                              solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(evals.begin(), evals.end(), std::greater<>());
    return evals;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    const auto ranks = [](std::span<const double> v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && v[order[j]] == v[order[i]]) ++j;
            const double mid = 0.5 * static_cast<double>(i + 1 + j);
            for (std::size_t t = i; t < j; ++t) r[order[t]] = mid;
            i = j;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

mprad::QuantizedStack random_quantized_stack(std::mt19937_64& rng, const mprad::GridDims& dims,
                                             int n_channels, int g) {
    mprad::QuantizedStack q;
    q.dims = dims;
    q.g = g;
    std::uniform_int_distribution<int> level(1, g);
    for (int c = 0; c < n_channels; ++c) {
        q.channel_names.push_back("ch" + std::to_string(c + 1));
        q.per_channel_range.emplace_back(0.0f, 1.0f);
        std::vector<std::uint16_t> lv(dims.voxel_count());
        for (auto& v : lv) v = static_cast<std::uint16_t>(level(rng));
        q.levels.push_back(std::move(lv));
    }
    return q;
}

mprad::RoiMask random_mask(std::mt19937_64& rng, const mprad::GridDims& dims, double p_inside,
                           std::size_t min_inside) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    mprad::RoiMask mask;
    mask.dims = dims;
    mask.label = "random";
    for (;;) {
        mask.inside.assign(dims.voxel_count(), 0);
        for (auto& b : mask.inside) b = u(rng) < p_inside ? 1 : 0;
        if (mask.inside_count() >= min_inside) return mask;
    }
}

mprad::RoiMask full_mask(const mprad::GridDims& dims) {
    mprad::RoiMask mask;
    mask.dims = dims;
    mask.label = "full";
    mask.inside.assign(dims.voxel_count(), 1);
    return mask;
}

std::vector<double> random_normalized_matrix(std::mt19937_64& rng, int g) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> p(static_cast<std::size_t>(g) * g);
    double total = 0.0;
    for (auto& v : p) {
        v = u(rng);
        total += v;
    }
    for (auto& v : p) v /= total;
    return p;
}

} // namespace oracle
