#include "mprad/tscm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mprad/errors.hpp"
#include "mprad/kernels.hpp"
#include "mprad/linalg.hpp"
#include "mprad/parallel.hpp"
#include "mprad/tsfos.hpp"
#include "mprad/tspm.hpp"

namespace mprad {

const char* angle_suffix(Angle a) {
    switch (a) {
        case Angle::deg0: return "0";
        case Angle::deg45: return "45";
        case Angle::deg90: return "90";
        case Angle::deg135: return "135";
    }
    return "?";
}

Angle angle_from_degrees(int deg) {
    switch (deg) {
        case 0: return Angle::deg0;
        case 45: return Angle::deg45;
        case 90: return Angle::deg90;
        case 135: return Angle::deg135;
    }
    throw InputError("angle must be one of 0, 45, 90, 135; got " + std::to_string(deg));
}

std::pair<int, int> angle_offset(Angle a, int d) {
    switch (a) {
        case Angle::deg0: return {d, 0};
        case Angle::deg45: return {d, -d};
        case Angle::deg90: return {0, -d};
        case Angle::deg135: return {-d, -d};
    }
    return {0, 0};
}

Tscm::Tscm(int g, int d, Angle theta, std::vector<std::uint64_t> symmetric_counts,
           std::uint64_t raw_pair_increments)
    : g_(g), d_(d), theta_(theta), counts_(std::move(symmetric_counts)),
      raw_increments_(raw_pair_increments) {
    const std::uint64_t total = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    normalized_.resize(counts_.size());
    const double tot = static_cast<double>(total);
    for (std::size_t i = 0; i < counts_.size(); ++i)
        normalized_[i] = static_cast<double>(counts_[i]) / tot;
}

namespace {

// Accumulate raw (unsymmetrized) co-occurrence counts over all channels for
// voxel pairs whose endpoints both lie in the ROI and inside
// [box_lo, box_hi] (inclusive). z range may be restricted for slice-parallel
// accumulation.
void accumulate_pairs(const QuantizedStack& q, const RoiMask& roi, int d, Angle theta,
                      const std::array<int, 3>& box_lo, const std::array<int, 3>& box_hi,
                      int z_begin, int z_end, std::vector<std::uint64_t>& counts,
                      std::uint64_t& increments) {
    const auto [dx, dy] = angle_offset(theta, d);
    const auto& dims = q.dims;
    const int g = q.g;
    const int n_channels = q.channel_count();
    for (int z = z_begin; z < z_end; ++z) {
        for (int y = box_lo[1]; y <= box_hi[1]; ++y) {
            const int yj = y + dy;
            if (yj < box_lo[1] || yj > box_hi[1]) continue;
            for (int x = box_lo[0]; x <= box_hi[0]; ++x) {
                const int xj = x + dx;
                if (xj < box_lo[0] || xj > box_hi[0]) continue;
                const std::size_t i = dims.index(x, y, z);
                const std::size_t j = dims.index(xj, yj, z);
                if (!roi.inside[i] || !roi.inside[j]) continue;
                for (int c = 0; c < n_channels; ++c) {
                    const int li = q.levels[c][i];
                    const int lj = q.levels[c][j];
                    ++counts[static_cast<std::size_t>(li - 1) * g + (lj - 1)];
                }
                increments += static_cast<std::uint64_t>(n_channels);
            }
        }
    }
}

Tscm finish_tscm(const QuantizedStack& q, int d, Angle theta, std::vector<std::uint64_t> raw,
                 std::uint64_t increments) {
    if (increments == 0)
        throw ComputeError(std::string("build_tscm: no qualifying voxel pair for angle ") +
                           angle_suffix(theta) + " at d=" + std::to_string(d) +
                           " (degenerate ROI)");
    const int g = q.g;
    std::vector<std::uint64_t> sym(raw.size());
    for (int m = 0; m < g; ++m)
        for (int n = 0; n < g; ++n)
            sym[static_cast<std::size_t>(m) * g + n] =
                raw[static_cast<std::size_t>(m) * g + n] + raw[static_cast<std::size_t>(n) * g + m];
    return Tscm(g, d, theta, std::move(sym), increments);
}

} // namespace

Tscm build_tscm(const QuantizedStack& q, const RoiMask& roi, int d, Angle theta, int threads) {
    if (d < 1) throw InputError("build_tscm: d must be >= 1, got " + std::to_string(d));
    if (!(roi.dims == q.dims)) throw InputError("build_tscm: ROI dims do not match stack dims");

    const int g = q.g;
    const std::array<int, 3> lo{0, 0, 0};
    const std::array<int, 3> hi{q.dims.nx - 1, q.dims.ny - 1, q.dims.nz - 1};
    const std::size_t nz = static_cast<std::size_t>(q.dims.nz);

    // Per-task private matrices, merged by integer addition: the result is
    // exactly independent of the thread count.
    const std::size_t cells = static_cast<std::size_t>(g) * g;
    std::vector<std::vector<std::uint64_t>> partial;
    std::vector<std::uint64_t> partial_inc;
    {
        const int nt = std::max(1, std::min<int>(threads, static_cast<int>(nz)));
        partial.assign(static_cast<std::size_t>(nt), std::vector<std::uint64_t>(cells, 0));
        partial_inc.assign(static_cast<std::size_t>(nt), 0);
        parallel_for_blocks(nz, nt, [&](std::size_t zlo, std::size_t zhi, int task) {
            accumulate_pairs(q, roi, d, theta, lo, hi, static_cast<int>(zlo),
                             static_cast<int>(zhi), partial[task], partial_inc[task]);
        });
    }
    std::vector<std::uint64_t> raw(cells, 0);
    std::uint64_t increments = 0;
    for (std::size_t t = 0; t < partial.size(); ++t) {
        for (std::size_t i = 0; i < cells; ++i) raw[i] += partial[t][i];
        increments += partial_inc[t];
    }
    return finish_tscm(q, d, theta, std::move(raw), increments);
}

namespace {

double plog2p_sum(std::span<const double> p) {
    double acc = 0.0;
    for (double v : p)
        if (v > 0.0) acc += v * std::log2(v);
    return acc;
}

// sqrt of the second-largest eigenvalue of Haralick's Q matrix. Q is similar
// to the symmetric PSD matrix B B^T with B(i,k) = p(i,k)/sqrt(px(i) py(k)),
// so the eigenvalues are computed from that symmetric form. Returns 0 when
// fewer than two marginal levels are occupied.
double max_correlation_coefficient(const std::vector<double>& p, int g,
                                   const std::vector<double>& px, const std::vector<double>& py) {
    std::vector<int> support;
    for (int i = 0; i < g; ++i)
        if (px[i] > 0.0) support.push_back(i);
    const std::size_t s = support.size();
    if (s < 2) return 0.0;

    std::vector<double> b(s * s);
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t k = 0; k < s; ++k)
            b[a * s + k] = p[static_cast<std::size_t>(support[a]) * g + support[k]] /
                           std::sqrt(px[support[a]] * py[support[k]]);
    std::vector<double> bbt(s * s, 0.0);
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t c = a; c < s; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < s; ++k) acc += b[a * s + k] * b[c * s + k];
            bbt[a * s + c] = acc;
            bbt[c * s + a] = acc;
        }
    const auto eig = symmetric_eigen(std::move(bbt), s);
    return std::sqrt(std::max(eig.eigenvalues[1], 0.0));
}

} // namespace

HaralickFeatureSet haralick_features(const Tscm& t) {
    const int g = t.g();
    const auto& p = t.normalized();
    if (p.empty() || t.raw_increments() == 0) throw ComputeError("haralick_features: empty TSCM");

    const auto mom = kernels::cooc_moments(p, g);

    std::vector<double> px(g, 0.0), py(g, 0.0);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            px[i] += p[static_cast<std::size_t>(i) * g + j];
            py[j] += p[static_cast<std::size_t>(i) * g + j];
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

    // p_{x+y} indexed by k-2 for k in [2, 2G]; p_{x-y} indexed by |i-j|.
    std::vector<double> pxy(2 * g - 1, 0.0), pdiff(g, 0.0);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double v = p[static_cast<std::size_t>(i) * g + j];
            pxy[i + j] += v;
            pdiff[std::abs(i - j)] += v;
        }

    const double hxy = 0.0 - plog2p_sum(p);
    const double hx = 0.0 - plog2p_sum(px);
    const double hy = 0.0 - plog2p_sum(py);
    double hxy1 = 0.0, hxy2 = 0.0;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double q = px[i] * py[j];
            if (q <= 0.0) continue;
            const double v = p[static_cast<std::size_t>(i) * g + j];
            if (v > 0.0) hxy1 -= v * std::log2(q);
            hxy2 -= q * std::log2(q);
        }

    HaralickFeatureSet f{};
    f.energy = mom.energy;
    f.contrast = mom.contrast;
    f.dissimilarity = mom.dissimilarity;
    f.homogeneity1 = mom.homogeneity1;
    f.homogeneity2 = mom.homogeneity2;
    f.inverse_difference_normalized = mom.idn;
    f.inverse_difference_moment_normalized = mom.idmn;
    f.autocorrelation = mom.autocorrelation;
    f.max_probability = mom.max_probability;

    const double sigma = std::sqrt(var_x) * std::sqrt(var_y);
    // a single occupied level is perfect dependence; the correlation limit is 1
    f.correlation = sigma > 0.0 ? (mom.autocorrelation - mu_x * mu_y) / sigma : 1.0;
    f.sum_of_squares_variance = var_x;

    double sum_avg = 0.0;
    for (int k = 0; k < 2 * g - 1; ++k) sum_avg += (k + 2.0) * pxy[k];
    double sum_var = 0.0;
    for (int k = 0; k < 2 * g - 1; ++k)
        sum_var += (k + 2.0 - sum_avg) * (k + 2.0 - sum_avg) * pxy[k];
    f.sum_average = sum_avg;
    f.sum_variance = sum_var;
    f.sum_entropy = 0.0 - plog2p_sum(pxy);
    f.entropy = hxy;

    double mu_d = 0.0;
    for (int k = 0; k < g; ++k) mu_d += k * pdiff[k];
    double var_d = 0.0;
    for (int k = 0; k < g; ++k) var_d += (k - mu_d) * (k - mu_d) * pdiff[k];
    f.difference_variance = var_d;
    f.difference_entropy = 0.0 - plog2p_sum(pdiff);

    const double hmax = std::max(hx, hy);
    f.imc1 = hmax > 0.0 ? (hxy - hxy1) / hmax : 0.0;
    f.imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy))));
    f.max_correlation_coefficient = max_correlation_coefficient(p, g, px, py);

    double shade = 0.0, prom = 0.0;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double v = p[static_cast<std::size_t>(i) * g + j];
            if (v == 0.0) continue;
            const double u = (i + 1.0) + (j + 1.0) - mu_x - mu_y;
            shade += u * u * u * v;
            prom += u * u * u * u * v;
        }
    f.cluster_shade = shade;
    f.cluster_prominence = prom;
    return f;
}

const std::vector<std::string>& HaralickFeatureSet::feature_names() {
    static const std::vector<std::string> names{
        "energy",
        "contrast",
        "correlation",
        "sum_of_squares_variance",
        "homogeneity1",
        "homogeneity2",
        "sum_average",
        "sum_variance",
        "sum_entropy",
        "entropy",
        "difference_variance",
        "difference_entropy",
        "imc1",
        "imc2",
        "max_correlation_coefficient",
        "autocorrelation",
        "dissimilarity",
        "cluster_shade",
        "cluster_prominence",
        "max_probability",
        "inverse_difference_normalized",
        "inverse_difference_moment_normalized",
    };
    return names;
}

std::vector<double> HaralickFeatureSet::values() const {
    return {energy,
            contrast,
            correlation,
            sum_of_squares_variance,
            homogeneity1,
            homogeneity2,
            sum_average,
            sum_variance,
            sum_entropy,
            entropy,
            difference_variance,
            difference_entropy,
            imc1,
            imc2,
            max_correlation_coefficient,
            autocorrelation,
            dissimilarity,
            cluster_shade,
            cluster_prominence,
            max_probability,
            inverse_difference_normalized,
            inverse_difference_moment_normalized};
}

HaralickFeatureSet HaralickFeatureSet::from_values(const std::vector<double>& v) {
    HaralickFeatureSet f{};
    f.energy = v[0];
    f.contrast = v[1];
    f.correlation = v[2];
    f.sum_of_squares_variance = v[3];
    f.homogeneity1 = v[4];
    f.homogeneity2 = v[5];
    f.sum_average = v[6];
    f.sum_variance = v[7];
    f.sum_entropy = v[8];
    f.entropy = v[9];
    f.difference_variance = v[10];
    f.difference_entropy = v[11];
    f.imc1 = v[12];
    f.imc2 = v[13];
    f.max_correlation_coefficient = v[14];
    f.autocorrelation = v[15];
    f.dissimilarity = v[16];
    f.cluster_shade = v[17];
    f.cluster_prominence = v[18];
    f.max_probability = v[19];
    f.inverse_difference_normalized = v[20];
    f.inverse_difference_moment_normalized = v[21];
    return f;
}

double HaralickFeatureSet::value(const std::string& name) const {
    const auto& names = feature_names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InputError("unknown Haralick feature '" + name + "'");
    return values()[static_cast<std::size_t>(it - names.begin())];
}

DirectionalSummary directional_summary(const QuantizedStack& q, const RoiMask& roi, int d,
                                       std::span<const Angle> angles, int threads) {
    if (angles.empty()) throw InputError("directional_summary: no angles given");
    DirectionalSummary out;
    out.angles.assign(angles.begin(), angles.end());
    out.per_angle.resize(angles.size());
    for (std::size_t a = 0; a < angles.size(); ++a) {
        const Tscm t = build_tscm(q, roi, d, angles[a], threads);
        out.per_angle[a] = haralick_features(t);
    }

    const std::size_t nf = HaralickFeatureSet::feature_names().size();
    std::vector<double> mean(nf, 0.0), lo(nf, 0.0), hi(nf, 0.0);
    for (std::size_t a = 0; a < out.per_angle.size(); ++a) {
        const auto vals = out.per_angle[a].values();
        for (std::size_t i = 0; i < nf; ++i) {
            mean[i] += vals[i];
            if (a == 0) {
                lo[i] = hi[i] = vals[i];
            } else {
                lo[i] = std::min(lo[i], vals[i]);
                hi[i] = std::max(hi[i], vals[i]);
            }
        }
    }
    for (std::size_t i = 0; i < nf; ++i) {
        mean[i] /= static_cast<double>(out.per_angle.size());
        hi[i] -= lo[i];
    }
    out.mean = HaralickFeatureSet::from_values(mean);
    out.range = HaralickFeatureSet::from_values(hi);
    return out;
}

std::vector<std::pair<std::string, double>> DirectionalSummary::named() const {
    std::vector<std::pair<std::string, double>> out;
    const auto& names = HaralickFeatureSet::feature_names();
    const auto mean_vals = mean.values();
    const auto range_vals = range.values();
    std::vector<std::vector<double>> angle_vals;
    for (const auto& s : per_angle) angle_vals.push_back(s.values());
    for (std::size_t i = 0; i < names.size(); ++i) {
        out.emplace_back("TSCM_" + names[i] + "_mean", mean_vals[i]);
        for (std::size_t a = 0; a < angles.size(); ++a)
            out.emplace_back("TSCM_" + names[i] + "_" + angle_suffix(angles[a]), angle_vals[a][i]);
        out.emplace_back("TSCM_" + names[i] + "_range", range_vals[i]);
    }
    return out;
}

namespace {

enum class MapKind { tscm, tspm, tsfos };

struct MapSpec {
    MapKind kind;
    std::string name; // bare feature name within its family
};

MapSpec resolve_feature_name(const std::string& feature_name, int n_channels) {
    const auto& haralick = HaralickFeatureSet::feature_names();
    std::string bare = feature_name;
    if (bare.rfind("TSCM_", 0) == 0) bare = bare.substr(5);
    if (std::find(haralick.begin(), haralick.end(), bare) != haralick.end())
        return {MapKind::tscm, bare};
    if (feature_name == "TSPM_entropy" || feature_name == "TSPM_uniformity" ||
        feature_name == "TSPM_mutual_information") {
        if (feature_name == "TSPM_mutual_information" && n_channels < 2)
            throw InputError("TSPM_mutual_information map needs at least 2 channels");
        return {MapKind::tspm, feature_name.substr(5)};
    }
    if (feature_name.rfind("TSFOS_", 0) == 0) {
        TsfosFeatures probe{};
        for (const auto& [n, v] : probe.named())
            if (n == feature_name) return {MapKind::tsfos, feature_name};
    }
    throw InputError("unknown feature name '" + feature_name + "'");
}

double tsfos_named_value(const TsfosFeatures& f, const std::string& name) {
    for (const auto& [n, v] : f.named())
        if (n == name) return v;
    throw InputError("unknown TSFOS feature '" + name + "'");
}

} // namespace

FeatureMapVolume feature_map(const QuantizedStack& q, const RoiMask& roi,
                             const std::string& feature_name, int window_radius, int d,
                             int threads) {
    if (window_radius < 1) throw InputError("feature_map: window_radius must be >= 1");
    if (!(roi.dims == q.dims)) throw InputError("feature_map: ROI dims do not match stack dims");
    const MapSpec spec = resolve_feature_name(feature_name, q.channel_count());

    FeatureMapVolume map;
    map.dims = q.dims;
    map.window_radius = window_radius;
    map.feature_name = feature_name;
    map.values.assign(q.dims.voxel_count(), FeatureMapVolume::sentinel());

    const int g = q.g;
    const int n_channels = q.channel_count();
    const int w = window_radius;

    parallel_for_blocks(static_cast<std::size_t>(q.dims.nz), threads,
                        [&](std::size_t zlo, std::size_t zhi, int) {
        std::vector<std::uint64_t> raw(static_cast<std::size_t>(g) * g);
        std::vector<std::size_t> win_idx;
        std::vector<std::uint16_t> win_levels;
        std::vector<float> win_values;
        for (int z = static_cast<int>(zlo); z < static_cast<int>(zhi); ++z) {
            for (int y = 0; y < q.dims.ny; ++y) {
                for (int x = 0; x < q.dims.nx; ++x) {
                    const std::size_t center = q.dims.index(x, y, z);
                    if (!roi.inside[center]) continue;
                    const std::array<int, 3> lo{std::max(0, x - w), std::max(0, y - w),
                                                std::max(0, z - w)};
                    const std::array<int, 3> hi{std::min(q.dims.nx - 1, x + w),
                                                std::min(q.dims.ny - 1, y + w),
                                                std::min(q.dims.nz - 1, z + w)};
                    win_idx.clear();
                    for (int wz = lo[2]; wz <= hi[2]; ++wz)
                        for (int wy = lo[1]; wy <= hi[1]; ++wy)
                            for (int wx = lo[0]; wx <= hi[0]; ++wx) {
                                const std::size_t i = q.dims.index(wx, wy, wz);
                                if (roi.inside[i]) win_idx.push_back(i);
                            }
                    if (win_idx.size() < 2) continue;

                    double value = FeatureMapVolume::sentinel();
                    if (spec.kind == MapKind::tscm) {
                        double acc = 0.0;
                        int n_angles = 0;
                        for (Angle a : kAllAngles) {
                            std::fill(raw.begin(), raw.end(), 0);
                            std::uint64_t inc = 0;
                            accumulate_pairs(q, roi, d, a, lo, hi, lo[2], hi[2] + 1, raw, inc);
                            if (inc == 0) continue;
                            std::vector<std::uint64_t> copy = raw;
                            Tscm t = finish_tscm(q, d, a, std::move(copy), inc);
                            acc += haralick_features(t).value(spec.name);
                            ++n_angles;
                        }
                        if (n_angles > 0) value = acc / n_angles;
                    } else if (spec.kind == MapKind::tspm) {
                        win_levels.clear();
                        std::vector<std::size_t> positions(win_idx.begin(), win_idx.end());
                        for (std::size_t i : win_idx)
                            for (int c = 0; c < n_channels; ++c) win_levels.push_back(q.levels[c][i]);
                        SignatureList sigs(n_channels, std::move(positions),
                                           std::vector<std::uint16_t>(win_levels));
                        std::vector<int> full(static_cast<std::size_t>(n_channels));
                        std::iota(full.begin(), full.end(), 0);
                        const Tspm t = build_tspm(sigs, g, full);
                        if (spec.name == "entropy") value = tspm_entropy(t);
                        else if (spec.name == "uniformity") value = tspm_uniformity(t);
                        else value = tspm_mutual_information(t);
                    } else {
                        // TSFOS over the window, quantized levels as values
                        VolumeStack win_stack;
                        win_stack.dims = {static_cast<int>(win_idx.size()), 1, 1};
                        RoiMask win_roi;
                        win_roi.dims = win_stack.dims;
                        win_roi.inside.assign(win_idx.size(), 1);
                        for (int c = 0; c < n_channels; ++c) {
                            Channel ch;
                            ch.name = q.channel_names[c];
                            ch.voxels.reserve(win_idx.size());
                            for (std::size_t i : win_idx)
                                ch.voxels.push_back(static_cast<float>(q.levels[c][i]));
                            win_stack.channels.push_back(std::move(ch));
                        }
                        const auto tsh =
                            build_tsh(win_stack, win_roi, g, TshNormalization::per_channel);
                        value = tsfos_named_value(tsfos_features(tsh), spec.name);
                    }
                    map.values[center] = static_cast<float>(value);
                }
            }
        }
    });
    return map;
}

void write_feature_map(const FeatureMapVolume& map, const std::filesystem::path& prefix) {
    write_raw_volume(map.values, prefix.string() + ".raw");
    nlohmann::json j;
    j["feature"] = map.feature_name;
    j["window_radius"] = map.window_radius;
    j["dims"] = {map.dims.nx, map.dims.ny, map.dims.nz};
    j["format"] = "raw_f32_le";
    j["sentinel"] = "NaN";
    std::ofstream out(prefix.string() + ".json", std::ios::trunc);
    if (!out) throw InputError("cannot write feature-map sidecar: " + prefix.string() + ".json");
    out << j.dump(2) << "\n";
}

} // namespace mprad
