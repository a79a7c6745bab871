#include "mprad/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mprad/errors.hpp"
#include "mprad/isosvm.hpp"
#include "mprad/stats.hpp"
#include "mprad/tspm.hpp"

namespace mprad {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json config_to_json_obj(const PipelineConfig& c) {
    json j;
    j["G"] = c.g;
    j["B"] = c.b;
    j["d"] = c.d;
    json angles = json::array();
    for (Angle a : c.angles) angles.push_back(std::stoi(angle_suffix(a)));
    j["angles"] = angles;
    j["max_subset_size"] = c.max_subset_size;
    j["isomap_k"] = c.isomap_k;
    j["isomap_dim"] = c.isomap_dim;
    j["svm_c"] = c.svm_c;
    j["seed"] = c.seed;
    j["normalization"] = to_string(c.normalization);
    return j;
}

PipelineConfig config_from_json_obj(const json& j) {
    PipelineConfig c;
    try {
        c.g = j.at("G").get<int>();
        c.b = j.at("B").get<int>();
        c.d = j.at("d").get<int>();
        c.angles.clear();
        for (const auto& a : j.at("angles")) c.angles.push_back(angle_from_degrees(a.get<int>()));
        c.max_subset_size = j.at("max_subset_size").get<int>();
        c.isomap_k = j.at("isomap_k").get<int>();
        c.isomap_dim = j.at("isomap_dim").get<int>();
        c.svm_c = j.at("svm_c").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.normalization = tsh_normalization_from_string(j.at("normalization").get<std::string>());
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed config: ") + e.what());
    }
    if (c.g < 2 || c.b < 2 || c.d < 1 || c.angles.empty() || c.max_subset_size < 0 ||
        c.isomap_k < 1 || c.isomap_dim < 1 || !(c.svm_c > 0.0))
        throw InputError("config values out of range");
    return c;
}

} // namespace

std::string PipelineConfig::to_json() const { return config_to_json_obj(*this).dump(); }

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed config: ") + e.what());
    }
    return config_from_json_obj(j);
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void PipelineConfig::save(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write config file: " + path.string());
    out << config_to_json_obj(*this).dump(2) << "\n";
}

PipelineConfig PipelineConfig::preset(const std::string& name) {
    PipelineConfig c;
    if (name == "grading") {
        c.g = 64;
        c.b = 64;
    } else if (name == "progression") {
        c.g = 16;
        c.b = 16;
    } else {
        throw InputError("unknown preset '" + name + "' (expected grading or progression)");
    }
    return c;
}

StudyFeatureVector extract_features(const VolumeStack& stack, const RoiMask& roi,
                                    const PipelineConfig& config, int threads) {
    const QuantizedStack q = quantize(stack, roi, config.g, threads);
    const SignatureList sigs = extract_signatures(q, roi);
    const int n = stack.channel_count();

    StudyFeatureVector row;
    const int cap = config.max_subset_size == 0 ? n : std::min(config.max_subset_size, n);
    const auto table = subset_features(sigs, config.g, cap, threads);
    for (const auto& entry : table.entries) {
        const std::string desc = subset_descriptor(entry.subset, q.channel_names);
        row.names.push_back("TSPM_" + desc + "_entropy");
        row.values.push_back(entry.entropy);
        row.names.push_back("TSPM_" + desc + "_uniformity");
        row.values.push_back(entry.uniformity);
        if (entry.mutual_information) {
            row.names.push_back("TSPM_" + desc + "_mutual_information");
            row.values.push_back(*entry.mutual_information);
        }
    }

    const auto tsh = build_tsh(stack, roi, config.b, config.normalization);
    for (const auto& [name, value] : tsfos_features(tsh).named()) {
        row.names.push_back(name);
        row.values.push_back(value);
    }

    const auto summary = directional_summary(q, roi, config.d, config.angles, threads);
    for (const auto& [name, value] : summary.named()) {
        row.names.push_back(name);
        row.values.push_back(value);
    }
    return row;
}

void write_feature_csv(const StudyFeatureVector& row, const PipelineConfig& config,
                       const std::vector<std::string>& channels, const fs::path& path) {
    json header;
    header["config"] = config_to_json_obj(config);
    header["channels"] = channels;
    header["study_id"] = row.study_id;
    if (row.label) header["label"] = *row.label;
    if (row.time_point) header["time_point"] = *row.time_point;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write feature file: " + path.string());
    out << "# mprad-features " << header.dump() << "\n";
    out << "study_id,label,time_point";
    for (const auto& name : row.names) out << "," << name;
    out << "\n";
    out << row.study_id << "," << (row.label ? *row.label : "") << ","
        << (row.time_point ? std::to_string(*row.time_point) : "");
    for (double v : row.values) out << "," << format_double(v);
    out << "\n";
    if (!out) throw InputError("short write to feature file: " + path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

StudyFeatureVector read_feature_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open feature file: " + path.string());
    std::string header_comment, header, data;
    if (!std::getline(in, header_comment) || !std::getline(in, header) || !std::getline(in, data))
        throw InputError("feature file truncated: " + path.string());
    if (header_comment.rfind("# mprad-features ", 0) != 0)
        throw InputError("not a feature file (missing header): " + path.string());

    const auto cols = split_csv_line(header);
    const auto vals = split_csv_line(data);
    if (cols.size() != vals.size() || cols.size() < 4 || cols[0] != "study_id" ||
        cols[1] != "label" || cols[2] != "time_point")
        throw InputError("malformed feature file: " + path.string());

    StudyFeatureVector row;
    row.study_id = vals[0];
    if (!vals[1].empty()) row.label = vals[1];
    if (!vals[2].empty()) {
        try {
            row.time_point = std::stoi(vals[2]);
        } catch (...) {
            throw InputError("bad time_point in feature file: " + path.string());
        }
    }
    for (std::size_t i = 3; i < cols.size(); ++i) {
        row.names.push_back(cols[i]);
        try {
            row.values.push_back(std::stod(vals[i]));
        } catch (...) {
            throw InputError("bad numeric value for '" + cols[i] + "' in " + path.string());
        }
    }
    return row;
}

std::vector<StudyFeatureVector> read_cohort_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<StudyFeatureVector> rows;
    for (const auto& f : files) rows.push_back(read_feature_csv(f));
    return rows;
}

PhantomOutput cmd_phantom(const PhantomSpec& spec, const fs::path& out_dir) {
    return write_phantom(spec, out_dir);
}

StudyFeatureVector cmd_extract(const PipelineConfig& config, const fs::path& manifest_path,
                               const fs::path& mask_path, const fs::path& out_file,
                               const std::string& study_id,
                               const std::optional<std::string>& label,
                               std::optional<int> time_point, int threads) {
    const VolumeStack stack = load_stack(manifest_path);
    const RoiMask roi = load_mask(mask_path, stack.dims);
    StudyFeatureVector row = extract_features(stack, roi, config, threads);
    row.study_id = study_id;
    row.label = label;
    row.time_point = time_point;
    std::vector<std::string> channels;
    for (const auto& ch : stack.channels) channels.push_back(ch.name);
    write_feature_csv(row, config, channels, out_file);
    return row;
}

void cmd_classify(const PipelineConfig& config, const fs::path& cohort_dir,
                  const fs::path& out_report, int threads) {
    const auto rows = read_cohort_dir(cohort_dir);
    if (rows.size() < 4)
        throw InputError("classify: need at least 4 feature files, found " +
                         std::to_string(rows.size()));
    const auto loocv = loocv_isosvm(rows, config.isomap_k, config.isomap_dim, config.svm_c, threads);

    const auto scores = loocv.scores();
    const auto truth = loocv.true_labels01();
    const auto pred = loocv.predicted_labels01();
    const auto roc = roc_auc(scores, truth);
    const auto conf = confusion_metrics(pred, truth);

    json report;
    report["config"] = config_to_json_obj(config);
    report["n_studies"] = rows.size();
    report["classes"] = loocv.classes;
    report["positive_class"] = loocv.classes[1];
    report["standardization"] = {{"kept_features", loocv.standardization.feature_names.size()},
                                 {"warnings", loocv.standardization.warnings}};
    report["isomap"] = {{"k_requested", loocv.isomap.k_requested},
                        {"k_used", loocv.isomap.k_used},
                        {"embedding_dim_requested", loocv.isomap.embedding_dim_requested},
                        {"embedding_dim", loocv.isomap.embedding_dim},
                        {"adjustments", loocv.isomap.adjustments},
                        {"fit", "once on all studies (transductive, label-blind)"}};
    report["svm"] = {{"C", config.svm_c}};
    json per_study = json::array();
    for (const auto& p : loocv.predictions)
        per_study.push_back({{"study_id", p.study_id},
                             {"true_label", p.true_label},
                             {"predicted_label", p.predicted_label},
                             {"score", p.score}});
    report["per_study"] = per_study;
    report["metrics"] = {{"auc", roc.auc},
                         {"sensitivity", conf.sensitivity},
                         {"specificity", conf.specificity},
                         {"accuracy", conf.accuracy}};
    // thresholds[0] is +inf and serializes as null
    report["roc"] = {{"fpr", roc.fpr}, {"tpr", roc.tpr}, {"thresholds", roc.thresholds}};

    std::ofstream out(out_report, std::ios::trunc);
    if (!out) throw InputError("cannot write report: " + out_report.string());
    out << report.dump(2) << "\n";
}

void cmd_compare(const PipelineConfig& config, const fs::path& group_a_dir,
                 const fs::path& group_b_dir, const fs::path& out_csv) {
    (void)config;
    auto rows_a = read_cohort_dir(group_a_dir);
    auto rows_b = read_cohort_dir(group_b_dir);
    std::vector<StudyFeatureVector> cohort;
    for (auto& r : rows_a) {
        r.label = "A";
        cohort.push_back(std::move(r));
    }
    for (auto& r : rows_b) {
        r.label = "B";
        cohort.push_back(std::move(r));
    }
    const auto cmp = group_compare(cohort, "A", "B");
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw InputError("cannot write comparison CSV: " + out_csv.string());
    out << group_comparison_csv(cmp);
}

namespace {

std::map<std::string, std::string> read_labels_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open labels file: " + path.string());
    std::map<std::string, std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cols = split_csv_line(line);
        if (cols.size() != 2)
            throw InputError("labels file lines must be 'study_id,label': " + path.string());
        if (cols[0] == "study_id") continue; // header
        labels[cols[0]] = cols[1];
    }
    if (labels.empty()) throw InputError("labels file is empty: " + path.string());
    return labels;
}

} // namespace

void cmd_progression(const PipelineConfig& config, const fs::path& t1_dir, const fs::path& t2_dir,
                     const fs::path& labels_csv, const fs::path& out_dir) {
    (void)config;
    const auto rows_t1 = read_cohort_dir(t1_dir);
    const auto rows_t2 = read_cohort_dir(t2_dir);
    const auto labels = read_labels_csv(labels_csv);

    std::map<std::string, const StudyFeatureVector*> by_id_t2;
    for (const auto& r : rows_t2) by_id_t2[r.study_id] = &r;
    if (rows_t1.size() != rows_t2.size())
        throw InputError("progression: time-point cohorts differ in size (" +
                         std::to_string(rows_t1.size()) + " vs " + std::to_string(rows_t2.size()) +
                         ")");

    std::vector<StudyFeatureVector> deltas;
    for (const auto& r1 : rows_t1) {
        const auto it = by_id_t2.find(r1.study_id);
        if (it == by_id_t2.end())
            throw InputError("progression: study '" + r1.study_id + "' missing at time point 2");
        StudyFeatureVector d = delta_features(r1, *it->second);
        const auto lit = labels.find(r1.study_id);
        if (lit == labels.end())
            throw InputError("progression: study '" + r1.study_id + "' missing from labels file");
        d.label = lit->second;
        deltas.push_back(std::move(d));
    }

    std::vector<std::string> classes;
    for (const auto& d : deltas)
        if (std::find(classes.begin(), classes.end(), *d.label) == classes.end())
            classes.push_back(*d.label);
    std::sort(classes.begin(), classes.end());
    if (classes.size() != 2)
        throw InputError("progression: expected exactly 2 outcome labels, got " +
                         std::to_string(classes.size()));

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw InputError("progression: cannot create output directory " + out_dir.string());

    const auto cmp = group_compare(deltas, classes[0], classes[1]);
    {
        std::ofstream out(out_dir / "comparison.csv", std::ios::trunc);
        if (!out) throw InputError("cannot write comparison CSV");
        out << group_comparison_csv(cmp);
    }

    // single-feature ROC curves on the deltas (positive class = classes[1])
    json curves;
    curves["positive_class"] = classes[1];
    curves["negative_class"] = classes[0];
    json per_feature = json::array();
    const auto& names = deltas.front().names;
    for (std::size_t f = 0; f < names.size(); ++f) {
        std::vector<double> scores;
        std::vector<int> y;
        for (const auto& d : deltas) {
            scores.push_back(d.values[f]);
            y.push_back(*d.label == classes[1] ? 1 : 0);
        }
        const auto roc = roc_auc(scores, y);
        per_feature.push_back({{"feature", names[f]},
                               {"auc", roc.auc},
                               {"fpr", roc.fpr},
                               {"tpr", roc.tpr},
                               {"thresholds", roc.thresholds}});
    }
    curves["curves"] = per_feature;
    std::ofstream out(out_dir / "roc_curves.json", std::ios::trunc);
    if (!out) throw InputError("cannot write roc_curves.json");
    out << curves.dump(2) << "\n";
}

void cmd_feature_map(const PipelineConfig& config, const fs::path& manifest_path,
                     const fs::path& mask_path, const std::string& feature_name, int window_radius,
                     const fs::path& out_prefix, int threads) {
    const VolumeStack stack = load_stack(manifest_path);
    const RoiMask roi = load_mask(mask_path, stack.dims);
    const QuantizedStack q = quantize(stack, roi, config.g, threads);
    const auto map = feature_map(q, roi, feature_name, window_radius, config.d, threads);
    write_feature_map(map, out_prefix);
}

} // namespace mprad
