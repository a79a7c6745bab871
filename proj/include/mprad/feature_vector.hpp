#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mprad {

// Named, ordered scalar features for one ROI / time point.
struct StudyFeatureVector {
    std::string study_id;
    std::optional<std::string> label;
    std::optional<int> time_point;
    std::vector<std::string> names;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double value(const std::string& name) const;
    bool has(const std::string& name) const;
};

// Componentwise t2 - t1. Requires identical name lists and matching study_id;
// the label is taken from t2.
StudyFeatureVector delta_features(const StudyFeatureVector& t1, const StudyFeatureVector& t2);

} // namespace mprad
