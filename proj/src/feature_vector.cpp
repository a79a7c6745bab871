#include "mprad/feature_vector.hpp"

#include <algorithm>

#include "mprad/errors.hpp"

namespace mprad {

double StudyFeatureVector::value(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw InputError("study '" + study_id + "' has no feature named '" + name + "'");
    return values[static_cast<std::size_t>(it - names.begin())];
}

bool StudyFeatureVector::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

StudyFeatureVector delta_features(const StudyFeatureVector& t1, const StudyFeatureVector& t2) {
    if (t1.study_id != t2.study_id)
        throw InputError("delta_features: study mismatch ('" + t1.study_id + "' vs '" +
                         t2.study_id + "')");
    if (t1.names != t2.names)
        throw InputError("delta_features: feature-name lists differ for study '" + t1.study_id +
                         "'");
    StudyFeatureVector d;
    d.study_id = t2.study_id;
    d.label = t2.label;
    d.time_point = t2.time_point;
    d.names = t2.names;
    d.values.resize(t2.values.size());
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = t2.values[i] - t1.values[i];
    return d;
}

} // namespace mprad
