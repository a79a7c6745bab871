#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mprad/volume.hpp"

namespace mprad {

// Sparse joint histogram of quantized tissue signatures restricted to an
// ordered channel subset. Cells are kept key-sorted so every reduction over
// them is deterministic.
class Tspm {
public:
    Tspm(int g, std::vector<int> channel_subset, std::vector<std::uint16_t> keys,
         std::vector<std::uint64_t> counts);

    int g() const { return g_; }
    std::span<const int> channel_subset() const { return channel_subset_; }
    std::size_t arity() const { return channel_subset_.size(); }
    std::size_t cell_count() const { return counts_.size(); }
    std::uint64_t total() const { return total_; }

    std::span<const std::uint16_t> key(std::size_t cell) const {
        return {keys_.data() + cell * arity(), arity()};
    }
    std::uint64_t count(std::size_t cell) const { return counts_[cell]; }

private:
    int g_;
    std::vector<int> channel_subset_; // strictly increasing original channel indices
    std::vector<std::uint16_t> keys_; // cell_count * arity, lexicographically sorted
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_;
};

// counts[key] = number of signatures whose restriction to `subset` equals key.
Tspm build_tspm(const SignatureList& signatures, int g, std::span<const int> subset);

// Sum counts over the dropped axes; `subset` is given in original channel
// indices and must be contained in t.channel_subset().
Tspm marginalize(const Tspm& t, std::span<const int> subset);

// Shannon entropy in bits, -sum p log2 p with p = count/total.
double tspm_entropy(const Tspm& t);

// sum p^2, in (0, 1].
double tspm_uniformity(const Tspm& t);

// Inclusion-exclusion over joint entropies of every non-empty sub-subset:
// MI = -sum_S (-1)^|S| H(X_S). Reduces to H(X1)+H(X2)-H(X1,X2) for two
// channels; for three or more this is the interaction information and may be
// negative.
double tspm_mutual_information(const Tspm& t);

struct SubsetFeatures {
    std::vector<int> subset; // original channel indices
    double entropy;
    double uniformity;
    std::optional<double> mutual_information; // present for |subset| >= 2
};

struct SubsetFeatureTable {
    std::vector<SubsetFeatures> entries; // size-major, then lexicographic
};

// Features for every non-empty channel subset of size <= max_subset_size.
// One full-arity Tspm is built from the signatures; everything else comes
// from marginalize.
SubsetFeatureTable subset_features(const SignatureList& signatures, int g, int max_subset_size,
                                   int threads = 1);

// "a+b+c" descriptor for a subset, used in exported feature names.
std::string subset_descriptor(std::span<const int> subset, std::span<const std::string> channel_names);

} // namespace mprad
