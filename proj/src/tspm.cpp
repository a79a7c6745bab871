#include "mprad/tspm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "mprad/errors.hpp"
#include "mprad/parallel.hpp"

namespace mprad {

namespace {

struct Cells {
    std::vector<std::uint16_t> keys;
    std::vector<std::uint64_t> counts;
};

// Sort flat (record x arity) keys lexicographically and merge equal keys,
// summing per-record counts. An empty `counts` means one occurrence per
// record. Keys that fit into 64 bits (arity * bit_width(g) <= 64) take the
// packed fast path.
Cells sort_and_merge(std::size_t arity, int g, const std::vector<std::uint16_t>& flat,
                     const std::vector<std::uint64_t>& counts) {
    const std::size_t n = flat.size() / arity;
    Cells out;
    if (n == 0) return out;

    const unsigned bits = std::bit_width(static_cast<unsigned>(g));
    if (arity * bits <= 64) {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> packed(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t key = 0;
            const std::uint16_t* k = flat.data() + i * arity;
            for (std::size_t a = 0; a < arity; ++a) key = (key << bits) | k[a];
            packed[i] = {key, counts.empty() ? 1 : counts[i]};
        }
        std::sort(packed.begin(), packed.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        out.keys.reserve(n * arity);
        for (std::size_t i = 0; i < n;) {
            std::uint64_t c = 0;
            std::size_t j = i;
            while (j < n && packed[j].first == packed[i].first) c += packed[j++].second;
            std::uint64_t key = packed[i].first;
            const std::size_t base = out.keys.size();
            out.keys.resize(base + arity);
            for (std::size_t a = arity; a-- > 0;) {
                out.keys[base + a] = static_cast<std::uint16_t>(key & ((1u << bits) - 1));
                key >>= bits;
            }
            out.counts.push_back(c);
            i = j;
        }
        return out;
    }

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const auto cmp = [&](std::uint32_t a, std::uint32_t b) {
        return std::lexicographical_compare(flat.begin() + a * arity, flat.begin() + (a + 1) * arity,
                                            flat.begin() + b * arity, flat.begin() + (b + 1) * arity);
    };
    std::sort(order.begin(), order.end(), cmp);
    const auto eq = [&](std::uint32_t a, std::uint32_t b) {
        return std::equal(flat.begin() + a * arity, flat.begin() + (a + 1) * arity,
                          flat.begin() + b * arity);
    };
    for (std::size_t i = 0; i < n;) {
        std::uint64_t c = 0;
        std::size_t j = i;
        while (j < n && eq(order[i], order[j])) c += counts.empty() ? 1 : counts[order[j]], ++j;
        out.keys.insert(out.keys.end(), flat.begin() + order[i] * arity,
                        flat.begin() + (order[i] + 1) * arity);
        out.counts.push_back(c);
        i = j;
    }
    return out;
}

void check_subset(std::span<const int> subset, int n_channels, const char* op) {
    if (subset.empty()) throw InputError(std::string(op) + ": empty channel subset");
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (subset[i] < 0 || subset[i] >= n_channels)
            throw InputError(std::string(op) + ": channel index " + std::to_string(subset[i]) +
                             " out of range [0, " + std::to_string(n_channels) + ")");
        if (i > 0 && subset[i] <= subset[i - 1])
            throw InputError(std::string(op) + ": subset indices must be strictly increasing");
    }
}

} // namespace

Tspm::Tspm(int g, std::vector<int> channel_subset, std::vector<std::uint16_t> keys,
           std::vector<std::uint64_t> counts)
    : g_(g), channel_subset_(std::move(channel_subset)), keys_(std::move(keys)),
      counts_(std::move(counts)) {
    total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

Tspm build_tspm(const SignatureList& signatures, int g, std::span<const int> subset) {
    if (signatures.empty()) throw InputError("build_tspm: empty signature list");
    if (g < 1) throw InputError("build_tspm: G must be positive");
    check_subset(subset, signatures.channel_count(), "build_tspm");

    const std::size_t n = signatures.size();
    const std::size_t arity = subset.size();
    const std::size_t stride = static_cast<std::size_t>(signatures.channel_count());
    const auto flat_all = signatures.flat_levels();

    std::vector<std::uint16_t> flat(n * arity);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < arity; ++a) {
            const std::uint16_t lv = flat_all[i * stride + static_cast<std::size_t>(subset[a])];
            if (lv < 1 || lv > g)
                throw InputError("build_tspm: level " + std::to_string(lv) + " outside [1, " +
                                 std::to_string(g) + "]");
            flat[i * arity + a] = lv;
        }
    }
    auto cells = sort_and_merge(arity, g, flat, {});
    return Tspm(g, std::vector<int>(subset.begin(), subset.end()), std::move(cells.keys),
                std::move(cells.counts));
}

Tspm marginalize(const Tspm& t, std::span<const int> subset) {
    check_subset(subset, t.channel_subset().empty() ? 0 : t.channel_subset().back() + 1, "marginalize");
    // Map requested original channel indices to axis positions within t.
    std::vector<std::size_t> axes;
    axes.reserve(subset.size());
    for (int ch : subset) {
        const auto& cs = t.channel_subset();
        const auto it = std::find(cs.begin(), cs.end(), ch);
        if (it == cs.end())
            throw InputError("marginalize: channel " + std::to_string(ch) +
                             " not present in this Tspm");
        axes.push_back(static_cast<std::size_t>(it - cs.begin()));
    }

    const std::size_t arity = axes.size();
    const std::size_t cells_in = t.cell_count();
    std::vector<std::uint16_t> flat(cells_in * arity);
    std::vector<std::uint64_t> counts(cells_in);
    for (std::size_t c = 0; c < cells_in; ++c) {
        const auto key = t.key(c);
        for (std::size_t a = 0; a < arity; ++a) flat[c * arity + a] = key[axes[a]];
        counts[c] = t.count(c);
    }
    auto cells = sort_and_merge(arity, t.g(), flat, counts);
    return Tspm(t.g(), std::vector<int>(subset.begin(), subset.end()), std::move(cells.keys),
                std::move(cells.counts));
}

double tspm_entropy(const Tspm& t) {
    if (t.total() == 0) throw InputError("tspm_entropy: empty Tspm");
    const double total = static_cast<double>(t.total());
    double acc = 0.0;
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
        const double p = static_cast<double>(t.count(c)) / total;
        acc += p * std::log2(p);
    }
    return 0.0 - acc;
}

double tspm_uniformity(const Tspm& t) {
    if (t.total() == 0) throw InputError("tspm_uniformity: empty Tspm");
    const double total = static_cast<double>(t.total());
    double acc = 0.0;
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
        const double p = static_cast<double>(t.count(c)) / total;
        acc += p * p;
    }
    return acc;
}

double tspm_mutual_information(const Tspm& t) {
    const std::size_t m = t.arity();
    if (m < 2) throw InputError("tspm_mutual_information: need at least 2 channels");
    const auto cs = t.channel_subset();
    double mi = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        std::vector<int> sub;
        for (std::size_t a = 0; a < m; ++a)
            if (mask & (1u << a)) sub.push_back(cs[a]);
        const double h = (sub.size() == m) ? tspm_entropy(t) : tspm_entropy(marginalize(t, sub));
        // MI = -sum_S (-1)^|S| H(X_S)
        mi += (std::popcount(mask) % 2 == 1) ? h : -h;
    }
    return mi;
}

SubsetFeatureTable subset_features(const SignatureList& signatures, int g, int max_subset_size,
                                   int threads) {
    if (max_subset_size < 1) throw InputError("subset_features: max_subset_size must be >= 1");
    const int n = signatures.channel_count();
    const int cap = std::min(max_subset_size, n);

    std::vector<int> full(n);
    std::iota(full.begin(), full.end(), 0);
    const Tspm full_tspm = build_tspm(signatures, g, full);

    // Size-major, lexicographic within each size.
    std::vector<std::vector<int>> subsets;
    for (int s = 1; s <= cap; ++s) {
        std::vector<int> idx(s);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            subsets.push_back(idx);
            int a = s - 1;
            while (a >= 0 && idx[a] == n - s + a) --a;
            if (a < 0) break;
            ++idx[a];
            for (int b = a + 1; b < s; ++b) idx[b] = idx[b - 1] + 1;
        }
    }

    SubsetFeatureTable table;
    table.entries.resize(subsets.size());
    parallel_for_blocks(subsets.size(), threads, [&](std::size_t lo, std::size_t hi, int) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& sub = subsets[i];
            const Tspm marg = marginalize(full_tspm, sub);
            SubsetFeatures f;
            f.subset = sub;
            f.entropy = tspm_entropy(marg);
            f.uniformity = tspm_uniformity(marg);
            if (sub.size() >= 2) f.mutual_information = tspm_mutual_information(marg);
            table.entries[i] = std::move(f);
        }
    });
    return table;
}

std::string subset_descriptor(std::span<const int> subset, std::span<const std::string> channel_names) {
    std::string out;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) out += '+';
        out += channel_names[static_cast<std::size_t>(subset[i])];
    }
    return out;
}

} // namespace mprad
