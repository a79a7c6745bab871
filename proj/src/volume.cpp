#include "mprad/volume.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mprad/errors.hpp"
#include "mprad/kernels.hpp"
#include "mprad/parallel.hpp"

namespace mprad {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_dims(const GridDims& d, const std::string& what) {
    if (d.nx < 1 || d.ny < 1 || d.nz < 1)
        throw InputError(what + ": dims must be positive, got [" + std::to_string(d.nx) + "," +
                         std::to_string(d.ny) + "," + std::to_string(d.nz) + "]");
}

std::uint64_t file_size_or_throw(const fs::path& p) {
    std::error_code ec;
    const auto sz = fs::file_size(p, ec);
    if (ec) throw InputError("cannot stat file: " + p.string());
    return sz;
}

// Payloads are little-endian on disk regardless of host order.
std::vector<float> read_f32_le(const fs::path& p, std::size_t count) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open volume file: " + p.string());
    std::vector<std::uint8_t> bytes(count * 4);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw InputError("short read from volume file: " + p.string());
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(bytes[4 * i]) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
        out[i] = std::bit_cast<float>(u);
    }
    return out;
}

void write_f32_le(std::span<const float> values, const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open file for writing: " + p.string());
    std::vector<std::uint8_t> bytes(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t u = std::bit_cast<std::uint32_t>(values[i]);
        bytes[4 * i] = static_cast<std::uint8_t>(u & 0xff);
        bytes[4 * i + 1] = static_cast<std::uint8_t>((u >> 8) & 0xff);
        bytes[4 * i + 2] = static_cast<std::uint8_t>((u >> 16) & 0xff);
        bytes[4 * i + 3] = static_cast<std::uint8_t>((u >> 24) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("short write to file: " + p.string());
}

} // namespace

std::size_t RoiMask::inside_count() const {
    std::size_t n = 0;
    for (auto b : inside) n += (b != 0);
    return n;
}

SignatureList::SignatureList(int n_channels, std::vector<std::size_t> positions,
                             std::vector<std::uint16_t> levels)
    : n_channels_(n_channels), positions_(std::move(positions)), levels_(std::move(levels)) {}

std::vector<float> read_raw_volume(const fs::path& path, const GridDims& dims) {
    check_dims(dims, "read_raw_volume");
    const std::size_t count = dims.voxel_count();
    if (file_size_or_throw(path) != count * 4)
        throw InputError("volume file size mismatch: " + path.string() + " holds " +
                         std::to_string(file_size_or_throw(path) / 4) + " voxels, dims expect " +
                         std::to_string(count));
    return read_f32_le(path, count);
}

void write_raw_volume(std::span<const float> voxels, const fs::path& path) {
    write_f32_le(voxels, path);
}

VolumeStack load_stack(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw InputError("cannot open manifest: " + manifest_path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    VolumeStack stack;
    try {
        const auto& dims = j.at("dims");
        stack.dims = {dims.at(0).get<int>(), dims.at(1).get<int>(), dims.at(2).get<int>()};
        if (j.contains("spacing")) {
            const auto& sp = j.at("spacing");
            stack.spacing = {sp.at(0).get<double>(), sp.at(1).get<double>(), sp.at(2).get<double>()};
        }
        check_dims(stack.dims, "manifest " + manifest_path.string());
        const auto base = manifest_path.parent_path();
        std::set<std::string> seen;
        for (const auto& jc : j.at("channels")) {
            Channel ch;
            ch.name = jc.at("name").get<std::string>();
            if (ch.name.empty())
                throw InputError("manifest " + manifest_path.string() + ": empty channel name");
            if (!seen.insert(ch.name).second)
                throw InputError("manifest " + manifest_path.string() + ": duplicate channel name '" +
                                 ch.name + "'");
            const fs::path vp = base / jc.at("path").get<std::string>();
            ch.voxels = read_raw_volume(vp, stack.dims);
            for (std::size_t i = 0; i < ch.voxels.size(); ++i)
                if (!std::isfinite(ch.voxels[i]))
                    throw InputError("non-finite voxel in channel '" + ch.name + "' at linear index " +
                                     std::to_string(i));
            stack.channels.push_back(std::move(ch));
        }
    } catch (const json::exception& e) {
        throw InputError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (stack.channels.empty())
        throw InputError("manifest " + manifest_path.string() + ": no channels");
    return stack;
}

std::filesystem::path save_stack(const VolumeStack& stack, const fs::path& manifest_path) {
    check_dims(stack.dims, "save_stack");
    const auto base = manifest_path.parent_path();
    if (!base.empty()) fs::create_directories(base);
    json j;
    j["dims"] = {stack.dims.nx, stack.dims.ny, stack.dims.nz};
    j["spacing"] = {stack.spacing[0], stack.spacing[1], stack.spacing[2]};
    j["channels"] = json::array();
    for (const auto& ch : stack.channels) {
        const std::string fname = ch.name + ".raw";
        write_f32_le(ch.voxels, base / fname);
        j["channels"].push_back({{"name", ch.name}, {"path", fname}});
    }
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw InputError("cannot write manifest: " + manifest_path.string());
    out << j.dump(2) << "\n";
    return manifest_path;
}

RoiMask load_mask(const fs::path& path, const GridDims& expected_dims) {
    check_dims(expected_dims, "load_mask");
    const std::size_t count = expected_dims.voxel_count();
    if (file_size_or_throw(path) != count)
        throw InputError("mask file size mismatch: " + path.string() + " holds " +
                         std::to_string(file_size_or_throw(path)) + " bytes, dims expect " +
                         std::to_string(count));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open mask file: " + path.string());
    RoiMask mask;
    mask.dims = expected_dims;
    mask.inside.resize(count);
    in.read(reinterpret_cast<char*>(mask.inside.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw InputError("short read from mask file: " + path.string());
    mask.label = path.stem().string();
    if (mask.inside_count() == 0) throw InputError("empty mask: " + path.string());
    return mask;
}

void save_mask(const RoiMask& mask, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open mask file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(mask.inside.data()),
              static_cast<std::streamsize>(mask.inside.size()));
    if (!out) throw InputError("short write to mask file: " + path.string());
}

QuantizedStack quantize(const VolumeStack& stack, const RoiMask& roi, int g, int threads) {
    if (g < 2) throw InputError("quantize: G must be >= 2, got " + std::to_string(g));
    if (!(roi.dims == stack.dims)) throw InputError("quantize: ROI dims do not match stack dims");

    // Gather in-ROI linear indices once; shared by every channel.
    std::vector<std::size_t> roi_idx;
    roi_idx.reserve(roi.inside.size());
    for (std::size_t i = 0; i < roi.inside.size(); ++i)
        if (roi.inside[i]) roi_idx.push_back(i);
    if (roi_idx.empty()) throw InputError("quantize: empty ROI");

    QuantizedStack q;
    q.dims = stack.dims;
    q.g = g;
    q.channel_names.resize(stack.channels.size());
    q.per_channel_range.resize(stack.channels.size());
    q.levels.assign(stack.channels.size(),
                    std::vector<std::uint16_t>(stack.dims.voxel_count(), QuantizedStack::kOutsideRoi));

    parallel_for_blocks(stack.channels.size(), threads, [&](std::size_t lo, std::size_t hi, int) {
        std::vector<float> gathered(roi_idx.size());
        std::vector<std::uint16_t> binned(roi_idx.size());
        for (std::size_t c = lo; c < hi; ++c) {
            const auto& vox = stack.channels[c].voxels;
            for (std::size_t i = 0; i < roi_idx.size(); ++i) gathered[i] = vox[roi_idx[i]];
            const auto mm = kernels::min_max(gathered);
            kernels::bin_levels(gathered, mm.lo, mm.hi, g, binned);
            q.channel_names[c] = stack.channels[c].name;
            q.per_channel_range[c] = {mm.lo, mm.hi};
            auto& lv = q.levels[c];
            for (std::size_t i = 0; i < roi_idx.size(); ++i) lv[roi_idx[i]] = binned[i];
        }
    });
    return q;
}

SignatureList extract_signatures(const QuantizedStack& q, const RoiMask& roi) {
    if (!(roi.dims == q.dims)) throw InputError("extract_signatures: ROI dims do not match stack dims");
    const int n = q.channel_count();
    std::vector<std::size_t> positions;
    std::vector<std::uint16_t> levels;
    positions.reserve(roi.inside_count());
    levels.reserve(roi.inside_count() * static_cast<std::size_t>(n));
    // Raster order (x fastest) == ascending linear index.
    for (std::size_t i = 0; i < roi.inside.size(); ++i) {
        if (!roi.inside[i]) continue;
        positions.push_back(i);
        for (int c = 0; c < n; ++c) levels.push_back(q.levels[c][i]);
    }
    return SignatureList(n, std::move(positions), std::move(levels));
}

} // namespace mprad
