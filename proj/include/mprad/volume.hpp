#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mprad {

struct GridDims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    // Raster order: x fastest, then y, then z.
    std::size_t index(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * ny + y) * nx + x;
    }
    bool contains(int x, int y, int z) const {
        return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
    }
    bool operator==(const GridDims&) const = default;
};

struct Channel {
    std::string name;
    std::vector<float> voxels; // raster order, finite after load
};

// N co-registered scalar volumes on one voxel grid.
struct VolumeStack {
    GridDims dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0}; // mm, metadata only
    std::vector<Channel> channels;

    int channel_count() const { return static_cast<int>(channels.size()); }
};

struct RoiMask {
    GridDims dims;
    std::vector<std::uint8_t> inside; // nonzero = in ROI
    std::string label;

    std::size_t inside_count() const;
    bool in_roi(std::size_t linear) const { return inside[linear] != 0; }
};

// Stack after ROI-masked G-level quantization. Levels are 1-based; voxels
// outside the ROI hold kOutsideRoi.
struct QuantizedStack {
    static constexpr std::uint16_t kOutsideRoi = 0;

    GridDims dims;
    int g = 0;
    std::vector<std::string> channel_names;
    std::vector<std::pair<float, float>> per_channel_range; // in-ROI (min, max)
    std::vector<std::vector<std::uint16_t>> levels;         // [channel][voxel]

    int channel_count() const { return static_cast<int>(levels.size()); }
};

// One voxel's vector of quantized levels across channels. Non-owning view
// into a SignatureList.
struct TissueSignature {
    std::size_t position; // linear voxel index
    std::span<const std::uint16_t> levels;
};

// All in-ROI tissue signatures in fixed raster order, stored flat.
class SignatureList {
public:
    SignatureList() = default;
    SignatureList(int n_channels, std::vector<std::size_t> positions,
                  std::vector<std::uint16_t> levels);

    std::size_t size() const { return positions_.size(); }
    bool empty() const { return positions_.empty(); }
    int channel_count() const { return n_channels_; }

    TissueSignature operator[](std::size_t i) const {
        return {positions_[i],
                {levels_.data() + i * static_cast<std::size_t>(n_channels_),
                 static_cast<std::size_t>(n_channels_)}};
    }

    std::span<const std::uint16_t> flat_levels() const { return levels_; }
    std::span<const std::size_t> positions() const { return positions_; }

private:
    int n_channels_ = 0;
    std::vector<std::size_t> positions_;
    std::vector<std::uint16_t> levels_;
};

// --- on-disk format ---------------------------------------------------------
//
// Stack manifest: JSON with dims [nx,ny,nz], spacing [sx,sy,sz] and
// channels [{name, path}]. Channel payloads are raw little-endian float32 in
// raster order; masks are one byte per voxel, nonzero = inside. Paths are
// relative to the manifest's directory.

VolumeStack load_stack(const std::filesystem::path& manifest_path);

// Writes manifest plus one raw file per channel (<name>.raw) into the
// manifest's directory. Returns the manifest path.
std::filesystem::path save_stack(const VolumeStack& stack, const std::filesystem::path& manifest_path);

RoiMask load_mask(const std::filesystem::path& path, const GridDims& expected_dims);
void save_mask(const RoiMask& mask, const std::filesystem::path& path);

// Raw float32 volume payloads (also used for feature maps).
std::vector<float> read_raw_volume(const std::filesystem::path& path, const GridDims& dims);
void write_raw_volume(std::span<const float> voxels, const std::filesystem::path& path);

// --- operations -------------------------------------------------------------

// Per channel: min/max over in-ROI voxels only, then
// level = clamp(floor(g*(v-min)/(max-min)) + 1, 1, g); a constant channel
// maps to level 1 everywhere in the ROI.
QuantizedStack quantize(const VolumeStack& stack, const RoiMask& roi, int g, int threads = 1);

SignatureList extract_signatures(const QuantizedStack& q, const RoiMask& roi);

} // namespace mprad
