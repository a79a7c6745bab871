#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mprad/volume.hpp"

namespace mprad {

enum class TextureKind {
    smooth,       // low-spatial-frequency field, low noise
    heterogeneous // same field plus multi-scale speckle and a low-intensity core
};

const char* to_string(TextureKind k);
TextureKind texture_kind_from_string(const std::string& s);

struct PhantomSpec {
    std::string label;           // class tag recorded with the study
    GridDims dims{32, 32, 32};
    int n_channels = 3;
    TextureKind kind = TextureKind::smooth;
    double noise_level = 0.0;    // <= 0 picks the kind's default
    std::uint64_t seed = 0;
};

struct PhantomOutput {
    std::filesystem::path manifest;
    std::filesystem::path mask;
};

// Build the phantom in memory. The mask is a centered ball. Same spec, same
// seed: bit-identical volumes (mt19937_64 with fixed-draw transforms).
VolumeStack generate_phantom_stack(const PhantomSpec& spec);
RoiMask generate_phantom_mask(const GridDims& dims);

// Write manifest + channel payloads + mask.raw into out_dir.
PhantomOutput write_phantom(const PhantomSpec& spec, const std::filesystem::path& out_dir);

} // namespace mprad
