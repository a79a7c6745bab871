#include "mprad/phantom.hpp"

#include <cmath>
#include <random>

#include "mprad/errors.hpp"

namespace mprad {

const char* to_string(TextureKind k) {
    return k == TextureKind::smooth ? "smooth" : "heterogeneous";
}

TextureKind texture_kind_from_string(const std::string& s) {
    if (s == "smooth") return TextureKind::smooth;
    if (s == "heterogeneous" || s == "hetero") return TextureKind::heterogeneous;
    throw InputError("unknown texture kind '" + s + "' (expected smooth or heterogeneous)");
}

namespace {

// splitmix64, used to derive independent stream seeds from (seed, salt)
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// mt19937_64 has a standard-specified sequence, so phantoms are reproducible
// across platforms; the uniform/normal transforms below avoid the
// implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * 3.14159265358979323846 * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Value noise: uniform [-1,1] lattice samples at `spacing` voxels,
// smoothstep-interpolated. Amplitude is O(1).
class ValueNoise {
public:
    ValueNoise(const GridDims& dims, int spacing, std::uint64_t seed) : spacing_(spacing) {
        nx_ = dims.nx / spacing + 2;
        ny_ = dims.ny / spacing + 2;
        nz_ = dims.nz / spacing + 2;
        lattice_.resize(static_cast<std::size_t>(nx_) * ny_ * nz_);
        Rng rng(seed);
        for (auto& v : lattice_) v = 2.0 * rng.uniform() - 1.0;
    }

    double at(int x, int y, int z) const {
        const double fx = static_cast<double>(x) / spacing_;
        const double fy = static_cast<double>(y) / spacing_;
        const double fz = static_cast<double>(z) / spacing_;
        const int ix = static_cast<int>(fx), iy = static_cast<int>(fy), iz = static_cast<int>(fz);
        const double tx = smooth(fx - ix), ty = smooth(fy - iy), tz = smooth(fz - iz);
        double acc = 0.0;
        for (int cz = 0; cz <= 1; ++cz)
            for (int cy = 0; cy <= 1; ++cy)
                for (int cx = 0; cx <= 1; ++cx) {
                    const double w = (cx ? tx : 1.0 - tx) * (cy ? ty : 1.0 - ty) * (cz ? tz : 1.0 - tz);
                    acc += w * lattice_[idx(ix + cx, iy + cy, iz + cz)];
                }
        return acc;
    }

private:
    static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
    std::size_t idx(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * ny_ + y) * nx_ + x;
    }
    int spacing_, nx_, ny_, nz_;
    std::vector<double> lattice_;
};

} // namespace

RoiMask generate_phantom_mask(const GridDims& dims) {
    RoiMask mask;
    mask.dims = dims;
    mask.label = "phantom_roi";
    mask.inside.assign(dims.voxel_count(), 0);
    const double cx = 0.5 * (dims.nx - 1);
    const double cy = 0.5 * (dims.ny - 1);
    const double cz = 0.5 * (dims.nz - 1);
    const double r = 0.42 * std::min({dims.nx, dims.ny, dims.nz});
    for (int z = 0; z < dims.nz; ++z)
        for (int y = 0; y < dims.ny; ++y)
            for (int x = 0; x < dims.nx; ++x) {
                const double dx = x - cx, dy = y - cy, dz = z - cz;
                if (dx * dx + dy * dy + dz * dz <= r * r)
                    mask.inside[dims.index(x, y, z)] = 1;
            }
    return mask;
}

VolumeStack generate_phantom_stack(const PhantomSpec& spec) {
    if (spec.n_channels < 1) throw InputError("phantom: need at least 1 channel");
    if (spec.dims.nx < 4 || spec.dims.ny < 4 || spec.dims.nz < 1)
        throw InputError("phantom: dims too small");

    const bool hetero = spec.kind == TextureKind::heterogeneous;
    const double noise = spec.noise_level > 0.0 ? spec.noise_level : (hetero ? 0.8 : 0.02);
    const GridDims dims = spec.dims;

    // anatomy shared by all channels; detail fields are per channel
    const int coarse = std::max(4, std::min({dims.nx, dims.ny, dims.nz}) / 4);
    const ValueNoise shared(dims, coarse, mix_seed(spec.seed, 1));
    const ValueNoise shared_mid(dims, 2, mix_seed(spec.seed, 2));

    // low-intensity core: jittered center, smooth edge
    Rng core_rng(mix_seed(spec.seed, 3));
    const double core_r = 0.22 * std::min({dims.nx, dims.ny, dims.nz});
    const double ccx = 0.5 * dims.nx + (core_rng.uniform() - 0.5) * 0.2 * dims.nx;
    const double ccy = 0.5 * dims.ny + (core_rng.uniform() - 0.5) * 0.2 * dims.ny;
    const double ccz = 0.5 * dims.nz + (core_rng.uniform() - 0.5) * 0.2 * dims.nz;

    VolumeStack stack;
    stack.dims = dims;
    stack.spacing = {1.0, 1.0, 1.0};
    for (int c = 0; c < spec.n_channels; ++c) {
        Channel ch;
        ch.name = "ch" + std::to_string(c + 1);
        ch.voxels.resize(dims.voxel_count());
        const ValueNoise detail(dims, 8, mix_seed(spec.seed, 100 + static_cast<std::uint64_t>(c)));
        Rng white(mix_seed(spec.seed, 200 + static_cast<std::uint64_t>(c)));
        const double ch_scale = 1.0 + 0.25 * c;
        const double ch_shift = 50.0 * c;
        std::size_t i = 0;
        for (int z = 0; z < dims.nz; ++z)
            for (int y = 0; y < dims.ny; ++y)
                for (int x = 0; x < dims.nx; ++x, ++i) {
                    double v = 0.8 * shared.at(x, y, z) + 0.4 * detail.at(x, y, z);
                    if (hetero) {
                        v += noise * white.normal();
                        v += 0.5 * noise * shared_mid.at(x, y, z);
                        const double dx = x - ccx, dy = y - ccy, dz = z - ccz;
                        const double rr = std::sqrt(dx * dx + dy * dy + dz * dz) / core_r;
                        if (rr < 1.0) {
                            const double edge = rr < 0.8 ? 1.0 : (1.0 - rr) / 0.2;
                            v -= 1.5 * edge;
                        }
                    } else {
                        v += noise * white.normal();
                    }
                    ch.voxels[i] = static_cast<float>(ch_shift + 100.0 * ch_scale * (v + 3.0));
                }
        stack.channels.push_back(std::move(ch));
    }
    return stack;
}

PhantomOutput write_phantom(const PhantomSpec& spec, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw InputError("phantom: cannot create output directory " + out_dir.string());
    const VolumeStack stack = generate_phantom_stack(spec);
    const RoiMask mask = generate_phantom_mask(spec.dims);
    PhantomOutput out;
    out.manifest = save_stack(stack, out_dir / "manifest.json");
    out.mask = out_dir / "mask.raw";
    save_mask(mask, out.mask);
    return out;
}

} // namespace mprad
