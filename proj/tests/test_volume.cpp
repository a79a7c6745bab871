#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mprad/errors.hpp"
#include "mprad/phantom.hpp"
#include "mprad/volume.hpp"
#include "oracles.hpp"

using namespace mprad;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("mprad_volume_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& dir, const std::string& body) {
    std::ofstream out(dir / "manifest.json");
    out << body;
}

void write_raw(const fs::path& p, const std::vector<float>& v) {
    write_raw_volume(v, p);
}

} // namespace

TEST_CASE("load_stack reads a two-channel zero stack") {
    const auto dir = temp_dir("zeros");
    write_raw(dir / "a.raw", std::vector<float>(16, 0.f));
    write_raw(dir / "b.raw", std::vector<float>(16, 0.f));
    write_manifest(dir, R"({"dims":[4,4,1],"spacing":[1,1,1],
        "channels":[{"name":"a","path":"a.raw"},{"name":"b","path":"b.raw"}]})");
    const auto stack = load_stack(dir / "manifest.json");
    CHECK(stack.dims == GridDims{4, 4, 1});
    CHECK(stack.channel_count() == 2);
    CHECK(stack.channels[0].name == "a");
    CHECK(stack.channels[1].voxels.size() == 16);
}

TEST_CASE("load_stack rejects short files, duplicate names and non-finite voxels") {
    const auto dir = temp_dir("bad");
    write_raw(dir / "a.raw", std::vector<float>(16, 0.f));
    write_raw(dir / "b.raw", std::vector<float>(15, 0.f)); // one voxel short
    write_manifest(dir, R"({"dims":[4,4,1],"spacing":[1,1,1],
        "channels":[{"name":"a","path":"a.raw"},{"name":"b","path":"b.raw"}]})");
    CHECK_THROWS_AS(load_stack(dir / "manifest.json"), InputError);

    write_manifest(dir, R"({"dims":[4,4,1],"spacing":[1,1,1],
        "channels":[{"name":"a","path":"a.raw"},{"name":"a","path":"a.raw"}]})");
    CHECK_THROWS_AS(load_stack(dir / "manifest.json"), InputError);

    std::vector<float> with_nan(16, 0.f);
    with_nan[7] = std::numeric_limits<float>::quiet_NaN();
    write_raw(dir / "c.raw", with_nan);
    write_manifest(dir, R"({"dims":[4,4,1],"spacing":[1,1,1],
        "channels":[{"name":"c","path":"c.raw"}]})");
    CHECK_THROWS_AS(load_stack(dir / "manifest.json"), InputError);

    write_manifest(dir, R"({"dims":[4,4,1],"spacing":[1,1,1],
        "channels":[{"name":"missing","path":"nope.raw"}]})");
    CHECK_THROWS_AS(load_stack(dir / "manifest.json"), InputError);
}

TEST_CASE("stack save/load round-trips bit-exactly") {
    const auto dir = temp_dir("roundtrip");
    PhantomSpec spec;
    spec.dims = {16, 16, 16};
    spec.n_channels = 5;
    spec.kind = TextureKind::heterogeneous;
    spec.seed = 99;
    const auto stack = generate_phantom_stack(spec);
    const auto manifest = save_stack(stack, dir / "manifest.json");
    const auto loaded = load_stack(manifest);
    REQUIRE(loaded.channel_count() == stack.channel_count());
    for (int c = 0; c < stack.channel_count(); ++c) {
        CHECK(loaded.channels[c].name == stack.channels[c].name);
        REQUIRE(loaded.channels[c].voxels.size() == stack.channels[c].voxels.size());
        bool identical = true;
        for (std::size_t i = 0; i < stack.channels[c].voxels.size(); ++i)
            identical = identical && loaded.channels[c].voxels[i] == stack.channels[c].voxels[i];
        CHECK(identical);
    }
    // saving the loaded stack reproduces byte-identical payloads
    const auto dir2 = temp_dir("roundtrip2");
    save_stack(loaded, dir2 / "manifest.json");
    for (int c = 0; c < stack.channel_count(); ++c) {
        const auto name = stack.channels[c].name + ".raw";
        std::ifstream f1(dir / name, std::ios::binary);
        std::ifstream f2(dir2 / name, std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)), {});
        const std::string b2((std::istreambuf_iterator<char>(f2)), {});
        CHECK(b1 == b2);
    }
}

TEST_CASE("load_mask counts inside voxels and rejects empty masks") {
    const auto dir = temp_dir("mask");
    const GridDims dims{4, 4, 1};

    {
        std::ofstream out(dir / "ones.raw", std::ios::binary);
        const std::vector<char> ones(16, 1);
        out.write(ones.data(), 16);
    }
    CHECK(load_mask(dir / "ones.raw", dims).inside_count() == 16);

    {
        std::ofstream out(dir / "zeros.raw", std::ios::binary);
        const std::vector<char> zeros(16, 0);
        out.write(zeros.data(), 16);
    }
    CHECK_THROWS_AS(load_mask(dir / "zeros.raw", dims), InputError);

    {
        std::ofstream out(dir / "checker.raw", std::ios::binary);
        std::vector<char> checker(16);
        for (int i = 0; i < 16; ++i) checker[i] = static_cast<char>((i / 4 + i % 4) % 2);
        out.write(checker.data(), 16);
    }
    CHECK(load_mask(dir / "checker.raw", dims).inside_count() == 8);

    CHECK_THROWS_AS(load_mask(dir / "ones.raw", GridDims{4, 4, 2}), InputError);
}

TEST_CASE("quantize applies the binning formula over in-ROI values") {
    VolumeStack stack;
    stack.dims = {4, 1, 1};
    stack.channels.push_back({"v", {0.f, 1.f, 2.f, 3.f}});
    const auto roi = oracle::full_mask(stack.dims);

    const auto q = quantize(stack, roi, 4);
    CHECK(q.levels[0] == std::vector<std::uint16_t>{1, 2, 3, 4});
    CHECK(q.per_channel_range[0].first == 0.f);
    CHECK(q.per_channel_range[0].second == 3.f);

    // constant channel degenerates to level 1
    VolumeStack flat;
    flat.dims = {4, 1, 1};
    flat.channels.push_back({"v", {5.f, 5.f, 5.f, 5.f}});
    const auto qf = quantize(flat, roi, 64);
    CHECK(qf.levels[0] == std::vector<std::uint16_t>{1, 1, 1, 1});

    CHECK_THROWS_AS(quantize(stack, roi, 1), InputError);
}

TEST_CASE("quantization range comes from in-ROI voxels only") {
    VolumeStack stack;
    stack.dims = {4, 1, 1};
    stack.channels.push_back({"v", {-1000.f, 0.f, 3.f, 1000.f}}); // extremes masked out
    RoiMask roi;
    roi.dims = stack.dims;
    roi.inside = {0, 1, 1, 0};
    const auto q = quantize(stack, roi, 4);
    CHECK(q.per_channel_range[0].first == 0.f);
    CHECK(q.per_channel_range[0].second == 3.f);
    CHECK(q.levels[0][0] == QuantizedStack::kOutsideRoi);
    CHECK(q.levels[0][1] == 1);
    CHECK(q.levels[0][2] == 4);
    CHECK(q.levels[0][3] == QuantizedStack::kOutsideRoi);
}

TEST_CASE("quantization is monotone and affine-invariant") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> u(-10.f, 10.f);
    VolumeStack stack;
    stack.dims = {8, 8, 2};
    Channel ch{"v", {}};
    ch.voxels.resize(stack.dims.voxel_count());
    for (auto& v : ch.voxels) v = u(rng);
    stack.channels.push_back(ch);
    const auto roi = oracle::full_mask(stack.dims);
    const auto q = quantize(stack, roi, 16);

    // monotone: sort voxels by value, levels must be non-decreasing
    std::vector<std::size_t> order(ch.voxels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ch.voxels[a] < ch.voxels[b]; });
    for (std::size_t i = 1; i < order.size(); ++i)
        CHECK(q.levels[0][order[i - 1]] <= q.levels[0][order[i]]);

    // affine rescale with a > 0 leaves levels identical
    VolumeStack scaled = stack;
    for (auto& v : scaled.channels[0].voxels) v = 2.5f * v + 40.f;
    const auto q2 = quantize(scaled, roi, 16);
    CHECK(q.levels[0] == q2.levels[0]);
}

TEST_CASE("extract_signatures walks the ROI in raster order") {
    QuantizedStack q;
    q.dims = {2, 2, 1};
    q.g = 4;
    q.channel_names = {"a", "b"};
    q.per_channel_range = {{0, 1}, {0, 1}};
    q.levels = {{1, 2, 3, 4}, {4, 3, 2, 1}};
    const auto roi = oracle::full_mask(q.dims);

    const auto sigs = extract_signatures(q, roi);
    REQUIRE(sigs.size() == 4);
    CHECK(sigs.channel_count() == 2);
    // raster order: (0,0), (1,0), (0,1), (1,1)
    const std::vector<std::vector<std::uint16_t>> expected{{1, 4}, {2, 3}, {3, 2}, {4, 1}};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(sigs[i].position == i);
        CHECK(std::vector<std::uint16_t>(sigs[i].levels.begin(), sigs[i].levels.end()) ==
              expected[i]);
    }
}

TEST_CASE("extract_signatures output length equals the inside-voxel count") {
    std::mt19937_64 rng(21);
    const GridDims dims{5, 4, 3};
    const auto q = oracle::random_quantized_stack(rng, dims, 3, 4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto roi = oracle::random_mask(rng, dims, 0.5, 1);
        CHECK(extract_signatures(q, roi).size() == roi.inside_count());
    }
}

TEST_CASE("single-channel signatures equal the voxel levels") {
    std::mt19937_64 rng(3);
    const GridDims dims{3, 3, 1};
    const auto q = oracle::random_quantized_stack(rng, dims, 1, 5);
    const auto roi = oracle::full_mask(dims);
    const auto sigs = extract_signatures(q, roi);
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        CHECK(sigs[i].levels.size() == 1);
        CHECK(sigs[i].levels[0] == q.levels[0][i]);
    }
}
