#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "support/test_helpers.hpp"
#include "svmedge/synth.hpp"

using namespace svmedge;

TEST_CASE("noise-free vertical patch has the expected structure") {
    PatchSpec spec;
    spec.size = 16;
    spec.orientation = Orientation::Vertical;
    spec.noise_amp = 0.0;
    spec.seed = 1;
    const LabeledPatch patch = generate_patch(spec);

    const std::uint8_t dark = patch.image.at(0, 0);
    const std::uint8_t bright = patch.image.at(0, 15);
    CHECK(dark == static_cast<std::uint8_t>(std::lround(0.25 * 255)));
    CHECK(bright == static_cast<std::uint8_t>(std::lround(0.50 * 255)));
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c)
            CHECK(patch.image.at(r, c) == (c < 8 ? dark : bright));

    // edge pixels are exactly the two boundary columns
    CHECK(patch.positives() == 32);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c)
            CHECK((patch.labels(r, c) > 0) == (c == 7 || c == 8));
}

TEST_CASE("patch generation is deterministic under the seed") {
    PatchSpec spec;
    spec.seed = 77;
    const LabeledPatch a = generate_patch(spec);
    const LabeledPatch b = generate_patch(spec);
    CHECK(a.image == b.image);
    CHECK(a.labels == b.labels);

    PatchSpec other = spec;
    other.seed = 78;
    CHECK_FALSE(generate_patch(other).image == a.image);
}

TEST_CASE("intensities stay inside the configured band") {
    PatchSpec spec;
    spec.mean_diff = 0.25;
    spec.noise_amp = 0.03;
    spec.seed = 5;
    const LabeledPatch patch = generate_patch(spec);
    // half a quantization step of slack on top of the analytic band
    const double lo = (0.25 - 0.03) - 0.5 / 255.0;
    const double hi = (0.25 + 0.25 + 0.03) + 0.5 / 255.0;
    for (auto v : patch.image.pixels()) {
        const double x = v / 255.0;
        CHECK(x >= lo);
        CHECK(x <= hi);
    }
}

namespace {

// Enumeration oracle for the positive count: walk every pixel and re-derive
// the crossing test from the zone predicate alone.
int count_boundary_pixels(Orientation o, int size) {
    int count = 0;
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) {
            const bool zone = in_dark_zone(o, size, r, c);
            bool crossing = false;
            if (r > 0 && in_dark_zone(o, size, r - 1, c) != zone) crossing = true;
            if (r + 1 < size && in_dark_zone(o, size, r + 1, c) != zone) crossing = true;
            if (c > 0 && in_dark_zone(o, size, r, c - 1) != zone) crossing = true;
            if (c + 1 < size && in_dark_zone(o, size, r, c + 1) != zone) crossing = true;
            count += crossing;
        }
    return count;
}

} // namespace

TEST_CASE("edge-pixel counts match the enumeration oracle") {
    for (int size : {8, 16, 17, 64}) {
        CHECK(count_boundary_pixels(Orientation::Vertical, size) == 2 * size);
        CHECK(count_boundary_pixels(Orientation::Horizontal, size) == 2 * size);
        for (Orientation o : {Orientation::Vertical, Orientation::Horizontal,
                              Orientation::DiagonalMain, Orientation::DiagonalAnti}) {
            PatchSpec spec;
            spec.size = size;
            spec.orientation = o;
            spec.seed = 3;
            const LabeledPatch patch = generate_patch(spec);
            CHECK(patch.positives() == count_boundary_pixels(o, size));
            CHECK(patch.positives() > 0);
            CHECK(patch.positives() < size * size); // both labels present
        }
    }
}

TEST_CASE("build_training_set extracts one sample per interior pixel") {
    PatchSpec spec;
    spec.size = 16;
    spec.orientation = Orientation::Vertical;
    spec.seed = 9;
    BuildOptions opts;
    opts.subsample = false;
    const TrainingSet ts = build_training_set(std::vector<PatchSpec>{spec}, opts);
    CHECK(ts.size() == 14 * 14);
}

TEST_CASE("negative subsampling hits the requested ratio") {
    // size 18 vertical: 2 * 16 = 32 interior positives
    PatchSpec spec;
    spec.size = 18;
    spec.orientation = Orientation::Vertical;
    spec.seed = 11;
    BuildOptions opts;
    opts.neg_pos_ratio = 1.0;
    const TrainingSet ts = build_training_set(std::vector<PatchSpec>{spec}, opts);
    int pos = 0, neg = 0;
    for (int y : ts.labels)
        (y > 0 ? pos : neg) += 1;
    CHECK(pos == 32);
    CHECK(neg == 32);
}

TEST_CASE("build_training_set validates and warns on coverage") {
    CHECK_THROWS_AS(build_training_set(std::vector<PatchSpec>{}), std::invalid_argument);

    PatchSpec vertical_only;
    vertical_only.orientation = Orientation::Vertical;
    vertical_only.seed = 1;
    std::vector<std::string> warnings;
    build_training_set(std::vector<PatchSpec>{vertical_only}, BuildOptions{}, &warnings);
    CHECK(warnings.size() == 2); // missing horizontal and diagonal

    warnings.clear();
    build_training_set(default_patch_specs(1), BuildOptions{}, &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("patch spec validation") {
    PatchSpec spec;
    spec.size = 3;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = PatchSpec{};
    spec.mean_diff = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = PatchSpec{};
    spec.dark_mean = 0.01;
    spec.noise_amp = 0.05; // would dip below zero
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = PatchSpec{};
    spec.dark_mean = 0.8;
    spec.mean_diff = 0.25; // would exceed one
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("default specs cover three orientations with four seeds each") {
    const auto specs = default_patch_specs(42);
    REQUIRE(specs.size() == 12);
    std::set<std::uint64_t> seeds;
    int vertical = 0, horizontal = 0, diagonal = 0;
    for (const auto& s : specs) {
        seeds.insert(s.seed);
        vertical += s.orientation == Orientation::Vertical;
        horizontal += s.orientation == Orientation::Horizontal;
        diagonal += s.orientation == Orientation::DiagonalMain;
    }
    CHECK(seeds.size() == 12);
    CHECK(vertical == 4);
    CHECK(horizontal == 4);
    CHECK(diagonal == 4);
}
