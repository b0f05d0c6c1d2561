#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "svmedge/edge.hpp"
#include "svmedge/image.hpp"
#include "svmedge/svm.hpp"

namespace svmedge {

enum class Orientation { Vertical, Horizontal, DiagonalMain, DiagonalAnti };

inline std::string to_string(Orientation o) {
    switch (o) {
    case Orientation::Vertical: return "vertical";
    case Orientation::Horizontal: return "horizontal";
    case Orientation::DiagonalMain: return "diagonal-main";
    case Orientation::DiagonalAnti: return "diagonal-anti";
    }
    return "?";
}

inline Orientation orientation_from_string(const std::string& name) {
    if (name == "vertical") return Orientation::Vertical;
    if (name == "horizontal") return Orientation::Horizontal;
    if (name == "diagonal-main") return Orientation::DiagonalMain;
    if (name == "diagonal-anti") return Orientation::DiagonalAnti;
    throw std::invalid_argument("unknown orientation '" + name + "'");
}

/// Parameters of one synthetic training patch: a square image split into a
/// dark and a bright zone by a straight boundary, with uniform per-pixel
/// noise around each zone mean.
struct PatchSpec {
    int size = 16;
    Orientation orientation = Orientation::Vertical;
    double dark_mean = 0.25;
    double mean_diff = 0.25; ///< bright_mean = dark_mean + mean_diff
    double noise_amp = 0.03; ///< uniform noise half-range
    std::uint64_t seed = 0;

    void validate() const {
        if (size < 4)
            throw std::invalid_argument("PatchSpec: size must be at least 4");
        if (!(mean_diff > 0.0 && mean_diff <= 1.0))
            throw std::invalid_argument("PatchSpec: mean_diff must lie in (0,1]");
        if (!(noise_amp >= 0.0))
            throw std::invalid_argument("PatchSpec: noise_amp must be >= 0");
        if (dark_mean - noise_amp < 0.0 || dark_mean + mean_diff + noise_amp > 1.0)
            throw std::invalid_argument("PatchSpec: intensities would leave [0,1]");
    }
};

/// Zone membership for the four straight boundary orientations.
inline bool in_dark_zone(Orientation o, int size, int row, int col) {
    switch (o) {
    case Orientation::Vertical: return col < size / 2;
    case Orientation::Horizontal: return row < size / 2;
    case Orientation::DiagonalMain: return row > col;
    case Orientation::DiagonalAnti: return row + col < size;
    }
    return false;
}

/// A pixel is an edge pixel when its 4-neighborhood crosses the zone
/// boundary, so both sides of the boundary are labeled positive.
inline bool is_edge_pixel(Orientation o, int size, int row, int col) {
    const bool zone = in_dark_zone(o, size, row, col);
    static constexpr int kOffsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    for (const auto& d : kOffsets) {
        const int r = row + d[0], c = col + d[1];
        if (r < 0 || r >= size || c < 0 || c >= size)
            continue;
        if (in_dark_zone(o, size, r, c) != zone)
            return true;
    }
    return false;
}

/// Training patch plus its per-pixel +1/-1 edge labels.
struct LabeledPatch {
    Image image;
    Grid<std::int8_t> labels; ///< +1 edge, -1 non-edge

    int positives() const {
        int n = 0;
        for (auto v : labels.data())
            n += (v > 0);
        return n;
    }
};

namespace detail {

// Engine output mapped to [0,1) by hand so results do not depend on the
// standard library's distribution implementation.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline std::uint8_t quantize(double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

} // namespace detail

/// Generate one patch. Deterministic for a given spec: pixel intensities
/// are zone_mean + uniform(-noise_amp, +noise_amp) from a seeded engine
/// traversed in row-major order, quantized to 8 bits.
inline LabeledPatch generate_patch(const PatchSpec& spec) {
    spec.validate();
    std::mt19937_64 eng(spec.seed);
    LabeledPatch patch{Image(spec.size, spec.size),
                       Grid<std::int8_t>(spec.size, spec.size, -1)};
    for (int r = 0; r < spec.size; ++r) {
        for (int c = 0; c < spec.size; ++c) {
            const double mean = in_dark_zone(spec.orientation, spec.size, r, c)
                                    ? spec.dark_mean
                                    : spec.dark_mean + spec.mean_diff;
            const double noise = spec.noise_amp * (2.0 * detail::uniform01(eng) - 1.0);
            patch.image.at(r, c) = detail::quantize(mean + noise);
            patch.labels(r, c) = is_edge_pixel(spec.orientation, spec.size, r, c) ? 1 : -1;
        }
    }
    return patch;
}

/// Truth map of a patch for detector evaluation (labels as an EdgeMap).
inline EdgeMap truth_map(const LabeledPatch& patch) {
    EdgeMap map(patch.image.width(), patch.image.height());
    for (int r = 0; r < map.height; ++r)
        for (int c = 0; c < map.width; ++c)
            map.decisions(r, c) = patch.labels(r, c) > 0 ? 1 : 0;
    return map;
}

/// Default training corpus: vertical, horizontal and main-diagonal patches,
/// four seeds each, at the toolkit's default patch parameters.
inline std::vector<PatchSpec> default_patch_specs(std::uint64_t base_seed = 42,
                                                  int size = 16, double mean_diff = 0.25,
                                                  double noise_amp = 0.03) {
    static constexpr Orientation kOrients[3] = {Orientation::Vertical, Orientation::Horizontal,
                                                Orientation::DiagonalMain};
    std::vector<PatchSpec> specs;
    std::uint64_t seed = base_seed;
    for (Orientation o : kOrients)
        for (int k = 0; k < 4; ++k) {
            PatchSpec s;
            s.orientation = o;
            s.size = size;
            s.mean_diff = mean_diff;
            s.noise_amp = noise_amp;
            s.seed = seed++;
            specs.push_back(s);
        }
    return specs;
}

struct BuildOptions {
    double neg_pos_ratio = 3.0; ///< kept negatives per positive
    bool subsample = true;
    std::uint64_t seed = 0x5eed; ///< negative-subsampling shuffle seed
};

/// Warnings for incomplete orientation coverage (missing diagonals are a
/// warning, not an error).
inline std::vector<std::string> coverage_warnings(std::span<const PatchSpec> specs) {
    bool v = false, h = false, d = false;
    for (const auto& s : specs) {
        v |= s.orientation == Orientation::Vertical;
        h |= s.orientation == Orientation::Horizontal;
        d |= s.orientation == Orientation::DiagonalMain ||
             s.orientation == Orientation::DiagonalAnti;
    }
    std::vector<std::string> warnings;
    if (!v)
        warnings.push_back("training specs contain no vertical patch");
    if (!h)
        warnings.push_back("training specs contain no horizontal patch");
    if (!d)
        warnings.push_back("training specs contain no diagonal patch");
    return warnings;
}

/// Extract a labeled feature vector from every interior pixel of every
/// patch, then optionally subsample the dominant negative class down to
/// neg_pos_ratio negatives per positive (deterministic shuffle by seed).
inline TrainingSet build_training_set(std::span<const PatchSpec> specs,
                                      const BuildOptions& opts = {},
                                      std::vector<std::string>* warnings = nullptr) {
    if (specs.empty())
        throw std::invalid_argument("build_training_set: no patch specs");
    if (warnings)
        *warnings = coverage_warnings(specs);

    std::vector<FeatureVector> vectors;
    std::vector<int> labels;
    for (const auto& spec : specs) {
        const LabeledPatch patch = generate_patch(spec);
        const Grid<double> norm = normalize(patch.image);
        for (int r = 1; r < spec.size - 1; ++r)
            for (int c = 1; c < spec.size - 1; ++c) {
                vectors.push_back(extract_feature(norm, r, c));
                labels.push_back(patch.labels(r, c));
            }
    }

    TrainingSet ts;
    if (opts.subsample) {
        std::vector<std::size_t> negatives;
        std::size_t positives = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] > 0)
                ++positives;
            else
                negatives.push_back(i);
        }
        const std::size_t keep =
            std::min(negatives.size(),
                     static_cast<std::size_t>(std::llround(
                         opts.neg_pos_ratio * static_cast<double>(positives))));
        // Fisher-Yates with an explicit draw so the selection does not depend
        // on the standard library's shuffle internals.
        std::mt19937_64 eng(opts.seed);
        for (std::size_t i = negatives.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(eng() % i);
            std::swap(negatives[i - 1], negatives[j]);
        }
        std::vector<std::uint8_t> selected(labels.size(), 0);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] > 0)
                selected[i] = 1;
        for (std::size_t k = 0; k < keep; ++k)
            selected[negatives[k]] = 1;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (selected[i]) {
                ts.vectors.push_back(vectors[i]);
                ts.labels.push_back(labels[i]);
            }
    } else {
        ts.vectors = std::move(vectors);
        ts.labels = std::move(labels);
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf), "synth:%zu patches size=%d diff=%g noise=%g ratio=%g:1",
                  specs.size(), specs.front().size, specs.front().mean_diff,
                  specs.front().noise_amp, opts.subsample ? opts.neg_pos_ratio : 0.0);
    ts.source = buf;
    return ts;
}

} // namespace svmedge
