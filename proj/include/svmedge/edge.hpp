#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "svmedge/image.hpp"
#include "svmedge/svm.hpp"

namespace svmedge {

/// Binary edge/no-edge grid matching the source image dimensions. Border
/// pixels, where the 3x3 feature window is incomplete, are always non-edge.
/// SVM detection additionally keeps the raw decision values.
struct EdgeMap {
    int width = 0;
    int height = 0;
    Grid<std::uint8_t> decisions; ///< 1 = edge
    std::optional<Grid<double>> raw;

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), decisions(w, h, 0) {}

    bool edge(int row, int col) const { return decisions(row, col) != 0; }

    int edge_count() const {
        int n = 0;
        for (auto v : decisions.data())
            n += (v != 0);
        return n;
    }
};

enum class DetectorMethod { Svm, Sobel, Canny };

inline std::string to_string(DetectorMethod m) {
    switch (m) {
    case DetectorMethod::Svm: return "svm";
    case DetectorMethod::Sobel: return "sobel";
    case DetectorMethod::Canny: return "canny";
    }
    return "?";
}

inline DetectorMethod detector_method_from_string(const std::string& name) {
    if (name == "svm") return DetectorMethod::Svm;
    if (name == "sobel") return DetectorMethod::Sobel;
    if (name == "canny") return DetectorMethod::Canny;
    throw std::invalid_argument("unknown detector method '" + name + "'");
}

struct DetectorConfig {
    DetectorMethod method = DetectorMethod::Svm;
    double svm_threshold = 0.0;       ///< cutoff on the raw decision value
    double sobel_threshold = 0.25;    ///< fraction of the max gradient magnitude
    double canny_low = 0.1;           ///< hysteresis fractions of the max magnitude
    double canny_high = 0.2;
    double canny_smooth_sigma = 1.0;

    void validate() const {
        if (!std::isfinite(svm_threshold) && !(svm_threshold > 0))
            throw std::invalid_argument("DetectorConfig: svm threshold must not be -inf/NaN");
        if (!(sobel_threshold > 0.0 && sobel_threshold < 1.0))
            throw std::invalid_argument("DetectorConfig: sobel threshold must lie in (0,1)");
        if (!(canny_low > 0.0 && canny_low < 1.0) || !(canny_high > 0.0 && canny_high < 1.0))
            throw std::invalid_argument("DetectorConfig: canny fractions must lie in (0,1)");
        if (!(canny_low < canny_high))
            throw std::invalid_argument("DetectorConfig: canny low must be below high");
        if (!(canny_smooth_sigma > 0.0))
            throw std::invalid_argument("DetectorConfig: smoothing sigma must be positive");
    }
};

/// Tridimensional feature at an interior pixel of a normalized image:
///   c1 = (I(r, c+1) - I(r, c-1)) / 2          horizontal difference
///   c2 = (I(r+1, c) - I(r-1, c)) / 2          vertical difference
///   c3 = mean of the two diagonal differences
/// Throws on border coordinates.
inline FeatureVector extract_feature(const Grid<double>& image, int row, int col) {
    if (row < 1 || row > image.height() - 2 || col < 1 || col > image.width() - 2)
        throw std::invalid_argument("extract_feature: border coordinates");
    const double c1 = (image(row, col + 1) - image(row, col - 1)) / 2.0;
    const double c2 = (image(row + 1, col) - image(row - 1, col)) / 2.0;
    const double c3 = (image(row + 1, col + 1) - image(row - 1, col - 1) +
                       image(row + 1, col - 1) - image(row - 1, col + 1)) /
                      4.0;
    return {c1, c2, c3};
}

/// Per-pixel SVM classification: raw = decision value of the extracted
/// feature, edge iff raw > cfg.svm_threshold. Worker threads split rows;
/// the output is bit-identical to the sequential run.
inline EdgeMap detect_svm(const Image& image, const SvmModel& model,
                          const DetectorConfig& cfg = {}, int workers = 1) {
    model.validate();
    cfg.validate();
    if (image.width() < 3 || image.height() < 3)
        throw std::invalid_argument("detect_svm: image must be at least 3x3");

    const Grid<double> norm = normalize(image);
    EdgeMap map(image.width(), image.height());
    Grid<double> raw(image.width(), image.height(), 0.0);

    auto run_rows = [&](int row_begin, int row_end) {
        for (int r = row_begin; r < row_end; ++r)
            for (int c = 1; c < image.width() - 1; ++c)
                raw(r, c) = decision_value(model, extract_feature(norm, r, c));
    };

    const int interior_rows = image.height() - 2;
    const int nthreads = std::clamp(workers, 1, std::max(1, interior_rows));
    if (nthreads == 1) {
        run_rows(1, image.height() - 1);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (interior_rows + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const int begin = 1 + t * chunk;
            const int end = std::min(image.height() - 1, begin + chunk);
            if (begin < end)
                pool.emplace_back(run_rows, begin, end);
        }
        for (auto& th : pool)
            th.join();
    }

    for (int r = 1; r < image.height() - 1; ++r)
        for (int c = 1; c < image.width() - 1; ++c)
            map.decisions(r, c) = raw(r, c) > cfg.svm_threshold ? 1 : 0;
    map.raw = std::move(raw);
    return map;
}

/// Sobel responses at an interior pixel, on the stored 0..255 scale.
inline std::pair<double, double> sobel_gradient(const Image& image, int row, int col) {
    if (row < 1 || row > image.height() - 2 || col < 1 || col > image.width() - 2)
        throw std::invalid_argument("sobel_gradient: border coordinates");
    auto p = [&](int r, int c) { return static_cast<double>(image.at(r, c)); };
    const double gx = (p(row - 1, col + 1) + 2.0 * p(row, col + 1) + p(row + 1, col + 1)) -
                      (p(row - 1, col - 1) + 2.0 * p(row, col - 1) + p(row + 1, col - 1));
    const double gy = (p(row + 1, col - 1) + 2.0 * p(row + 1, col) + p(row + 1, col + 1)) -
                      (p(row - 1, col - 1) + 2.0 * p(row - 1, col) + p(row - 1, col + 1));
    return {gx, gy};
}

/// Gradient-magnitude thresholding with the standard 3x3 Sobel stencils.
/// Edge iff magnitude > cfg.sobel_threshold * max magnitude.
inline EdgeMap detect_sobel(const Image& image, const DetectorConfig& cfg = {}) {
    cfg.validate();
    if (image.width() < 3 || image.height() < 3)
        throw std::invalid_argument("detect_sobel: image must be at least 3x3");

    Grid<double> mag(image.width(), image.height(), 0.0);
    double max_mag = 0.0;
    for (int r = 1; r < image.height() - 1; ++r) {
        for (int c = 1; c < image.width() - 1; ++c) {
            const auto [gx, gy] = sobel_gradient(image, r, c);
            const double m = std::sqrt(gx * gx + gy * gy);
            mag(r, c) = m;
            max_mag = std::max(max_mag, m);
        }
    }

    EdgeMap map(image.width(), image.height());
    if (max_mag <= 0.0)
        return map; // flat image, nothing to mark
    const double cut = cfg.sobel_threshold * max_mag;
    for (int r = 1; r < image.height() - 1; ++r)
        for (int c = 1; c < image.width() - 1; ++c)
            map.decisions(r, c) = mag(r, c) > cut ? 1 : 0;
    return map;
}

namespace detail {

inline Grid<double> gaussian_smooth(const Grid<double>& in, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(static_cast<std::size_t>(radius) + 1);
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k)
        norm += std::exp(-0.5 * (k / sigma) * (k / sigma));
    for (int k = 0; k <= radius; ++k)
        w[k] = std::exp(-0.5 * (k / sigma) * (k / sigma)) / norm;

    const int wd = in.width(), ht = in.height();
    auto clamp_col = [&](int c) { return std::clamp(c, 0, wd - 1); };
    auto clamp_row = [&](int r) { return std::clamp(r, 0, ht - 1); };

    Grid<double> tmp(wd, ht, 0.0);
    for (int r = 0; r < ht; ++r)
        for (int c = 0; c < wd; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k)
                s += w[std::abs(k)] * in(r, clamp_col(c + k));
            tmp(r, c) = s;
        }
    Grid<double> out(wd, ht, 0.0);
    for (int r = 0; r < ht; ++r)
        for (int c = 0; c < wd; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k)
                s += w[std::abs(k)] * tmp(clamp_row(r + k), c);
            out(r, c) = s;
        }
    return out;
}

} // namespace detail

/// Canny pipeline: Gaussian smoothing (truncated at 3 sigma), Sobel
/// gradients, non-maximum suppression along the quantized gradient
/// direction (4 bins), double threshold on fractions of the max magnitude,
/// and 8-connected hysteresis promotion of weak edges.
inline EdgeMap detect_canny(const Image& image, const DetectorConfig& cfg = {}) {
    cfg.validate();
    if (image.width() < 5 || image.height() < 5)
        throw std::invalid_argument("detect_canny: image must be at least 5x5");

    const int wd = image.width(), ht = image.height();
    const Grid<double> smooth = detail::gaussian_smooth(normalize(image), cfg.canny_smooth_sigma);

    Grid<double> mag(wd, ht, 0.0);
    Grid<std::uint8_t> dir(wd, ht, 0);
    double max_mag = 0.0;
    for (int r = 1; r < ht - 1; ++r) {
        for (int c = 1; c < wd - 1; ++c) {
            const double gx = (smooth(r - 1, c + 1) + 2.0 * smooth(r, c + 1) + smooth(r + 1, c + 1)) -
                              (smooth(r - 1, c - 1) + 2.0 * smooth(r, c - 1) + smooth(r + 1, c - 1));
            const double gy = (smooth(r + 1, c - 1) + 2.0 * smooth(r + 1, c) + smooth(r + 1, c + 1)) -
                              (smooth(r - 1, c - 1) + 2.0 * smooth(r - 1, c) + smooth(r - 1, c + 1));
            const double m = std::sqrt(gx * gx + gy * gy);
            mag(r, c) = m;
            max_mag = std::max(max_mag, m);
            double theta = std::atan2(gy, gx); // quantize to 0/45/90/135 degrees
            if (theta < 0.0)
                theta += 3.14159265358979323846;
            const int bin = static_cast<int>(std::floor((theta + 3.14159265358979323846 / 8.0) /
                                                        (3.14159265358979323846 / 4.0))) %
                            4;
            dir(r, c) = static_cast<std::uint8_t>(bin);
        }
    }

    EdgeMap map(wd, ht);
    if (max_mag <= 0.0)
        return map;

    // Suppress non-maxima along the gradient direction. The tie rule
    // (strictly above the forward neighbor, at least the backward one)
    // keeps exactly one pixel of a two-pixel plateau.
    static constexpr int kForward[4][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}};
    Grid<std::uint8_t> thin(wd, ht, 0);
    for (int r = 1; r < ht - 1; ++r) {
        for (int c = 1; c < wd - 1; ++c) {
            const double m = mag(r, c);
            if (m <= 0.0)
                continue;
            const int dr = kForward[dir(r, c)][0], dc = kForward[dir(r, c)][1];
            const double fwd = mag(r + dr, c + dc);
            const double bwd = mag(r - dr, c - dc);
            if (m > fwd && m >= bwd)
                thin(r, c) = 1;
        }
    }

    const double low = cfg.canny_low * max_mag;
    const double high = cfg.canny_high * max_mag;
    std::vector<std::pair<int, int>> stack;
    for (int r = 1; r < ht - 1; ++r)
        for (int c = 1; c < wd - 1; ++c)
            if (thin(r, c) && mag(r, c) > high) {
                map.decisions(r, c) = 1;
                stack.emplace_back(r, c);
            }
    while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const int rr = r + dr, cc = c + dc;
                if (rr < 1 || rr >= ht - 1 || cc < 1 || cc >= wd - 1)
                    continue;
                if (!map.decisions(rr, cc) && thin(rr, cc) && mag(rr, cc) > low) {
                    map.decisions(rr, cc) = 1;
                    stack.emplace_back(rr, cc);
                }
            }
    }
    return map;
}

struct EdgeMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int matched_predicted = 0; ///< predicted pixels matched one-to-one to truth
    int covered_truth = 0;     ///< truth pixels with some prediction within tolerance
    int predicted_total = 0;
    int truth_total = 0;
};

/// Tolerant edge-quality metrics against a reference map.
/// Precision matches predicted pixels one-to-one against truth pixels within
/// Chebyshev distance tolerance_px (greedy, row-major, nearest-first), so a
/// thick prediction of a thin boundary is penalized. Recall counts a truth
/// pixel as covered when any predicted pixel lies within the tolerance, so a
/// thin detection of a thick reference still recalls both of its sides.
inline EdgeMetrics edge_metrics(const EdgeMap& predicted, const EdgeMap& truth,
                                int tolerance_px) {
    if (predicted.width != truth.width || predicted.height != truth.height)
        throw std::invalid_argument("edge_metrics: dimension mismatch");
    if (tolerance_px < 0)
        throw std::invalid_argument("edge_metrics: tolerance must be >= 0");

    const int wd = predicted.width, ht = predicted.height;
    EdgeMetrics m;

    Grid<std::uint8_t> consumed(wd, ht, 0);
    for (int r = 0; r < ht; ++r) {
        for (int c = 0; c < wd; ++c) {
            if (!predicted.edge(r, c))
                continue;
            ++m.predicted_total;
            int best_r = -1, best_c = -1, best_d = tolerance_px + 1;
            for (int dr = -tolerance_px; dr <= tolerance_px; ++dr) {
                for (int dc = -tolerance_px; dc <= tolerance_px; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= ht || cc < 0 || cc >= wd)
                        continue;
                    if (!truth.edge(rr, cc) || consumed(rr, cc))
                        continue;
                    const int d = std::max(std::abs(dr), std::abs(dc));
                    if (d < best_d) {
                        best_d = d;
                        best_r = rr;
                        best_c = cc;
                    }
                }
            }
            if (best_r >= 0) {
                consumed(best_r, best_c) = 1;
                ++m.matched_predicted;
            }
        }
    }

    for (int r = 0; r < ht; ++r) {
        for (int c = 0; c < wd; ++c) {
            if (!truth.edge(r, c))
                continue;
            ++m.truth_total;
            bool hit = false;
            for (int dr = -tolerance_px; dr <= tolerance_px && !hit; ++dr)
                for (int dc = -tolerance_px; dc <= tolerance_px && !hit; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < ht && cc >= 0 && cc < wd && predicted.edge(rr, cc))
                        hit = true;
                }
            if (hit)
                ++m.covered_truth;
        }
    }

    m.precision = m.predicted_total == 0
                      ? 1.0
                      : static_cast<double>(m.matched_predicted) / m.predicted_total;
    m.recall =
        m.truth_total == 0 ? 1.0 : static_cast<double>(m.covered_truth) / m.truth_total;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

/// Edge map as an image: edge = 255, non-edge = 0.
inline Image edge_map_to_image(const EdgeMap& map) {
    Image img(map.width, map.height, 0);
    for (int r = 0; r < map.height; ++r)
        for (int c = 0; c < map.width; ++c)
            if (map.edge(r, c))
                img.at(r, c) = 255;
    return img;
}

/// Inverse of edge_map_to_image: any nonzero pixel counts as edge.
inline EdgeMap edge_map_from_image(const Image& img) {
    EdgeMap map(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            map.decisions(r, c) = img.at(r, c) != 0 ? 1 : 0;
    return map;
}

/// Dump raw decision values as a text grid (debug aid); requires an
/// EdgeMap produced by detect_svm.
inline void save_raw_text(const EdgeMap& map, const std::filesystem::path& path) {
    if (!map.raw.has_value())
        throw std::invalid_argument("save_raw_text: edge map carries no raw values");
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open '" + path.string() + "' for writing");
    out << map.width << " " << map.height << "\n";
    char buf[64];
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", (*map.raw)(r, c));
            out << buf << (c + 1 == map.width ? "" : " ");
        }
        out << "\n";
    }
}

} // namespace svmedge
