#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "svmedge/errors.hpp"

namespace svmedge {

/// Row-major rectangular grid, the workhorse carrier for intermediate
/// real-valued images (smoothed intensities, gradient magnitudes, raw
/// decision values) and label masks.
template <typename T>
class Grid {
public:
    Grid() = default;

    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Grid: dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }

    T& operator()(int row, int col) { return data_[index(row, col)]; }
    const T& operator()(int row, int col) const { return data_[index(row, col)]; }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// 8-bit grayscale image. Pixels are stored as raw 0..255 bytes;
/// computation happens on the normalized [0,1] lift (see normalize()).
/// Immutable use after construction is the intended pattern, so a loaded
/// image can be shared freely across worker threads.
class Image {
public:
    Image() = default;

    Image(int width, int height, std::uint8_t fill = 0)
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
    }

    Image(int width, int height, std::vector<std::uint8_t> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
        if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw std::invalid_argument("Image: pixel buffer size does not match dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t at(int row, int col) const { return pixels_[index(row, col)]; }
    std::uint8_t& at(int row, int col) { return pixels_[index(row, col)]; }

    const std::vector<std::uint8_t>& pixels() const { return pixels_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Lift stored bytes to [0,1]: value / 255. Monotone, endpoints attained.
inline Grid<double> normalize(const Image& image) {
    Grid<double> out(image.width(), image.height());
    const auto& src = image.pixels();
    auto& dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<double>(src[i]) / 255.0;
    return out;
}

namespace detail {

// Header tokens may be separated by any whitespace and '#' comments.
inline std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty())
                return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

inline int parse_pgm_int(const std::string& tok, const char* what) {
    if (tok.empty())
        throw parse_error(std::string("PGM header: missing ") + what);
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw parse_error(std::string("PGM header: malformed ") + what + " '" + tok + "'");
    long v = std::strtol(tok.c_str(), nullptr, 10);
    if (v <= 0 || v > 1 << 24)
        throw parse_error(std::string("PGM header: out-of-range ") + what + " '" + tok + "'");
    return static_cast<int>(v);
}

} // namespace detail

/// Read a PGM file, P5 (binary) or P2 (ASCII), maxval <= 255.
/// Distinct failures: missing file (io_error), malformed header, oversized
/// maxval, and truncated pixel data (parse_error with specific messages).
inline Image load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open '" + path.string() + "' for reading");

    std::string magic = detail::next_pgm_token(in);
    if (magic != "P5" && magic != "P2")
        throw parse_error("'" + path.string() + "': not a PGM file (magic '" + magic + "')");

    int width = detail::parse_pgm_int(detail::next_pgm_token(in), "width");
    int height = detail::parse_pgm_int(detail::next_pgm_token(in), "height");

    std::string maxval_tok = detail::next_pgm_token(in);
    int maxval = detail::parse_pgm_int(maxval_tok, "maxval");
    if (maxval > 255)
        throw parse_error("'" + path.string() + "': maxval " + maxval_tok +
                          " exceeds 255 (only 8-bit images are supported)");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint8_t> pixels(count);

    if (magic == "P5") {
        // Exactly one whitespace byte separates the header from the raster;
        // next_pgm_token has already consumed it.
        in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count)
            throw parse_error("'" + path.string() + "': truncated pixel data (expected " +
                              std::to_string(count) + " bytes, got " +
                              std::to_string(in.gcount()) + ")");
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            std::string tok = detail::next_pgm_token(in);
            if (tok.empty())
                throw parse_error("'" + path.string() + "': truncated pixel data (expected " +
                                  std::to_string(count) + " samples, got " + std::to_string(i) +
                                  ")");
            for (char c : tok)
                if (!std::isdigit(static_cast<unsigned char>(c)))
                    throw parse_error("'" + path.string() + "': malformed sample '" + tok + "'");
            long val = std::strtol(tok.c_str(), nullptr, 10);
            if (val > maxval)
                throw parse_error("'" + path.string() + "': sample " + tok +
                                  " out of range 0.." + std::to_string(maxval));
            pixels[i] = static_cast<std::uint8_t>(val);
        }
    }
    return Image(width, height, std::move(pixels));
}

/// Write as binary P5 with maxval 255. load_pgm(save_pgm(x)) == x, bit-exact.
inline void save_pgm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << image.width() << " " << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels().data()),
              static_cast<std::streamsize>(image.pixels().size()));
    if (!out)
        throw io_error("failed writing '" + path.string() + "'");
}

} // namespace svmedge
