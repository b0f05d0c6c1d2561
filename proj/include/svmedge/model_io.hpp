#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "svmedge/errors.hpp"
#include "svmedge/svm.hpp"

namespace svmedge {

namespace detail {

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& tok, int line_no, const char* what) {
    if (tok.empty())
        throw parse_error("model line " + std::to_string(line_no) + ": missing " + what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw parse_error("model line " + std::to_string(line_no) + ": malformed " + what +
                          " '" + tok + "'");
    if (!std::isfinite(v))
        throw parse_error("model line " + std::to_string(line_no) + ": non-finite " + what);
    return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

} // namespace detail

inline constexpr int kModelFormatVersion = 1;

/// Versioned line-oriented text form. Doubles are written with full
/// precision, so reloaded models reproduce decision values exactly and
/// repeated runs with the same seed produce byte-identical files.
inline std::string model_to_string(const SvmModel& model) {
    model.validate();
    std::ostringstream out;
    out << "svmedge-model " << kModelFormatVersion << "\n";
    out << "kernel " << to_string(model.kernel.kind) << "\n";
    out << "sigma " << detail::format_double(model.kernel.sigma) << "\n";
    out << "c " << detail::format_double(model.c_param) << "\n";
    out << "bias " << detail::format_double(model.bias) << "\n";
    if (model.kernel.kind == KernelKind::Centroid) {
        const auto& g = *model.kernel.centroid;
        out << "centroid " << detail::format_double(g.c1) << " " << detail::format_double(g.c2)
            << " " << detail::format_double(g.c3) << "\n";
    }
    out << "seed " << model.meta.seed << "\n";
    if (!model.meta.params.empty())
        out << "params " << model.meta.params << "\n";
    out << "support_vectors " << model.support_vectors.size() << "\n";
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        const auto& v = model.support_vectors[i];
        out << "sv " << detail::format_double(model.alphas[i]) << " " << model.sv_labels[i]
            << " " << detail::format_double(v.c1) << " " << detail::format_double(v.c2) << " "
            << detail::format_double(v.c3) << "\n";
    }
    out << "end\n";
    return out.str();
}

inline SvmModel model_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty())
                return true;
        }
        return false;
    };

    if (!next_line())
        throw parse_error("model: empty input");
    {
        const auto toks = detail::split_ws(line);
        if (toks.size() != 2 || toks[0] != "svmedge-model")
            throw parse_error("model line 1: not a svmedge model file");
        if (toks[1] != std::to_string(kModelFormatVersion))
            throw parse_error("model line 1: unsupported format version '" + toks[1] + "'");
    }

    SvmModel model;
    long sv_count = -1;
    bool saw_end = false;
    while (next_line()) {
        const auto toks = detail::split_ws(line);
        if (toks.empty())
            continue;
        const std::string& key = toks[0];
        if (key == "kernel") {
            if (toks.size() != 2)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": kernel expects one value");
            model.kernel.kind = kernel_kind_from_string(toks[1]);
        } else if (key == "sigma") {
            if (toks.size() != 2)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": sigma expects one value");
            model.kernel.sigma = detail::parse_double(toks[1], line_no, "sigma");
        } else if (key == "c") {
            if (toks.size() != 2)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": c expects one value");
            model.c_param = detail::parse_double(toks[1], line_no, "c");
        } else if (key == "bias") {
            if (toks.size() != 2)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": bias expects one value");
            model.bias = detail::parse_double(toks[1], line_no, "bias");
        } else if (key == "centroid") {
            if (toks.size() != 4)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": centroid expects three components");
            model.kernel.centroid =
                FeatureVector{detail::parse_double(toks[1], line_no, "centroid.c1"),
                              detail::parse_double(toks[2], line_no, "centroid.c2"),
                              detail::parse_double(toks[3], line_no, "centroid.c3")};
        } else if (key == "seed") {
            if (toks.size() != 2)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": seed expects one value");
            model.meta.seed = std::strtoull(toks[1].c_str(), nullptr, 10);
        } else if (key == "params") {
            model.meta.params = line.substr(std::string("params ").size());
        } else if (key == "support_vectors") {
            if (toks.size() != 2)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": support_vectors expects a count");
            sv_count = std::strtol(toks[1].c_str(), nullptr, 10);
            if (sv_count <= 0)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": support vector count must be positive");
        } else if (key == "sv") {
            if (toks.size() != 6)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": sv expects 5 fields (alpha label c1 c2 c3), got " +
                                  std::to_string(toks.size() - 1));
            model.alphas.push_back(detail::parse_double(toks[1], line_no, "alpha"));
            const long label = std::strtol(toks[2].c_str(), nullptr, 10);
            if (label != 1 && label != -1)
                throw parse_error("model line " + std::to_string(line_no) +
                                  ": label must be +1 or -1");
            model.sv_labels.push_back(static_cast<int>(label));
            model.support_vectors.push_back(
                FeatureVector{detail::parse_double(toks[3], line_no, "c1"),
                              detail::parse_double(toks[4], line_no, "c2"),
                              detail::parse_double(toks[5], line_no, "c3")});
        } else if (key == "end") {
            saw_end = true;
            break;
        } else {
            throw parse_error("model line " + std::to_string(line_no) + ": unknown field '" +
                              key + "'");
        }
    }
    if (!saw_end)
        throw parse_error("model: missing 'end' marker (truncated file?)");
    if (sv_count < 0)
        throw parse_error("model: missing support_vectors count");
    if (static_cast<long>(model.support_vectors.size()) != sv_count)
        throw parse_error("model: declared " + std::to_string(sv_count) +
                          " support vectors, found " +
                          std::to_string(model.support_vectors.size()));
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("model: ") + e.what());
    }
    return model;
}

inline void save_model(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path.string() + "' for writing");
    const std::string text = model_to_string(model);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw io_error("failed writing '" + path.string() + "'");
}

inline SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return model_from_string(buf.str());
    } catch (const parse_error& e) {
        throw parse_error("'" + path.string() + "': " + e.what());
    }
}

} // namespace svmedge
