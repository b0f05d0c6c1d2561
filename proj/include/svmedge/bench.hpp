#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "svmedge/edge.hpp"
#include "svmedge/errors.hpp"
#include "svmedge/image.hpp"
#include "svmedge/model_io.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <sys/utsname.h>
#endif

namespace svmedge {

struct BenchRow {
    std::string image;
    std::string method;
    double seconds = 0.0; ///< median wall time of the detection call
    int edge_pixels = 0;
    std::optional<double> f1; ///< present when a truth map was supplied

    friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

/// One row per (image, method) pair, in request order. Times cover the
/// detection call only: feature extraction included, file IO excluded.
struct BenchReport {
    std::string environment;
    int repeats = 3;
    std::vector<BenchRow> rows;

    friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

inline std::string environment_note() {
#if defined(__unix__) || defined(__APPLE__)
    utsname u{};
    if (uname(&u) == 0)
        return std::string(u.sysname) + " " + u.release + " " + u.machine;
#endif
    return "unknown host";
}

struct BenchInput {
    std::string name;
    Image image;
    std::optional<EdgeMap> truth;
};

struct BenchOptions {
    int repeats = 3; ///< median over this many runs per (image, method)
    DetectorConfig config;
    int workers = 1;
    int f1_tolerance_px = 1;
};

/// Run every requested method on every image, timing each repeat and
/// keeping the median. The SVM method requires a model.
inline BenchReport run_bench(std::span<const BenchInput> inputs,
                             std::span<const DetectorMethod> methods, const SvmModel* model,
                             const BenchOptions& opts = {}) {
    if (inputs.empty())
        throw std::invalid_argument("run_bench: need at least one input image");
    if (methods.empty())
        throw std::invalid_argument("run_bench: need at least one method");
    if (opts.repeats < 3)
        throw std::invalid_argument("run_bench: need at least 3 repeats for a median");
    opts.config.validate();

    BenchReport report;
    report.environment = environment_note();
    report.repeats = opts.repeats;

    for (const auto& input : inputs) {
        for (DetectorMethod method : methods) {
            if (method == DetectorMethod::Svm && model == nullptr)
                throw std::invalid_argument("run_bench: svm method requires a model");
            std::vector<double> times;
            EdgeMap map;
            for (int rep = 0; rep < opts.repeats; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                switch (method) {
                case DetectorMethod::Svm:
                    map = detect_svm(input.image, *model, opts.config, opts.workers);
                    break;
                case DetectorMethod::Sobel:
                    map = detect_sobel(input.image, opts.config);
                    break;
                case DetectorMethod::Canny:
                    map = detect_canny(input.image, opts.config);
                    break;
                }
                const auto t1 = std::chrono::steady_clock::now();
                times.push_back(std::chrono::duration<double>(t1 - t0).count());
            }
            std::sort(times.begin(), times.end());
            BenchRow row;
            row.image = input.name;
            row.method = to_string(method);
            row.seconds = times[times.size() / 2];
            row.edge_pixels = map.edge_count();
            if (input.truth.has_value())
                row.f1 = edge_metrics(map, *input.truth, opts.f1_tolerance_px).f1;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

/// Human-readable table, one line per image with the method timings as
/// columns in the fixed order svm, canny, sobel (restricted to the methods
/// actually present in the report).
inline std::string report_to_text(const BenchReport& report) {
    static constexpr const char* kOrder[3] = {"svm", "canny", "sobel"};
    std::vector<std::string> methods;
    std::vector<std::string> images;
    for (const auto* name : kOrder)
        for (const auto& row : report.rows)
            if (row.method == name && std::find(methods.begin(), methods.end(), name) == methods.end())
                methods.push_back(name);
    for (const auto& row : report.rows)
        if (std::find(images.begin(), images.end(), row.image) == images.end())
            images.push_back(row.image);

    std::ostringstream out;
    out << "# timing: median of " << report.repeats
        << " repeats per cell, detection call only (feature extraction included, file IO excluded)\n";
    out << "# environment: " << report.environment << "\n";
    char buf[64];
    out << "Tested image";
    for (const auto& m : methods)
        out << "\t" << m << "(s)";
    out << "\n";
    for (const auto& img : images) {
        out << img;
        for (const auto& m : methods) {
            for (const auto& row : report.rows)
                if (row.image == img && row.method == m) {
                    std::snprintf(buf, sizeof(buf), "%.4f", row.seconds);
                    out << "\t" << buf;
                    break;
                }
        }
        out << "\n";
    }
    return out.str();
}

/// CSV form: comment header (format, environment, repeats), then one data
/// row per (image, method). Parses back with report_from_csv.
inline std::string report_to_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "# svmedge-bench 1\n";
    out << "# environment: " << report.environment << "\n";
    out << "# repeats: " << report.repeats << "\n";
    out << "image,method,seconds,edge_pixels,f1\n";
    for (const auto& row : report.rows) {
        out << row.image << "," << row.method << "," << detail::format_double(row.seconds)
            << "," << row.edge_pixels << ",";
        if (row.f1.has_value())
            out << detail::format_double(*row.f1);
        out << "\n";
    }
    return out.str();
}

inline BenchReport report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    BenchReport report;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        if (line.rfind("# environment: ", 0) == 0) {
            report.environment = line.substr(std::string("# environment: ").size());
            continue;
        }
        if (line.rfind("# repeats: ", 0) == 0) {
            report.repeats = static_cast<int>(
                std::strtol(line.substr(std::string("# repeats: ").size()).c_str(), nullptr, 10));
            continue;
        }
        if (line[0] == '#')
            continue;
        if (!saw_header) {
            if (line != "image,method,seconds,edge_pixels,f1")
                throw parse_error("bench csv line " + std::to_string(line_no) +
                                  ": unexpected header '" + line + "'");
            saw_header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ','))
            fields.push_back(field);
        if (line.back() == ',')
            fields.push_back("");
        if (fields.size() != 5)
            throw parse_error("bench csv line " + std::to_string(line_no) + ": expected 5 fields, got " +
                              std::to_string(fields.size()));
        BenchRow row;
        row.image = fields[0];
        row.method = fields[1];
        row.seconds = detail::parse_double(fields[2], line_no, "seconds");
        row.edge_pixels = static_cast<int>(std::strtol(fields[3].c_str(), nullptr, 10));
        if (!fields[4].empty())
            row.f1 = detail::parse_double(fields[4], line_no, "f1");
        report.rows.push_back(std::move(row));
    }
    if (!saw_header)
        throw parse_error("bench csv: missing column header");
    return report;
}

} // namespace svmedge
