// svmedge: train a kernel-SVM edge detector on synthetic patches, run it
// (or the Sobel/Canny baselines) on grayscale PGM images, and benchmark.
//
// Exit codes: 0 success, 1 usage, 2 invalid parameters, 3 file/parse
// failure, 4 solver non-convergence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svmedge/svmedge.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitConvergence = 4;

struct CommonParams {
    double c = 10.0;
    double sigma = 0.6;
    std::string kernel = "rbf3";
    double tol = 1e-3;
    std::uint64_t seed = 42;
    int patch_size = 16;
    double mean_diff = 0.25;
    double noise_amp = 0.03;
    double neg_pos_ratio = 3.0;
};

svmedge::KernelSpec kernel_spec_of(const CommonParams& p) {
    const svmedge::KernelKind kind = svmedge::kernel_kind_from_string(p.kernel);
    if (kind == svmedge::KernelKind::Linear)
        throw std::invalid_argument("the linear kernel is not a detection option");
    svmedge::KernelSpec spec;
    spec.kind = kind;
    spec.sigma = p.sigma;
    return spec; // centroid, when requested, is frozen by train()
}

// Every numeric parameter is checked against its module invariant before
// any patch generation or training starts.
void validate_train_params(const CommonParams& p) {
    if (!(p.c > 0.0))
        throw std::invalid_argument("--c must be positive");
    if (!(p.tol > 0.0))
        throw std::invalid_argument("--tol must be positive");
    if (!(p.neg_pos_ratio > 0.0))
        throw std::invalid_argument("--ratio must be positive");
    kernel_spec_of(p).validate();
    svmedge::PatchSpec probe;
    probe.size = p.patch_size;
    probe.mean_diff = p.mean_diff;
    probe.noise_amp = p.noise_amp;
    probe.validate();
}

int cmd_train(const CommonParams& p, const std::string& output) {
    using namespace svmedge;
    validate_train_params(p);
    const auto specs = default_patch_specs(p.seed, p.patch_size, p.mean_diff, p.noise_amp);
    BuildOptions bopts;
    bopts.neg_pos_ratio = p.neg_pos_ratio;
    bopts.seed = p.seed;
    std::vector<std::string> warnings;
    const TrainingSet ts = build_training_set(specs, bopts, &warnings);
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << "\n";

    TrainOptions topts;
    topts.c = p.c;
    topts.tol = p.tol;
    topts.seed = p.seed;
    topts.params = ts.source;
    QpSolution sol;
    const SvmModel model = train(ts, kernel_spec_of(p), topts, &sol);
    save_model(model, output);
    const KktReport kkt = kkt_check(ts, model.kernel, sol, p.c, p.tol);

    std::printf("samples          %zu\n", ts.size());
    std::printf("support vectors  %zu (%.1f%%)\n", model.sv_count(),
                100.0 * static_cast<double>(model.sv_count()) / static_cast<double>(ts.size()));
    std::printf("train accuracy   %.4f\n", training_accuracy(model, ts));
    std::printf("kkt residual     %.3e\n", sol.kkt_residual);
    std::printf("kkt violation    %.3e\n", kkt.max_violation);
    std::printf("model            %s\n", output.c_str());
    return 0;
}

int cmd_detect(const std::string& model_path, const std::string& input,
               const std::string& output, double threshold, const std::string& truth_path,
               int workers, const std::string& raw_path) {
    using namespace svmedge;
    const SvmModel model = load_model(model_path);
    const Image image = load_pgm(input);
    DetectorConfig cfg;
    cfg.svm_threshold = threshold;

    const auto t0 = std::chrono::steady_clock::now();
    const EdgeMap map = detect_svm(image, model, cfg, workers);
    const auto t1 = std::chrono::steady_clock::now();

    save_pgm(edge_map_to_image(map), output);
    if (!raw_path.empty())
        save_raw_text(map, raw_path);
    std::printf("image        %s (%dx%d)\n", input.c_str(), image.width(), image.height());
    std::printf("elapsed      %.4f s\n", std::chrono::duration<double>(t1 - t0).count());
    std::printf("edge pixels  %d\n", map.edge_count());
    if (!truth_path.empty()) {
        const EdgeMap truth = edge_map_from_image(load_pgm(truth_path));
        const EdgeMetrics m = edge_metrics(map, truth, 1);
        std::printf("precision    %.4f\nrecall       %.4f\nf1           %.4f\n", m.precision,
                    m.recall, m.f1);
    }
    std::printf("output       %s\n", output.c_str());
    return 0;
}

int cmd_compare(const std::string& model_path, const std::string& input,
                const std::vector<std::string>& methods, const std::string& output_stem,
                const svmedge::DetectorConfig& cfg, const std::string& truth_path,
                int workers) {
    using namespace svmedge;
    const Image image = load_pgm(input);
    std::optional<EdgeMap> truth;
    if (!truth_path.empty())
        truth = edge_map_from_image(load_pgm(truth_path));

    std::optional<SvmModel> model;
    for (const auto& name : methods)
        if (detector_method_from_string(name) == DetectorMethod::Svm) {
            if (model_path.empty())
                throw std::invalid_argument("method 'svm' requires --model");
            model = load_model(model_path);
        }

    std::printf("%-8s %10s %12s", "method", "time(s)", "edge pixels");
    if (truth)
        std::printf(" %9s %9s %9s", "precision", "recall", "f1");
    std::printf("\n");

    for (const auto& name : methods) {
        const DetectorMethod method = detector_method_from_string(name);
        const auto t0 = std::chrono::steady_clock::now();
        EdgeMap map;
        switch (method) {
        case DetectorMethod::Svm: map = detect_svm(image, *model, cfg, workers); break;
        case DetectorMethod::Sobel: map = detect_sobel(image, cfg); break;
        case DetectorMethod::Canny: map = detect_canny(image, cfg); break;
        }
        const auto t1 = std::chrono::steady_clock::now();
        const std::string out_path = output_stem + "_" + name + ".pgm";
        save_pgm(edge_map_to_image(map), out_path);
        std::printf("%-8s %10.4f %12d", name.c_str(),
                    std::chrono::duration<double>(t1 - t0).count(), map.edge_count());
        if (truth) {
            const EdgeMetrics m = edge_metrics(map, *truth, 1);
            std::printf(" %9.4f %9.4f %9.4f", m.precision, m.recall, m.f1);
        }
        std::printf("\n");
    }
    return 0;
}

int cmd_bench(const std::string& model_path, const std::vector<std::string>& inputs,
              const std::vector<std::string>& truth_paths,
              const std::vector<std::string>& methods, int repeats, const std::string& csv_path,
              const svmedge::DetectorConfig& cfg, int workers) {
    using namespace svmedge;
    if (!truth_paths.empty() && truth_paths.size() != inputs.size())
        throw std::invalid_argument("--truth must be given once per --input when used");

    std::vector<BenchInput> bench_inputs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        BenchInput in;
        in.name = std::filesystem::path(inputs[i]).filename().string();
        in.image = load_pgm(inputs[i]);
        if (!truth_paths.empty())
            in.truth = edge_map_from_image(load_pgm(truth_paths[i]));
        bench_inputs.push_back(std::move(in));
    }

    std::vector<DetectorMethod> method_list;
    std::optional<SvmModel> model;
    for (const auto& name : methods) {
        method_list.push_back(detector_method_from_string(name));
        if (method_list.back() == DetectorMethod::Svm && !model.has_value()) {
            if (model_path.empty())
                throw std::invalid_argument("method 'svm' requires --model");
            model = load_model(model_path);
        }
    }

    BenchOptions bopts;
    bopts.repeats = repeats;
    bopts.config = cfg;
    bopts.workers = workers;
    const BenchReport report =
        run_bench(bench_inputs, method_list, model ? &*model : nullptr, bopts);

    std::fputs(report_to_text(report).c_str(), stdout);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out)
            throw io_error("cannot open '" + csv_path + "' for writing");
        out << report_to_csv(report);
        std::printf("csv: %s\n", csv_path.c_str());
    }
    return 0;
}

int cmd_gen_patches(const CommonParams& p, const std::string& prefix,
                    const std::vector<std::string>& orientations) {
    using namespace svmedge;
    for (const auto& name : orientations) {
        PatchSpec spec;
        spec.orientation = orientation_from_string(name);
        spec.size = p.patch_size;
        spec.mean_diff = p.mean_diff;
        spec.noise_amp = p.noise_amp;
        spec.seed = p.seed;
        const LabeledPatch patch = generate_patch(spec);
        const std::string img_path = prefix + "_" + name + ".pgm";
        const std::string truth_path = prefix + "_" + name + "_truth.pgm";
        save_pgm(patch.image, img_path);
        save_pgm(edge_map_to_image(truth_map(patch)), truth_path);
        std::printf("%s (%d positives)  truth: %s\n", img_path.c_str(), patch.positives(),
                    truth_path.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel-SVM edge detection toolkit"};
    app.require_subcommand(1);

    CommonParams params;

    auto* train_cmd = app.add_subcommand("train", "train an SVM on synthetic edge patches");
    std::string train_output;
    train_cmd->add_option("-o,--output", train_output, "model file to write")->required();
    train_cmd->add_option("--c", params.c, "soft-margin C");
    train_cmd->add_option("--sigma", params.sigma, "kernel width sigma");
    train_cmd->add_option("--kernel", params.kernel, "kernel kind: rbf3 or centroid");
    train_cmd->add_option("--tol", params.tol, "solver KKT tolerance");
    train_cmd->add_option("--seed", params.seed, "patch generation seed");
    train_cmd->add_option("--patch-size", params.patch_size, "training patch side length");
    train_cmd->add_option("--mean-diff", params.mean_diff, "dark/bright zone mean difference");
    train_cmd->add_option("--noise-amp", params.noise_amp, "uniform noise half-range");
    train_cmd->add_option("--ratio", params.neg_pos_ratio, "kept negatives per positive");

    auto* detect_cmd = app.add_subcommand("detect", "run the SVM detector on a PGM image");
    std::string detect_model, detect_input, detect_output, detect_truth, detect_raw;
    double detect_threshold = 0.0;
    int workers = 1;
    detect_cmd->add_option("-m,--model", detect_model, "trained model file")->required();
    detect_cmd->add_option("-i,--input", detect_input, "input PGM")->required();
    detect_cmd->add_option("-o,--output", detect_output, "edge map PGM to write")->required();
    detect_cmd->add_option("--threshold", detect_threshold, "decision-value cutoff");
    detect_cmd->add_option("--truth", detect_truth, "truth edge map PGM for metrics");
    detect_cmd->add_option("--raw", detect_raw, "write raw decision values as text");
    detect_cmd->add_option("--workers", workers, "worker threads (bit-identical output)");

    auto* compare_cmd = app.add_subcommand("compare", "run several detectors side by side");
    std::string cmp_model, cmp_input, cmp_stem, cmp_truth;
    std::vector<std::string> cmp_methods{"svm", "canny", "sobel"};
    svmedge::DetectorConfig cmp_cfg;
    compare_cmd->add_option("-i,--input", cmp_input, "input PGM")->required();
    compare_cmd->add_option("-o,--output", cmp_stem, "output stem (<stem>_<method>.pgm)")
        ->required();
    compare_cmd->add_option("-m,--model", cmp_model, "trained model file (for svm)");
    compare_cmd->add_option("--methods", cmp_methods, "subset of svm, canny, sobel")
        ->delimiter(',');
    compare_cmd->add_option("--threshold", cmp_cfg.svm_threshold, "svm decision cutoff");
    compare_cmd->add_option("--sobel-threshold", cmp_cfg.sobel_threshold,
                            "sobel fraction of max magnitude");
    compare_cmd->add_option("--canny-low", cmp_cfg.canny_low, "canny low fraction");
    compare_cmd->add_option("--canny-high", cmp_cfg.canny_high, "canny high fraction");
    compare_cmd->add_option("--truth", cmp_truth, "truth edge map PGM for metrics");
    compare_cmd->add_option("--workers", workers, "worker threads");

    auto* bench_cmd = app.add_subcommand("bench", "timing/quality report across methods");
    std::string bench_model, bench_csv;
    std::vector<std::string> bench_inputs, bench_truths;
    std::vector<std::string> bench_methods{"svm", "canny", "sobel"};
    int bench_repeats = 3;
    svmedge::DetectorConfig bench_cfg;
    bench_cmd->add_option("-i,--input", bench_inputs, "input PGM (repeatable)")->required();
    bench_cmd->add_option("--truth", bench_truths, "truth PGM per input (repeatable)");
    bench_cmd->add_option("-m,--model", bench_model, "trained model file (for svm)");
    bench_cmd->add_option("--methods", bench_methods, "subset of svm, canny, sobel")
        ->delimiter(',');
    bench_cmd->add_option("--repeats", bench_repeats, "repetitions per cell (>= 3)");
    bench_cmd->add_option("-o,--output", bench_csv, "CSV report path");
    bench_cmd->add_option("--threshold", bench_cfg.svm_threshold, "svm decision cutoff");
    bench_cmd->add_option("--workers", workers, "worker threads");

    auto* gen_cmd = app.add_subcommand("gen-patches", "write synthetic patches + truth maps");
    std::string gen_prefix;
    std::vector<std::string> gen_orients{"vertical", "horizontal", "diagonal-main",
                                         "diagonal-anti"};
    gen_cmd->add_option("-o,--output", gen_prefix, "output path prefix")->required();
    gen_cmd->add_option("--orientation", gen_orients, "orientations to generate")
        ->delimiter(',');
    gen_cmd->add_option("--patch-size", params.patch_size, "patch side length");
    gen_cmd->add_option("--mean-diff", params.mean_diff, "zone mean difference");
    gen_cmd->add_option("--noise-amp", params.noise_amp, "uniform noise half-range");
    gen_cmd->add_option("--seed", params.seed, "generation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed())
            return cmd_train(params, train_output);
        if (detect_cmd->parsed())
            return cmd_detect(detect_model, detect_input, detect_output, detect_threshold,
                              detect_truth, workers, detect_raw);
        if (compare_cmd->parsed())
            return cmd_compare(cmp_model, cmp_input, cmp_methods, cmp_stem, cmp_cfg, cmp_truth,
                               workers);
        if (bench_cmd->parsed())
            return cmd_bench(bench_model, bench_inputs, bench_truths, bench_methods,
                             bench_repeats, bench_csv, bench_cfg, workers);
        if (gen_cmd->parsed())
            return cmd_gen_patches(params, gen_prefix, gen_orients);
    } catch (const svmedge::convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const svmedge::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const svmedge::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
