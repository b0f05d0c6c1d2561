#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "svmedge/kernels.hpp"

namespace svmedge {

struct TrainingSet {
    std::vector<FeatureVector> vectors;
    std::vector<int> labels; ///< +1 / -1
    std::string source;      ///< free-text provenance tag

    std::size_t size() const { return vectors.size(); }

    void validate() const {
        if (vectors.size() != labels.size())
            throw std::invalid_argument("TrainingSet: vectors and labels length mismatch");
        if (vectors.size() < 2)
            throw std::invalid_argument("TrainingSet: need at least two samples");
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != 1 && labels[i] != -1)
                throw std::invalid_argument("TrainingSet: labels must be +1 or -1");
            if (!vectors[i].finite())
                throw std::invalid_argument("TrainingSet: non-finite feature vector");
            (labels[i] == 1 ? pos : neg) = true;
        }
        if (!pos || !neg)
            throw std::invalid_argument("TrainingSet: both classes must be present");
    }
};

struct QpSolution {
    std::vector<double> alphas;  ///< length N, 0 <= alpha_i <= C
    double objective = 0.0;      ///< 0.5 a'Ha - sum(a) at the returned point
    long iterations = 0;
    double kkt_residual = 0.0;   ///< maximal-violating-pair gap at exit
    bool converged = false;
};

struct SolveOptions {
    double tol = 1e-3;
    long max_iter = 0;                 ///< 0 means 100 * N
    std::size_t dense_gram_cap = 4096; ///< above this, kernel rows are computed on demand
    /// Called after every working-set update with the current dual objective.
    std::function<void(long iter, double objective)> on_iteration;
};

class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& msg, QpSolution partial)
        : std::runtime_error(msg), solution(std::move(partial)) {}

    QpSolution solution;
    double residual() const { return solution.kkt_residual; }
};

namespace detail {

// Kernel access that switches between a precomputed dense matrix and
// on-demand evaluation once N exceeds the configured cap.
class KernelSource {
public:
    KernelSource(const KernelSpec& spec, std::span<const FeatureVector> x, std::size_t cap)
        : spec_(spec), x_(x) {
        if (x.size() <= cap)
            dense_ = kernel_matrix(spec, x);
    }

    double operator()(int i, int j) const {
        if (dense_.n > 0)
            return dense_.at(i, j);
        return kernel_eval(spec_, x_[i], x_[j]);
    }

private:
    const KernelSpec& spec_;
    std::span<const FeatureVector> x_;
    SquareMatrix dense_;
};

} // namespace detail

/// Solve the soft-margin dual
///     min 0.5 a'Ha - sum(a)   s.t.  sum(a_i y_i) = 0,  0 <= a_i <= C
/// by pairwise working-set decomposition: pick the maximal violating pair,
/// solve the two-variable subproblem analytically, clip to the box, repeat
/// until the pair gap falls below tol. Ties in pair selection go to the
/// lowest index, so the run is fully deterministic.
inline QpSolution solve_dual(const TrainingSet& ts, const KernelSpec& kernel, double c,
                             const SolveOptions& opts = {}) {
    ts.validate();
    kernel.validate();
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("solve_dual: C must be positive and finite");
    if (!(opts.tol > 0.0))
        throw std::invalid_argument("solve_dual: tol must be positive");

    const int n = static_cast<int>(ts.size());
    const long max_iter = opts.max_iter > 0 ? opts.max_iter : 100L * n;
    const detail::KernelSource k(kernel, ts.vectors, opts.dense_gram_cap);

    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
        y[i] = static_cast<double>(ts.labels[i]);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // gradient of the dual at alpha = 0
    constexpr double kTau = 1e-12;

    auto objective = [&]() {
        // 0.5 a'Ha - sum(a) = 0.5 * sum(a_i (g_i - 1))
        double obj = 0.0;
        for (int i = 0; i < n; ++i)
            obj += alpha[i] * (grad[i] - 1.0);
        return 0.5 * obj;
    };

    // Maximal violating pair. I_up holds indices whose y-weighted alpha can
    // still increase, I_low those that can decrease; ties keep the lowest
    // index. gap <= 0 means the KKT conditions hold exactly.
    struct Pair {
        int i = -1;
        int j = -1;
        double gap = -std::numeric_limits<double>::infinity();
    };
    auto select_pair = [&]() {
        Pair p;
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool in_up = (y[t] > 0.0) ? (alpha[t] < c) : (alpha[t] > 0.0);
            const bool in_low = (y[t] > 0.0) ? (alpha[t] > 0.0) : (alpha[t] < c);
            if (in_up && v > up_max) {
                up_max = v;
                p.i = t;
            }
            if (in_low && v < low_min) {
                low_min = v;
                p.j = t;
            }
        }
        if (p.i >= 0 && p.j >= 0)
            p.gap = up_max - low_min;
        return p;
    };

    QpSolution sol;
    long iter = 0;
    double gap = -std::numeric_limits<double>::infinity();
    bool converged = true;

    while (true) {
        const Pair p = select_pair();
        gap = p.gap;
        if (p.i < 0 || p.j < 0 || gap <= opts.tol)
            break;
        if (iter >= max_iter) {
            converged = false;
            break;
        }
        const int i = p.i, j = p.j;

        const double kii = k(i, i), kjj = k(j, j), kij = k(i, j);
        const double old_ai = alpha[i], old_aj = alpha[j];

        if (ts.labels[i] != ts.labels[j]) {
            double quad = kii + kjj + 2.0 * kij * y[i] * y[j]; // = kii + kjj - 2 kij
            if (quad <= 0.0)
                quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0.0)
                quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double di = alpha[i] - old_ai;
        const double dj = alpha[j] - old_aj;
        // Update the gradient with the lower index first so that runs that
        // select the pair in either order accumulate identically.
        const int a = std::min(i, j), b = std::max(i, j);
        const double da = (a == i) ? di : dj;
        const double db = (b == j) ? dj : di;
        for (int t = 0; t < n; ++t)
            grad[t] += y[t] * (y[a] * k(a, t) * da + y[b] * k(b, t) * db);

        ++iter;
        if (opts.on_iteration)
            opts.on_iteration(iter, objective());
    }

    sol.alphas = std::move(alpha);
    sol.iterations = iter;
    sol.kkt_residual = std::max(0.0, std::isfinite(gap) ? gap : 0.0);
    sol.converged = converged;
    {
        double obj = 0.0;
        for (int t = 0; t < n; ++t)
            obj += sol.alphas[t] * (grad[t] - 1.0);
        sol.objective = 0.5 * obj;
    }
    return sol;
}

namespace detail {

// f_i without bias: sum_j alpha_j y_j k(x_j, x_i).
inline std::vector<double> margins_without_bias(const TrainingSet& ts, const KernelSpec& kernel,
                                                std::span<const double> alphas) {
    const int n = static_cast<int>(ts.size());
    std::vector<double> f(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            if (alphas[j] == 0.0)
                continue;
            s += alphas[j] * static_cast<double>(ts.labels[j]) *
                 kernel_eval(kernel, ts.vectors[j], ts.vectors[i]);
        }
        f[i] = s;
    }
    return f;
}

struct BiasEstimate {
    double bias = 0.0;
    int unbounded = 0; // number of strictly interior support vectors used
    bool any_sv = false;
};

// Average y_i - f_i over interior support vectors; if none, take the
// midpoint of the feasible bias interval implied by the bound constraints.
inline BiasEstimate estimate_bias(const TrainingSet& ts, const KernelSpec& kernel,
                                  std::span<const double> alphas, double c) {
    const int n = static_cast<int>(ts.size());
    const double bound_eps = 1e-10 * std::max(1.0, c);
    const std::vector<double> f = margins_without_bias(ts, kernel, alphas);

    BiasEstimate est;
    double sum = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double e = static_cast<double>(ts.labels[i]) - f[i];
        const bool at_zero = alphas[i] <= bound_eps;
        const bool at_c = alphas[i] >= c - bound_eps;
        if (!at_zero)
            est.any_sv = true;
        if (!at_zero && !at_c) {
            sum += e;
            ++est.unbounded;
        } else if ((ts.labels[i] > 0 && at_zero) || (ts.labels[i] < 0 && at_c)) {
            lower = std::max(lower, e); // b >= e keeps y f >= 1 (resp. allows y f <= 1)
        } else {
            upper = std::min(upper, e);
        }
    }
    if (est.unbounded > 0) {
        est.bias = sum / static_cast<double>(est.unbounded);
    } else {
        const double lo = std::isfinite(lower) ? lower : (std::isfinite(upper) ? upper : 0.0);
        const double hi = std::isfinite(upper) ? upper : (std::isfinite(lower) ? lower : 0.0);
        est.bias = 0.5 * (lo + hi);
    }
    return est;
}

} // namespace detail

/// Bias of the decision function: mean of y_i - f_i over unbounded support
/// vectors, falling back to the midpoint of the feasible interval when every
/// support vector sits on the box boundary. Throws if there are no support
/// vectors at all.
inline double compute_bias(const TrainingSet& ts, const KernelSpec& kernel,
                           const QpSolution& sol, double c) {
    if (sol.alphas.size() != ts.size())
        throw std::invalid_argument("compute_bias: solution size mismatch");
    const auto est = detail::estimate_bias(ts, kernel, sol.alphas, c);
    if (!est.any_sv)
        throw std::invalid_argument("compute_bias: no support vectors");
    return est.bias;
}

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::string params; ///< free-form description of the data generation setup
    std::chrono::system_clock::time_point trained_at{}; ///< informational; never serialized
};

struct SvmModel {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> alphas; ///< retained dual coefficients, in (0, C]
    std::vector<int> sv_labels;
    double bias = 0.0;
    KernelSpec kernel;
    double c_param = 10.0;
    TrainingMeta meta;

    std::size_t sv_count() const { return support_vectors.size(); }

    void validate() const {
        if (support_vectors.empty())
            throw std::invalid_argument("SvmModel: no support vectors");
        if (support_vectors.size() != alphas.size() || alphas.size() != sv_labels.size())
            throw std::invalid_argument("SvmModel: field length mismatch");
        kernel.validate();
        if (!(c_param > 0.0))
            throw std::invalid_argument("SvmModel: C must be positive");
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (!(alphas[i] > 0.0) || alphas[i] > c_param * (1.0 + 1e-12))
                throw std::invalid_argument("SvmModel: alpha outside (0, C]");
            if (sv_labels[i] != 1 && sv_labels[i] != -1)
                throw std::invalid_argument("SvmModel: labels must be +1 or -1");
            if (!support_vectors[i].finite() || !std::isfinite(alphas[i]))
                throw std::invalid_argument("SvmModel: non-finite value");
        }
        if (!std::isfinite(bias))
            throw std::invalid_argument("SvmModel: non-finite bias");
    }
};

/// Raw decision value sum_i alpha_i y_i k(sv_i, x) + b. Callers threshold;
/// the sign is the class. Safe to call concurrently on a shared model.
inline double decision_value(const SvmModel& model, const FeatureVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        s += model.alphas[i] * static_cast<double>(model.sv_labels[i]) *
             kernel_eval(model.kernel, model.support_vectors[i], x);
    return s + model.bias;
}

struct TrainOptions {
    double c = 10.0;
    double tol = 1e-3;
    long max_iter = 0;          ///< 0 means 100 * N
    double alpha_cutoff = 1e-8; ///< smaller alphas are dropped from the model
    std::size_t dense_gram_cap = 4096;
    std::uint64_t seed = 0;     ///< recorded in the model metadata
    std::string params;         ///< recorded in the model metadata
};

/// Train a soft-margin SVM: solve the dual, compute the bias, keep the
/// support vectors. For the centroid kernel the centroid is computed from
/// the training vectors here and frozen into the model's KernelSpec.
/// When solver_stats is given it receives the full dual solution.
inline SvmModel train(const TrainingSet& ts, KernelSpec kernel, const TrainOptions& opts = {},
                      QpSolution* solver_stats = nullptr) {
    ts.validate();
    if (kernel.kind == KernelKind::Centroid)
        kernel.centroid = centroid_of(ts.vectors);
    kernel.validate();

    SolveOptions sopts;
    sopts.tol = opts.tol;
    sopts.max_iter = opts.max_iter;
    sopts.dense_gram_cap = opts.dense_gram_cap;
    QpSolution sol = solve_dual(ts, kernel, opts.c, sopts);
    if (solver_stats)
        *solver_stats = sol;
    if (!sol.converged)
        throw convergence_error("train: solver did not converge (residual " +
                                    std::to_string(sol.kkt_residual) + " after " +
                                    std::to_string(sol.iterations) + " iterations)",
                                std::move(sol));

    SvmModel model;
    model.kernel = kernel;
    model.c_param = opts.c;
    model.bias = compute_bias(ts, kernel, sol, opts.c);
    for (std::size_t i = 0; i < sol.alphas.size(); ++i) {
        if (sol.alphas[i] > opts.alpha_cutoff) {
            model.support_vectors.push_back(ts.vectors[i]);
            model.alphas.push_back(sol.alphas[i]);
            model.sv_labels.push_back(ts.labels[i]);
        }
    }
    model.meta.seed = opts.seed;
    model.meta.params = opts.params.empty() ? ts.source : opts.params;
    model.meta.trained_at = std::chrono::system_clock::now();
    model.validate();
    return model;
}

struct KktReport {
    double max_violation = 0.0;
    double worst_lower = 0.0;    ///< alpha = 0 class: max(0, 1 - y f)
    double worst_interior = 0.0; ///< 0 < alpha < C class: |1 - y f|
    double worst_upper = 0.0;    ///< alpha = C class: max(0, y f - 1)
    double bias = 0.0;           ///< bias used for the margin evaluation
    bool passed = false;         ///< max_violation <= tol
};

/// Classify every alpha against the box and measure how far y_i f(x_i)
/// strays from the margin condition of its class.
inline KktReport kkt_check(const TrainingSet& ts, const KernelSpec& kernel,
                           const QpSolution& sol, double c, double tol) {
    if (sol.alphas.size() != ts.size())
        throw std::invalid_argument("kkt_check: solution size mismatch");
    const int n = static_cast<int>(ts.size());
    const double bound_eps = 1e-10 * std::max(1.0, c);
    const std::vector<double> f0 = detail::margins_without_bias(ts, kernel, sol.alphas);
    const double b = detail::estimate_bias(ts, kernel, sol.alphas, c).bias;

    KktReport rep;
    rep.bias = b;
    for (int i = 0; i < n; ++i) {
        const double yf = static_cast<double>(ts.labels[i]) * (f0[i] + b);
        const bool at_zero = sol.alphas[i] <= bound_eps;
        const bool at_c = sol.alphas[i] >= c - bound_eps;
        if (at_zero)
            rep.worst_lower = std::max(rep.worst_lower, 1.0 - yf);
        else if (at_c)
            rep.worst_upper = std::max(rep.worst_upper, yf - 1.0);
        else
            rep.worst_interior = std::max(rep.worst_interior, std::abs(yf - 1.0));
    }
    rep.worst_lower = std::max(0.0, rep.worst_lower);
    rep.worst_upper = std::max(0.0, rep.worst_upper);
    rep.max_violation = std::max({rep.worst_lower, rep.worst_interior, rep.worst_upper});
    rep.passed = rep.max_violation <= tol;
    return rep;
}

/// Fraction of training samples whose decision sign matches their label.
inline double training_accuracy(const SvmModel& model, const TrainingSet& ts) {
    if (ts.size() == 0)
        return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double v = decision_value(model, ts.vectors[i]);
        const int predicted = v > 0.0 ? 1 : -1;
        if (predicted == ts.labels[i])
            ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(ts.size());
}

} // namespace svmedge
