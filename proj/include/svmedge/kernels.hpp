#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svmedge {

/// Per-pixel feature: horizontal, vertical and mean-diagonal intensity
/// differences, each in [-1, 1] when produced by the extractor.
struct FeatureVector {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

    bool finite() const {
        return std::isfinite(c1) && std::isfinite(c2) && std::isfinite(c3);
    }
};

/// Squared Euclidean distance from v to g.
inline double radius_square(const FeatureVector& v, const FeatureVector& g) {
    const double d1 = v.c1 - g.c1;
    const double d2 = v.c2 - g.c2;
    const double d3 = v.c3 - g.c3;
    return d1 * d1 + d2 * d2 + d3 * d3;
}

/// Component-wise arithmetic mean. Throws on an empty input.
inline FeatureVector centroid_of(std::span<const FeatureVector> vectors) {
    if (vectors.empty())
        throw std::invalid_argument("centroid_of: empty vector list");
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (const auto& v : vectors) {
        s1 += v.c1;
        s2 += v.c2;
        s3 += v.c3;
    }
    const double n = static_cast<double>(vectors.size());
    return {s1 / n, s2 / n, s3 / n};
}

enum class KernelKind {
    Rbf3,     ///< exp(-|u-v|^2 / 2 sigma^2) on 3-vectors
    Centroid, ///< rank-one product of per-vector radial maps around a frozen centroid
    Linear,   ///< plain dot product; solver-test utility, not a detection option
};

inline std::string to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::Rbf3: return "rbf3";
    case KernelKind::Centroid: return "centroid";
    case KernelKind::Linear: return "linear";
    }
    return "?";
}

inline KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "rbf3") return KernelKind::Rbf3;
    if (name == "centroid") return KernelKind::Centroid;
    if (name == "linear") return KernelKind::Linear;
    throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf3;
    double sigma = 0.6;
    std::optional<FeatureVector> centroid; ///< present iff kind == Centroid

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw std::invalid_argument("KernelSpec: sigma must be positive and finite");
        if (kind == KernelKind::Centroid) {
            if (!centroid.has_value())
                throw std::invalid_argument("KernelSpec: centroid kernel requires a centroid");
            if (!centroid->finite())
                throw std::invalid_argument("KernelSpec: centroid must be finite");
        }
    }

    static KernelSpec rbf3(double sigma = 0.6) { return {KernelKind::Rbf3, sigma, std::nullopt}; }
    static KernelSpec linear() { return {KernelKind::Linear, 1.0, std::nullopt}; }
    static KernelSpec centroid_kernel(double sigma, FeatureVector g) {
        return {KernelKind::Centroid, sigma, g};
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Evaluate the kernel. Rbf3 and Centroid values lie in (0, 1]; all kinds
/// are symmetric in (u, v). The centroid kind is the rank-one product
/// phi(u) * phi(v) with phi(x) = exp(-radius_square(x, g) / 2 sigma^2).
inline double kernel_eval(const KernelSpec& spec, const FeatureVector& u,
                          const FeatureVector& v) {
    switch (spec.kind) {
    case KernelKind::Rbf3: {
        const double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
        return std::exp(-radius_square(u, v) * inv);
    }
    case KernelKind::Centroid: {
        const FeatureVector& g = *spec.centroid;
        const double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
        const double phi_u = std::exp(-radius_square(u, g) * inv);
        const double phi_v = std::exp(-radius_square(v, g) * inv);
        return phi_u * phi_v;
    }
    case KernelKind::Linear:
        return u.c1 * v.c1 + u.c2 * v.c2 + u.c3 * v.c3;
    }
    throw std::logic_error("kernel_eval: unhandled kernel kind");
}

/// Dense square matrix, row-major.
struct SquareMatrix {
    int n = 0;
    std::vector<double> a;

    SquareMatrix() = default;
    explicit SquareMatrix(int size)
        : n(size), a(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// Unlabeled kernel matrix K[i][j] = k(x_i, x_j).
inline SquareMatrix kernel_matrix(const KernelSpec& spec,
                                  std::span<const FeatureVector> vectors) {
    spec.validate();
    const int n = static_cast<int>(vectors.size());
    SquareMatrix k(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = kernel_eval(spec, vectors[i], vectors[j]);
            k.at(i, j) = v;
            k.at(j, i) = v;
        }
    }
    return k;
}

/// QP Hessian H[i][j] = y_i * y_j * k(x_i, x_j).
inline SquareMatrix gram_matrix(const KernelSpec& spec, std::span<const FeatureVector> vectors,
                                std::span<const int> labels) {
    if (vectors.size() != labels.size())
        throw std::invalid_argument("gram_matrix: vectors and labels length mismatch");
    if (vectors.empty())
        throw std::invalid_argument("gram_matrix: empty input");
    SquareMatrix h = kernel_matrix(spec, vectors);
    for (int i = 0; i < h.n; ++i)
        for (int j = 0; j < h.n; ++j)
            h.at(i, j) *= static_cast<double>(labels[i] * labels[j]);
    return h;
}

} // namespace svmedge
