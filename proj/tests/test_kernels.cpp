#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "support/test_helpers.hpp"
#include "svmedge/kernels.hpp"

using namespace svmedge;

TEST_CASE("centroid_of takes the component-wise mean") {
    const std::vector<FeatureVector> pair = {{0, 0, 0}, {2, 2, 2}};
    CHECK(centroid_of(pair) == FeatureVector{1, 1, 1});

    const std::vector<FeatureVector> single = {{0.3, -0.7, 0.1}};
    CHECK(centroid_of(single) == FeatureVector{0.3, -0.7, 0.1});

    const std::vector<FeatureVector> basis = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const FeatureVector g = centroid_of(basis);
    CHECK(g.c1 == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(g.c2 == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(g.c3 == Catch::Approx(1.0 / 3.0).margin(1e-15));

    CHECK_THROWS_AS(centroid_of(std::vector<FeatureVector>{}), std::invalid_argument);
}

TEST_CASE("radius_square is the squared distance to the centroid") {
    CHECK(radius_square({0.4, -0.2, 0.9}, {0.4, -0.2, 0.9}) == 0.0);
    CHECK(radius_square({0, 0, 0}, {1, 1, 1}) == 3.0);
    CHECK(radius_square({0.5, 0, 0}, {0, 0, 0}) == 0.25);
}

TEST_CASE("kernel_eval matches hand-computed values") {
    const KernelSpec rbf = KernelSpec::rbf3(0.6);

    SECTION("rbf3 self-similarity is exactly 1") {
        std::mt19937_64 eng(7);
        for (int i = 0; i < 20; ++i) {
            const FeatureVector v = testutil::random_vector(eng);
            CHECK(kernel_eval(rbf, v, v) == 1.0);
        }
    }

    SECTION("rbf3 at unit distance, sigma 0.6") {
        const double k = kernel_eval(rbf, {0, 0, 0}, {0, 0, 1});
        CHECK(k == Catch::Approx(std::exp(-1.0 / 0.72)).epsilon(1e-14));
        CHECK(k == Catch::Approx(0.249352).margin(1e-6));
    }

    SECTION("centroid kernel composes the radial map per argument") {
        const KernelSpec spec = KernelSpec::centroid_kernel(0.6, {1, 1, 1});
        const double k = kernel_eval(spec, {0, 0, 0}, {0, 0, 0});
        const double phi = std::exp(-3.0 / 0.72); // radius_square = 3
        CHECK(k == Catch::Approx(phi * phi).epsilon(1e-14));
        CHECK(k == Catch::Approx(2.4e-4).margin(1e-5));
    }

    SECTION("linear kernel is the dot product") {
        CHECK(kernel_eval(KernelSpec::linear(), {1, 2, 3}, {4, -5, 6}) == 4.0 - 10.0 + 18.0);
    }
}

TEST_CASE("kernel symmetry is exact for all kinds") {
    std::mt19937_64 eng(11);
    const auto vectors = testutil::random_vectors(eng, 8);
    const KernelSpec specs[] = {KernelSpec::rbf3(0.6), KernelSpec::linear(),
                                KernelSpec::centroid_kernel(0.6, centroid_of(vectors))};
    for (const auto& spec : specs)
        for (const auto& u : vectors)
            for (const auto& v : vectors)
                CHECK(kernel_eval(spec, u, v) == kernel_eval(spec, v, u));
}

TEST_CASE("rbf3 and centroid values stay in (0, 1]") {
    std::mt19937_64 eng(13);
    const auto vectors = testutil::random_vectors(eng, 16);
    const KernelSpec specs[] = {KernelSpec::rbf3(0.6), KernelSpec::rbf3(1.5),
                                KernelSpec::centroid_kernel(0.6, centroid_of(vectors)),
                                KernelSpec::centroid_kernel(0.3, centroid_of(vectors))};
    for (const auto& spec : specs)
        for (const auto& u : vectors)
            for (const auto& v : vectors) {
                const double k = kernel_eval(spec, u, v);
                CHECK(k > 0.0);
                CHECK(k <= 1.0);
            }
}

TEST_CASE("centroid kernel satisfies the rank-one identity") {
    std::mt19937_64 eng(17);
    const auto vectors = testutil::random_vectors(eng, 12);
    const KernelSpec spec = KernelSpec::centroid_kernel(0.6, centroid_of(vectors));
    for (const auto& u : vectors)
        for (const auto& v : vectors) {
            const double kuv = kernel_eval(spec, u, v);
            const double kuu = kernel_eval(spec, u, u);
            const double kvv = kernel_eval(spec, v, v);
            CHECK(std::abs(kuv * kuv - kuu * kvv) <= 1e-12);
        }
}

namespace {

// Independent PSD oracle: eigen-decomposition of the unlabeled kernel matrix.
double min_eigenvalue(const SquareMatrix& k) {
    Eigen::MatrixXd m(k.n, k.n);
    for (int i = 0; i < k.n; ++i)
        for (int j = 0; j < k.n; ++j)
            m(i, j) = k.at(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    return solver.eigenvalues().minCoeff();
}

} // namespace

TEST_CASE("kernel matrices are positive semidefinite") {
    std::mt19937_64 eng(19);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(eng() % 31);
        const auto vectors = testutil::random_vectors(eng, n);
        const double sigma = testutil::uniform(eng, 0.3, 1.5);
        CHECK(min_eigenvalue(kernel_matrix(KernelSpec::rbf3(sigma), vectors)) >= -1e-8);
        CHECK(min_eigenvalue(kernel_matrix(
                  KernelSpec::centroid_kernel(sigma, centroid_of(vectors)), vectors)) >= -1e-8);
    }
}

TEST_CASE("gram_matrix applies the label outer product") {
    const KernelSpec rbf = KernelSpec::rbf3(0.6);

    SECTION("identical points, equal labels: all ones") {
        const std::vector<FeatureVector> x = {{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}};
        const std::vector<int> y = {1, 1};
        const SquareMatrix h = gram_matrix(rbf, x, y);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(h.at(i, j) == 1.0);
    }

    SECTION("identical points, opposite labels: sign pattern") {
        const std::vector<FeatureVector> x = {{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}};
        const std::vector<int> y = {1, -1};
        const SquareMatrix h = gram_matrix(rbf, x, y);
        CHECK(h.at(0, 0) == 1.0);
        CHECK(h.at(1, 1) == 1.0);
        CHECK(h.at(0, 1) == -1.0);
        CHECK(h.at(1, 0) == -1.0);
    }

    SECTION("element-wise equals labels outer product times K") {
        std::mt19937_64 eng(23);
        const auto x = testutil::random_vectors(eng, 8);
        std::vector<int> y(8);
        for (auto& v : y)
            v = (eng() & 1) ? 1 : -1;
        const SquareMatrix k = kernel_matrix(rbf, x);
        const SquareMatrix h = gram_matrix(rbf, x, y);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                CHECK(h.at(i, j) == y[i] * y[j] * k.at(i, j));
    }

    SECTION("length mismatch is rejected") {
        const std::vector<FeatureVector> x = {{0, 0, 0}};
        const std::vector<int> y = {1, -1};
        CHECK_THROWS_AS(gram_matrix(rbf, x, y), std::invalid_argument);
    }
}

TEST_CASE("kernel spec validation") {
    CHECK_THROWS_AS(KernelSpec::rbf3(0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::rbf3(-1.0).validate(), std::invalid_argument);
    KernelSpec missing_centroid{KernelKind::Centroid, 0.6, std::nullopt};
    CHECK_THROWS_AS(missing_centroid.validate(), std::invalid_argument);
    CHECK_NOTHROW(KernelSpec::centroid_kernel(0.6, {0, 0, 0}).validate());
}
