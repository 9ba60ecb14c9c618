#include <catch2/catch_amalgamated.hpp>

#include "rsp/network.hpp"
#include "rsp/rng.hpp"
#include "rsp/spectral.hpp"

using namespace rsp;

namespace {

MatrixXd random_column_stochastic(int n, Xoshiro256pp& rng) {
    MatrixXd w(n, n);
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int h = 0; h < n; ++h) {
            w(h, j) = 0.05 + rng.uniform(); // strictly positive -> irreducible
            sum += w(h, j);
        }
        w.col(j) /= sum;
    }
    return w;
}

} // namespace

TEST_CASE("identity matrix is rejected as reducible") {
    MatrixXd eye = MatrixXd::Identity(2, 2);
    try {
        validate_network(eye);
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Reducible);
    }
}

TEST_CASE("mean-field matrix is accepted and has the stated entries") {
    WeightedNetwork net = mean_field(3, 0.5);
    CHECK_NOTHROW(validate_network(net.weights));

    WeightedNetwork n4 = mean_field(4, 0.4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(n4.weights(i, j) == Catch::Approx(i == j ? 0.7 : 0.1).margin(1e-15));

    WeightedNetwork n2 = mean_field(2, 1.0);
    CHECK(n2.weights(0, 0) == Catch::Approx(0.5));
    CHECK(n2.weights(0, 1) == Catch::Approx(0.5));

    CHECK_THROWS_AS(mean_field(3, 0.0), Error);
    CHECK_THROWS_AS(mean_field(3, 1.5), Error);
}

TEST_CASE("mean-field output is symmetric and doubly stochastic in range") {
    for (int n : {2, 3, 7, 15})
        for (double alpha : {0.1, 0.5, 1.0}) {
            MatrixXd w = mean_field(n, alpha).weights;
            CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
            for (int j = 0; j < n; ++j) {
                CHECK(w.col(j).sum() == Catch::Approx(1.0).margin(1e-15));
                CHECK(w.row(j).sum() == Catch::Approx(1.0).margin(1e-15));
            }
        }
}

TEST_CASE("hand-checked 2x2 column-stochastic matrix validates") {
    MatrixXd w(2, 2);
    w << 0.5, 0.7, 0.5, 0.3;
    CHECK_NOTHROW(validate_network(w));
}

TEST_CASE("negative entry and bad column sums are reported first") {
    MatrixXd w(2, 2);
    w << 0.5, 0.7, 0.5, 0.3;
    MatrixXd neg = w;
    neg(0, 0) = -0.1;
    neg(1, 0) = 1.1;
    try {
        validate_network(neg);
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NegativeEntry);
    }
    MatrixXd bad = w;
    bad(0, 1) = 0.8; // column 1 sums to 1.1
    try {
        validate_network(bad);
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ColumnNotStochastic);
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
}

TEST_CASE("N = 1 degenerate network validates and decomposes") {
    MatrixXd w(1, 1);
    w << 1.0;
    WeightedNetwork net = validate_network(w);
    SpectralData spec = spectral_decompose(net);
    CHECK(spec.eigenvalues[0] == cx(1.0, 0.0));
    CHECK(spec.v1_norm_sq == Catch::Approx(1.0));
}

TEST_CASE("mean-field spectrum: lambda_1 = 1, lambda_j = 1 - alpha") {
    for (double alpha : {0.3, 0.5, 0.8}) {
        WeightedNetwork net = mean_field(5, alpha);
        SpectralData spec = spectral_decompose(net);
        CHECK(spec.eigenvalues[0].real() == 1.0);
        for (int j = 1; j < 5; ++j) {
            CHECK(spec.eigenvalues[j].real() == Catch::Approx(1.0 - alpha).margin(1e-12));
            CHECK(std::abs(spec.eigenvalues[j].imag()) < 1e-12);
        }
        // doubly stochastic: v_1 = u_1 = N^{-1/2} 1, so ||v_1||^2 = 1
        CHECK(spec.v1_norm_sq == Catch::Approx(1.0).margin(1e-12));
        CHECK(spec.a_star == Catch::Approx(alpha).margin(1e-12));
    }
}

TEST_CASE("mean-field(2, 0.5): u_1 = v_1 = (1,1)/sqrt(2), lambda = {1, 0.5}") {
    SpectralData spec = spectral_decompose(mean_field(2, 0.5));
    CHECK(spec.eigenvalues[1].real() == Catch::Approx(0.5).margin(1e-12));
    double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < 2; ++i) {
        CHECK(spec.U(i, 0).real() == Catch::Approx(s).margin(1e-12));
        CHECK(spec.V(i, 0).real() == Catch::Approx(s).margin(1e-12));
    }
}

TEST_CASE("2x2 asymmetric: lambda_2 from the trace, left-eigenvector residual") {
    MatrixXd w(2, 2);
    w << 0.5, 0.7, 0.5, 0.3;
    SpectralData spec = spectral_decompose(validate_network(w));
    CHECK(spec.eigenvalues[1].real() == Catch::Approx(-0.2).margin(1e-12));
    VectorXcd lhs = w.transpose() * spec.U.col(1);
    VectorXcd rhs = spec.eigenvalues[1] * spec.U.col(1);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    // v_1 strictly positive, N^{-1/2} 1^T v_1 = 1
    cx one_v1 = spec.V.col(0).sum() / std::sqrt(2.0);
    CHECK(one_v1.real() == Catch::Approx(1.0).margin(1e-10));
    CHECK(spec.v1_norm_sq >= 1.0 - 1e-10);
    CHECK(spec.v1_norm_sq <= 2.0 + 1e-10);
}

TEST_CASE("biorthogonality, completeness and reconstruction on random networks") {
    Xoshiro256pp rng(12345);
    for (int rep = 0; rep < 25; ++rep) {
        int n = 2 + static_cast<int>(rng.uniform() * 19);
        MatrixXd w = random_column_stochastic(n, rng);
        SpectralData spec = spectral_decompose(validate_network(w));

        MatrixXcd eye = MatrixXcd::Identity(n, n);
        CHECK((spec.U.transpose() * spec.V - eye).cwiseAbs().maxCoeff() < 1e-10);
        // sum_j u_j v_j^T = I
        CHECK((spec.U * spec.V.transpose() - eye).cwiseAbs().maxCoeff() < 1e-10);
        // sum_j lambda_j v_j u_j^T rebuilds W
        MatrixXcd rebuilt =
            spec.V * spec.eigenvalues.asDiagonal() * spec.U.transpose();
        CHECK((rebuilt - w.cast<cx>()).cwiseAbs().maxCoeff() < 1e-9);
        // unit-norm left eigenvectors
        for (int j = 0; j < n; ++j) CHECK(spec.U.col(j).norm() == Catch::Approx(1.0).margin(1e-12));
        CHECK(spec.v1_norm_sq >= 1.0 - 1e-9);
        CHECK(spec.v1_norm_sq <= double(n) + 1e-9);
    }
}

TEST_CASE("spectral_decompose is deterministic") {
    Xoshiro256pp rng(777);
    MatrixXd w = random_column_stochastic(7, rng);
    SpectralData a = spectral_decompose(validate_network(w));
    SpectralData b = spectral_decompose(validate_network(w));
    CHECK((a.U - b.U).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.V - b.V).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clt assumption checks") {
    SpectralData mf = spectral_decompose(mean_field(3, 0.4));
    // gamma = 1 with mean-field alpha = 0.4, c = 2: 2 c alpha = 1.6 > 1
    CHECK(check_clt_assumptions(mf, 1.0, 2.0, 0.8, 1.0).pass);
    // gamma = 1, c = 1, alpha = 0.4: 2 c alpha = 0.8 < 1
    CHECK_FALSE(check_clt_assumptions(mf, 1.0, 1.0, 0.8, 1.0).pass);
    // nu = 1 requires q > 1/2
    CHECK_FALSE(check_clt_assumptions(mf, 0.8, 1.0, 1.0, 0.4).pass);
    // nu = gamma with q = c alpha_j: warning, not error
    SpectralData mf5 = spectral_decompose(mean_field(3, 0.5));
    AssumptionReport rep = check_clt_assumptions(mf5, 0.8, 1.0, 0.8, 0.5);
    CHECK(rep.pass);
    CHECK_FALSE(rep.warnings.empty());
}
