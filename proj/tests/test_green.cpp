#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "ted/errors.hpp"
#include "ted/green.hpp"

using namespace ted;

namespace {

const double kLn2 = std::log(2.0);

DichotomyData half_two_dichotomy(int N) {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0});
    Eigen::MatrixXd P(2, 2);
    P << 1, 0, 0, 0;
    return oracles::constant_dichotomy(c, P, kLn2, 1.0, N);
}

}  // namespace

TEST_CASE("green function of the constant hyperbolic system") {
    DichotomyData dich = half_two_dichotomy(8);
    Eigen::MatrixXd G2 = green(dich, 2);
    CHECK(G2(0, 0) == doctest::Approx(0.25));
    CHECK(G2(1, 1) == doctest::Approx(0.0));
    Eigen::MatrixXd Gm1 = green(dich, -1);
    CHECK(Gm1(0, 0) == doctest::Approx(0.0));
    CHECK(Gm1(1, 1) == doctest::Approx(-0.5));
    CHECK(green(dich, 0).isApprox(dich.P(0), 1e-14));
}

TEST_CASE("green bound check is tight on the exact system") {
    DichotomyData dich = half_two_dichotomy(8);
    GreenBoundReport rep = green_bound_check(build_green_table(dich));
    CHECK(rep.pass);
    CHECK(rep.max_slack == doctest::Approx(1.0));
}

TEST_CASE("green bound holds for the piecewise family with its certified data") {
    Cocycle c = oracles::remark42_cocycle(6, 0.1);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(3, 3);
    P(0, 0) = P(1, 1) = 1.0;
    DichotomyData dich = oracles::constant_dichotomy(c, P, kLn2, 1.0, 12);
    GreenBoundReport rep = green_bound_check(build_green_table(dich));
    CHECK(rep.pass);
}

TEST_CASE("inflating the exponent fails the bound by the expected factor") {
    const int N = 8;
    DichotomyData dich = half_two_dichotomy(N);
    dich.alpha = 2.0 * kLn2;
    GreenBoundReport rep = green_bound_check(build_green_table(dich));
    CHECK_FALSE(rep.pass);
    // worst cell sits at |n-k| = 2N: slack e^{(2ln2 - ln2) 2N} = 2^{2N}
    CHECK(rep.max_slack == doctest::Approx(std::pow(2.0, 2 * N)).epsilon(1e-9));
}

TEST_CASE("delta input reproduces a green column") {
    DichotomyData dich = half_two_dichotomy(8);
    WindowedSequence f(-8, 8, 2);
    f.at(0) = Eigen::VectorXd::Unit(2, 0);
    ConvolutionResult sol = solve_convolution(dich, f);
    for (int n = -8; n <= 8; ++n) {
        if (n >= 0) {
            CHECK(sol.x.at(n)(0) == doctest::Approx(std::pow(2.0, -n)));
        } else {
            CHECK(std::abs(sol.x.at(n)(0)) < 1e-14);
        }
        CHECK(std::abs(sol.x.at(n)(1)) < 1e-14);
    }
}

TEST_CASE("zero input gives the zero solution") {
    DichotomyData dich = half_two_dichotomy(6);
    ConvolutionResult sol = solve_convolution(dich, WindowedSequence(-6, 6, 2));
    for (const auto& v : sol.x.values) CHECK(v.norm() == 0.0);
}

TEST_CASE("convolution matches the dense minimal-boundary oracle") {
    const int N = 8, pad = 20;
    DichotomyData dich = half_two_dichotomy(N);
    GreenTable table = build_green_table(dich);
    Cocycle c = oracles::diag_cocycle({0.5, 2.0});
    OrbitSegment padded = orbit(c, c.driver.initial(), -pad, pad);

    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        WindowedSequence f(-N, N, 2);
        for (int n = -N; n <= N; ++n)
            for (int i = 0; i < 2; ++i) f.at(n)(i) = g(rng);
        ConvolutionResult sol = solve_convolution(table, f);

        WindowedSequence fpad(-pad, pad, 2);
        for (int n = -N; n <= N; ++n) fpad.at(n) = f.at(n);
        WindowedSequence xo = oracles::kkt_boundary_solve(padded, fpad, 1.0, 1.0);
        for (int n = -N; n <= N; ++n)
            CHECK((sol.x.at(n) - xo.at(n)).norm() <= 1e-10);
    }
}

TEST_CASE("recurrence residual of the convolution solution") {
    const int N = 10;
    DichotomyData dich = half_two_dichotomy(N);
    GreenTable table = build_green_table(dich);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    WindowedSequence f(-N, N, 2);
    double fmax = 0.0;
    for (int n = -N; n <= N; ++n) {
        for (int i = 0; i < 2; ++i) f.at(n)(i) = g(rng);
        fmax = std::max(fmax, f.at(n).norm());
    }
    ConvolutionResult sol = solve_convolution(table, f);
    for (int n = -N; n < N; ++n)
        CHECK((sol.x.at(n + 1) - dich.A(n) * sol.x.at(n) - f.at(n + 1)).norm() <=
              1e-9 * (1.0 + fmax));
}

TEST_CASE("norm bound with the admissibility constant") {
    const int N = 12;
    DichotomyData dich = half_two_dichotomy(N);
    GreenTable table = build_green_table(dich);
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double beta : {0.0, 0.3, -0.3}) {
        const double bound = gamma_bound(kLn2, beta);
        const double bound_abs = gamma_tilde_bound(kLn2, beta);
        WeightSpec in_s = WeightSpec::constant(1.0, beta, -N, N);
        WeightSpec out_s = in_s;
        WeightSpec in_a = WeightSpec::constant(1.0, beta, -N, N, WeightVariant::Absolute);
        WeightSpec out_a = in_a;
        for (int trial = 0; trial < 30; ++trial) {
            WindowedSequence f(-N, N, 2);
            for (int n = -N; n <= N; ++n)
                for (int i = 0; i < 2; ++i) f.at(n)(i) = g(rng);
            ConvolutionResult sol = solve_convolution(table, f, beta);
            CHECK(weighted_norm(sol.x, out_s) <= bound * weighted_norm(f, in_s) + 1e-12);
            CHECK(weighted_norm(sol.x, out_a) <=
                  bound_abs * weighted_norm(f, in_a) + 1e-12);
        }
    }
}

TEST_CASE("admissibility constants") {
    SUBCASE("gamma at the symmetric point") {
        CHECK(gamma_bound(kLn2, 0.0) == doctest::Approx(3.0));
    }
    SUBCASE("gamma tends to 1 as the exponent grows") {
        CHECK(gamma_bound(50.0, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("gamma at (1, 0.5)") {
        // high-precision evaluation of the closed form
        CHECK(gamma_bound(1.0, 0.5) == doctest::Approx(4.082988165073597).epsilon(1e-13));
    }
    SUBCASE("gamma_tilde branches agree at beta = 0") {
        const double v = (1.0 + std::exp(-kLn2)) / (1.0 - std::exp(-kLn2));
        CHECK(gamma_tilde_bound(kLn2, 0.0) == doctest::Approx(v));
    }
    SUBCASE("gamma_tilde at (ln2, 0.3)") {
        const double a = kLn2 - 0.3;
        CHECK(gamma_tilde_bound(kLn2, 0.3) ==
              doctest::Approx((1.0 + std::exp(-a)) / (1.0 - std::exp(-a))));
    }
    SUBCASE("gamma_tilde is even in beta") {
        for (double b : {0.1, 0.25, 0.6}) {
            CHECK(gamma_tilde_bound(1.0, b) == doctest::Approx(gamma_tilde_bound(1.0, -b)));
        }
    }
    SUBCASE("domain errors outside |beta| < alpha") {
        CHECK_THROWS_AS(gamma_bound(0.5, 0.5), DomainError);
        CHECK_THROWS_AS(gamma_tilde_bound(0.5, -0.7), DomainError);
    }
    SUBCASE("rho_beta is the max of the two constants") {
        CHECK(rho_beta(3.0, 5.0) == doctest::Approx(5.0));
        CHECK(rho_beta(4.2, 4.2) == doctest::Approx(4.2));
        const double gp = gamma_bound(kLn2, 0.2), gm = gamma_bound(kLn2, -0.2);
        CHECK(rho_beta(gp, gm) == doctest::Approx(std::max(gp, gm)));
    }
}

TEST_CASE("green table export has the documented shape") {
    DichotomyData dich = half_two_dichotomy(2);
    GreenTable table = build_green_table(dich);
    const std::string path = "/tmp/ted_green_test.csv";
    write_green_csv(table, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "n,k,row,col,value");
    size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5u * 5u * 2u * 2u);
    std::remove(path.c_str());
}
