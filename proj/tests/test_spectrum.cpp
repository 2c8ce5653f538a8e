#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ted/errors.hpp"
#include "ted/spectrum.hpp"

using namespace ted;

namespace {
const double kLn2 = std::log(2.0);
}

TEST_CASE("constant diagonal exponents are exact at any length") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0});
    LyapunovReport rep = lyapunov_qr(c, c.driver.initial(), 500);
    CHECK(rep.exponents[0] == doctest::Approx(kLn2).epsilon(1e-12));
    CHECK(rep.exponents[1] == doctest::Approx(-kLn2).epsilon(1e-12));
}

TEST_CASE("piecewise family exponents match the scalar Birkhoff oracle") {
    Cocycle c = oracles::remark42_cocycle(20, 0.1);
    const long n = 20000;
    LyapunovReport rep = lyapunov_qr(c, c.driver.initial(), n);

    const int i_max = 20;
    auto rate = [i_max](double x) {
        return std::exp(2.0 * remark42_piece_index(x, i_max) + 1.0);
    };
    const double top =
        oracles::birkhoff_log_average(c.driver, c.driver.initial(), n, rate);
    CHECK(rep.exponents[0] == doctest::Approx(top).epsilon(1e-9));
    CHECK(rep.exponents[1] == doctest::Approx(-kLn2).epsilon(1e-10));
    CHECK(rep.exponents[2] == doctest::Approx(-top).epsilon(1e-9));
    CHECK(rep.exponents[0] >= 3.0);
    CHECK(rep.exponents[2] <= -3.0);
}

TEST_CASE("jordan block converges at the known logarithmic speed") {
    Eigen::MatrixXd J(2, 2);
    J << 0.5, 1.0, 0.0, 0.5;
    Cocycle c{BaseDriver::golden_rotation(), make_constant_generator(J), 2};
    const long n = 20000;
    LyapunovReport rep = lyapunov_qr(c, c.driver.initial(), n);
    const double tol = 10.0 * std::log(static_cast<double>(n)) / n;
    CHECK(std::abs(rep.exponents[0] + kLn2) <= tol);
    CHECK(std::abs(rep.exponents[1] + kLn2) <= tol);
}

TEST_CASE("exponent sum equals the log-determinant average") {
    Cocycle c = oracles::remark42_cocycle(5, 0.2);
    const long n = 50000;
    LyapunovReport rep = lyapunov_qr(c, c.driver.initial(), n);
    auto det = [](double x) {
        // product of the three rates: e^{-r} * 1/2 * e^{r} = 1/2
        (void)x;
        return 0.5;
    };
    const double want =
        oracles::birkhoff_log_average(c.driver, c.driver.initial(), n, det);
    const double sum = rep.exponents[0] + rep.exponents[1] + rep.exponents[2];
    CHECK(sum == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("rank-collapsing generators are flagged") {
    Cocycle c = oracles::diag_cocycle({0.5, 0.0});
    CHECK_THROWS_AS(lyapunov_qr(c, c.driver.initial(), 10), Degenerate);
}

TEST_CASE("splitting of the constant system") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0});
    SplittingEstimate est = oseledets_split(c, c.driver.initial(), 2000);
    CHECK(est.stable_basis.cols() == 1);
    CHECK(std::abs(est.stable_basis(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(est.unstable_basis(1, 0)) == doctest::Approx(1.0));
    CHECK(est.gap == doctest::Approx(kLn2).epsilon(1e-9));
}

TEST_CASE("splitting of the piecewise family") {
    Cocycle c = oracles::remark42_cocycle(20, 0.1);
    SplittingEstimate est = oseledets_split(c, c.driver.initial(), 20000);
    CHECK(est.stable_basis.cols() == 2);
    CHECK(est.unstable_basis.cols() == 1);
    // stable span is {e1, e2}: the e3 row of the stable basis vanishes
    CHECK(est.stable_basis.row(2).norm() <= 1e-10);
    CHECK(std::abs(est.unstable_basis(2, 0)) == doctest::Approx(1.0));
}

TEST_CASE("isometries have no spectral gap") {
    Cocycle c{BaseDriver::golden_rotation(), make_planar_rotation_generator(1.0), 2};
    CHECK_THROWS_AS(oseledets_split(c, c.driver.initial(), 2000), NoGap);
}

TEST_CASE("return times of the golden rotation into [0, 1/2)") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0},
                                      BaseDriver::golden_rotation(0.1));
    CoordInterval F{0.0, 0.5};
    ReturnCocycle rc = build_return_cocycle(c, F, c.driver.initial(), 500);

    // direct orbit rescan
    BaseDriver d = BaseDriver::golden_rotation(0.1);
    BaseState cur = d.initial();
    std::vector<long> visits;
    for (long t = 1; visits.size() < 500; ++t) {
        cur = d.forward(cur);
        if (F.contains(d.coord(cur))) visits.push_back(t);
    }
    for (size_t i = 0; i < 500; ++i) CHECK(rc.tau[i] == visits[i]);
    for (size_t i = 1; i < 500; ++i) {
        const long gap = rc.tau[i] - rc.tau[i - 1];
        CHECK((gap == 1 || gap == 2));  // three-distance structure of the rotation
    }
}

TEST_CASE("full-space returns reduce to the plain cocycle") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0});
    ReturnCocycle rc = build_return_cocycle(c, CoordInterval{0.0, 1.0},
                                            c.driver.initial(), 50);
    for (long n = 1; n <= 50; ++n) CHECK(rc.tau[static_cast<size_t>(n - 1)] == n);
    KacReport kac = kac_check(rc);
    CHECK(kac.mean_return == doctest::Approx(1.0));
    CHECK(kac.kac_ratio == doctest::Approx(1.0));
}

TEST_CASE("kac ratio on the rotation at 1e5 returns") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0},
                                      BaseDriver::golden_rotation(0.1));
    ReturnCocycle rc =
        build_return_cocycle(c, CoordInterval{0.0, 0.5}, c.driver.initial(), 100000);
    KacReport kac = kac_check(rc);
    CHECK(std::abs(kac.kac_ratio - 1.0) <= 0.05);
    CHECK(kac.mean_return == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("kac ratio converges monotonically over checkpoints") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0},
                                      BaseDriver::golden_rotation(0.1));
    ReturnCocycle rc =
        build_return_cocycle(c, CoordInterval{0.0, 0.5}, c.driver.initial(), 100000);
    double prev = 1e9;
    for (long n : {1000L, 10000L, 100000L}) {
        const double mr =
            static_cast<double>(rc.tau[static_cast<size_t>(n - 1)]) / n;
        const double err = std::abs(mr * rc.empirical_PF - 1.0);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("bernoulli first-symbol returns are geometric") {
    Cocycle c{BaseDriver::bernoulli(12345, 2), make_constant_diag_generator({0.5, 2.0}),
              2};
    // F = {first symbol = 0} is the coordinate cell [0, 1/2)
    const double x0 = c.driver.coord(c.driver.initial());
    REQUIRE(x0 < 0.5);  // seed chosen so the base point lies in F
    ReturnCocycle rc =
        build_return_cocycle(c, CoordInterval{0.0, 0.5}, c.driver.initial(), 100000);
    KacReport kac = kac_check(rc);
    CHECK(kac.mean_return == doctest::Approx(2.0).epsilon(0.025));
    CHECK(std::abs(kac.kac_ratio - 1.0) <= 0.05);
}

TEST_CASE("no returns from a null set") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0},
                                      BaseDriver::golden_rotation(1e-9));
    CHECK_THROWS_AS(
        build_return_cocycle(c, CoordInterval{0.0, 1e-8}, c.driver.initial(), 50, 2000),
        NoReturn);
}

TEST_CASE("induced cocycle law") {
    Cocycle c = oracles::remark42_cocycle(3, 0.1);
    CoordInterval F{0.0, 0.7};
    ReturnCocycle rc = build_return_cocycle(c, F, c.driver.initial(), 40);
    auto phibar = [&](long n) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Identity(3, 3);
        for (long j = 0; j < n; ++j) M = rc.increments[static_cast<size_t>(j)] * M;
        return M;
    };
    // theta-bar^n omega is the orbit point at time tau_n
    for (long n : {3L, 7L}) {
        for (long m : {2L, 5L}) {
            BaseState wn = c.driver.iterate(c.driver.initial(),
                                            rc.tau[static_cast<size_t>(n - 1)]);
            ReturnCocycle rcn = build_return_cocycle(c, F, wn, m);
            Eigen::MatrixXd lhs = phibar(n + m);
            Eigen::MatrixXd rhs = Eigen::MatrixXd::Identity(3, 3);
            for (long j = 0; j < m; ++j) rhs = rcn.increments[static_cast<size_t>(j)] * rhs;
            rhs = rhs * phibar(n);
            CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, lhs.norm()));
        }
    }
}

TEST_CASE("explicit induced-cocycle constants") {
    ReturnConstants c1 = return_constants(1.0);
    CHECK(c1.h1 == doctest::Approx(3.0));
    CHECK(c1.h2 == doctest::Approx(3.0));
    CHECK(c1.n0 == 24);
    CHECK(c1.nu == doctest::Approx(1.0 / 24.0));
    CHECK(c1.Q == doctest::Approx(3.0 * std::exp(1.0)));
    CHECK(c1.n0_prime == 24);
    CHECK(c1.nu_prime == doctest::Approx(1.0 / 24.0));
    CHECK(c1.Q_prime == doctest::Approx(3.0 * std::exp(1.0)));

    // n0 recipe at a larger bound, checked against a direct scan
    ReturnConstants c2 = return_constants(2.0);
    CHECK(c2.h1 == doctest::Approx(21.0));
    long n = 1;
    while (c2.h1 * c2.h1 / (n + 1) > std::exp(-1.0)) ++n;
    CHECK(c2.n0 == n);

    double prev = 0.0;
    for (double L : {1.0, 1.5, 2.0, 3.0}) {
        ReturnConstants c = return_constants(L);
        CHECK(c.h1 > prev);
        prev = c.h1;
    }
    CHECK_THROWS_AS(return_constants(0.5), DomainError);
}

TEST_CASE("induced decay bound on stable vectors") {
    Cocycle c = oracles::diag_cocycle({0.5, 2.0});
    ReturnCocycle rc = build_return_cocycle(c, CoordInterval{0.0, 1.0},
                                            c.driver.initial(), 300);
    SplittingEstimate split = oseledets_split(c, c.driver.initial(), 2000);
    ReturnConstants consts = return_constants(3.0);
    DecayCheckReport rep = induced_decay_check(rc, split, consts);
    CHECK(rep.pass);
    CHECK(rep.max_ratio_stable <= 1.0);
    // the growth direction violates the same inequality, visibly
    CHECK(rep.max_ratio_unstable > 1.0);
}

TEST_CASE("induced decay on the piecewise family over F = [0, 0.9)") {
    Cocycle c = oracles::remark42_cocycle(20, 0.1);
    ReturnCocycle rc = build_return_cocycle(c, CoordInterval{0.0, 0.9},
                                            c.driver.initial(), 200);
    SplittingEstimate split = oseledets_split(c, c.driver.initial(), 20000);
    DecayCheckReport rep = induced_decay_check(rc, split, return_constants(3.0));
    CHECK(rep.pass);
}

TEST_CASE("spectrum route to the dichotomy") {
    SUBCASE("piecewise family") {
        Cocycle c = oracles::remark42_cocycle(20, 0.1);
        MetOptions opt;
        opt.window = 16;
        DichotomyData dich = met_dichotomy(c, c.driver.initial(), 30000, opt);
        Eigen::MatrixXd want = Eigen::MatrixXd::Zero(3, 3);
        want(0, 0) = want(1, 1) = 1.0;
        CHECK((dich.P(0) - want).norm() <= 1e-9);
        CHECK(dich.alpha >= kLn2 - 0.08);
        CHECK(dich.K_at(0) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("constant system") {
        Cocycle c = oracles::diag_cocycle({0.5, 2.0});
        MetOptions opt;
        opt.window = 10;
        DichotomyData dich = met_dichotomy(c, c.driver.initial(), 2000, opt);
        CHECK(dich.P(0)(0, 0) == doctest::Approx(1.0));
        CHECK(dich.alpha == doctest::Approx(0.9 * kLn2).epsilon(1e-9));
    }
    SUBCASE("zero exponent present") {
        Cocycle c = oracles::diag_cocycle({1.0, 2.0});
        CHECK_THROWS_AS(met_dichotomy(c, c.driver.initial(), 2000), NoGap);
    }
}

TEST_CASE("spectrum and admissibility routes agree") {
    Cocycle c = oracles::remark42_cocycle(20, 0.1);
    MetOptions mopt;
    mopt.window = 12;
    DichotomyData met = met_dichotomy(c, c.driver.initial(), 30000, mopt);
    DichotomyData det = detect_dichotomy(
        c, c.driver.initial(), 0.5, WeightSpec::constant(1.0, 0.5, -40, 40), 40);
    for (int m = -12; m <= 12; ++m)
        CHECK((met.P(m) - det.P(m)).norm() <= 1e-6);
}
