#include <doctest.h>

#include <cmath>
#include <random>

#include "ted/errors.hpp"
#include "ted/weighted.hpp"

using namespace ted;

namespace {

WindowedSequence unit_seq(int lo, int hi, int dim, double scale = 1.0) {
    WindowedSequence f(lo, hi, dim);
    for (int n = lo; n <= hi; ++n) f.at(n) = scale * Eigen::VectorXd::Unit(dim, 0);
    return f;
}

}  // namespace

TEST_CASE("constant sequence under the flat weight") {
    WeightSpec w = WeightSpec::constant(1.0, 0.0, -5, 5);
    CHECK(weighted_norm(unit_seq(-5, 5, 2), w) == doctest::Approx(1.0));
}

TEST_CASE("geometric growth cancels against the matching exponent") {
    WeightSpec w = WeightSpec::constant(1.0, std::log(2.0), -3, 3);
    WindowedSequence f(-3, 3, 2);
    for (int n = -3; n <= 3; ++n) f.at(n) = std::pow(2.0, n) * Eigen::VectorXd::Unit(2, 0);
    CHECK(weighted_norm(f, w) == doctest::Approx(1.0));
}

TEST_CASE("exponential weight is attained at the window edge") {
    std::vector<double> K;
    for (int n = -10; n <= 10; ++n) K.push_back(std::exp(0.1 * std::abs(n)));
    WeightSpec w = WeightSpec::from_samples(K, 0.0, -10);
    // direct sup evaluation
    double sup = 0.0;
    for (int n = -10; n <= 10; ++n) sup = std::max(sup, std::exp(0.1 * std::abs(n)));
    CHECK(weighted_norm(unit_seq(-10, 10, 3), w) == doctest::Approx(sup));
    CHECK(sup == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("window mismatch is an error") {
    WeightSpec w = WeightSpec::constant(1.0, 0.0, -5, 5);
    CHECK_THROWS_AS(weighted_norm(unit_seq(-4, 4, 2), w), WindowMismatch);
}

TEST_CASE("temperedness estimate") {
    SUBCASE("flat weight has zero slope") {
        WeightSpec w = WeightSpec::constant(1.0, 0.0, -20, 20);
        CHECK(temperedness_estimate(w, 5) == doctest::Approx(0.0));
    }
    SUBCASE("pure exponential reports its rate") {
        WeightSpec w = WeightSpec::deterministic(1.0, 0.05, 0.0, -30, 30);
        CHECK(temperedness_estimate(w, 10) == doctest::Approx(0.05));
    }
    SUBCASE("polynomial weight decays below any threshold") {
        const int N = 100;
        std::vector<double> K;
        for (int n = -N; n <= N; ++n) K.push_back(std::pow(1.0 + std::abs(n), 2.0));
        // direct max evaluation over |n| in [50, 100]
        double want = 0.0;
        for (int n = 50; n <= N; ++n)
            want = std::max(want, 2.0 * std::log(1.0 + n) / n);
        const double got = temperedness_estimate(K, N, 50);
        CHECK(got == doctest::Approx(want));
        CHECK(got <= 2.0 * std::log(101.0) / 50.0);
        // decreasing in N: extend the window, estimate drops
        std::vector<double> K2;
        for (int n = -2 * N; n <= 2 * N; ++n) K2.push_back(std::pow(1.0 + std::abs(n), 2.0));
        CHECK(temperedness_estimate(K2, 2 * N, 50) <= got + 1e-15);
    }
}

TEST_CASE("homogeneity of the weighted norm") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    WeightSpec w = WeightSpec::deterministic(2.0, 0.03, 0.2, -8, 8);
    WindowedSequence f(-8, 8, 3);
    for (int n = -8; n <= 8; ++n)
        for (int i = 0; i < 3; ++i) f.at(n)(i) = g(rng);
    const double base = weighted_norm(f, w);
    for (double c : {0.0, -2.5, 17.0}) {
        WindowedSequence cf = f;
        for (auto& v : cf.values) v *= c;
        CHECK(weighted_norm(cf, w) == doctest::Approx(std::abs(c) * base));
    }
}

TEST_CASE("extending by zeros never changes the norm") {
    WeightSpec w = WeightSpec::constant(1.0, 0.4, -4, 4);
    WindowedSequence f(-4, 4, 2);
    f.at(1) = Eigen::VectorXd::Constant(2, 3.0);
    const double base = weighted_norm(f, w);
    WeightSpec w2 = WeightSpec::constant(1.0, 0.4, -9, 9);
    WindowedSequence g(-9, 9, 2);
    g.at(1) = f.at(1);
    CHECK(weighted_norm(g, w2) == doctest::Approx(base));
}

TEST_CASE("signed and absolute variants agree on causal support with beta >= 0") {
    WeightSpec ws = WeightSpec::constant(1.0, 0.3, -6, 6, WeightVariant::Signed);
    WeightSpec wa = WeightSpec::constant(1.0, 0.3, -6, 6, WeightVariant::Absolute);
    WindowedSequence f(-6, 6, 2);
    for (int n = 0; n <= 6; ++n) f.at(n) = (n + 1.0) * Eigen::VectorXd::Unit(2, 1);
    CHECK(weighted_norm(f, ws) == doctest::Approx(weighted_norm(f, wa)));
}

TEST_CASE("weights must be positive") {
    CHECK_THROWS_AS(WeightSpec::constant(0.0, 0.0, -2, 2), DomainError);
    CHECK_THROWS_AS(WeightSpec::from_samples({1.0, -1.0, 1.0}, 0.0, -1), DomainError);
}
