#include "ted/cocycle.hpp"

#include <cmath>
#include <stdexcept>

namespace ted {

Eigen::MatrixXd OrbitSegment::product(int m, int n) const {
    if (n < m) throw std::invalid_argument("OrbitSegment::product needs n >= m");
    const int d = dim();
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(d, d);
    for (int j = m; j < n; ++j) P = A(j) * P;
    return P;
}

OrbitSegment OrbitSegment::slice(int lo, int hi) const {
    if (lo < n_lo || hi > n_hi || lo > hi)
        throw std::invalid_argument("OrbitSegment::slice out of range");
    OrbitSegment s;
    s.base = state(std::min(std::max(0, lo), hi));
    s.n_lo = lo;
    s.n_hi = hi;
    s.states.assign(states.begin() + (lo - n_lo), states.begin() + (hi - n_lo) + 1);
    s.coords.assign(coords.begin() + (lo - n_lo), coords.begin() + (hi - n_lo) + 1);
    s.gen.assign(gen.begin() + (lo - n_lo), gen.begin() + (hi - n_lo));
    return s;
}

OrbitSegment orbit(const BaseDriver& driver, const BaseState& omega, int n_lo, int n_hi) {
    if (n_lo > n_hi) throw std::invalid_argument("orbit: n_lo > n_hi");
    OrbitSegment seg;
    seg.base = omega;
    seg.n_lo = n_lo;
    seg.n_hi = n_hi;
    seg.states.resize(n_hi - n_lo + 1);
    if (n_lo <= 0 && 0 <= n_hi) {
        // walk out from omega in both directions; each state is reached in
        // |n| steps, so rotation rounding stays within |n| ulp
        BaseState cur = omega;
        for (int n = 0; n <= n_hi; ++n) {
            seg.states[n - n_lo] = cur;
            cur = driver.forward(cur);
        }
        cur = omega;
        for (int n = 0; n >= n_lo; --n) {
            seg.states[n - n_lo] = cur;
            cur = driver.backward(cur);
        }
    } else {
        BaseState cur = driver.iterate(omega, n_lo);
        for (int n = n_lo; n <= n_hi; ++n) {
            seg.states[n - n_lo] = cur;
            cur = driver.forward(cur);
        }
    }
    seg.coords.reserve(seg.states.size());
    for (const BaseState& s : seg.states) seg.coords.push_back(driver.coord(s));
    return seg;
}

OrbitSegment orbit(const Cocycle& cocycle, const BaseState& omega, int n_lo, int n_hi) {
    OrbitSegment seg = orbit(cocycle.driver, omega, n_lo, n_hi);
    seg.gen.reserve(std::max(0, n_hi - n_lo));
    for (int n = n_lo; n < n_hi; ++n) seg.gen.push_back(cocycle.generator(seg.point(n)));
    return seg;
}

Eigen::MatrixXd evolve(const Cocycle& cocycle, const BaseState& omega, long n,
                       bool* overflow) {
    if (n < 0) throw std::invalid_argument("evolve: n must be >= 0");
    if (overflow) *overflow = false;
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(cocycle.dim, cocycle.dim);
    BaseState cur = omega;
    for (long j = 0; j < n; ++j) {
        P = cocycle.A(cur) * P;
        cur = cocycle.driver.forward(cur);
        if (overflow && !P.allFinite()) {
            *overflow = true;
            return P;
        }
    }
    return P;
}

ScaledMatrix evolve_scaled(const Cocycle& cocycle, const BaseState& omega, long n) {
    if (n < 0) throw std::invalid_argument("evolve_scaled: n must be >= 0");
    ScaledMatrix r;
    r.unit = Eigen::MatrixXd::Identity(cocycle.dim, cocycle.dim);
    BaseState cur = omega;
    for (long j = 0; j < n; ++j) {
        r.unit = cocycle.A(cur) * r.unit;
        cur = cocycle.driver.forward(cur);
        double s = r.unit.norm();
        if (s > 0.0 && std::isfinite(s)) {
            r.unit /= s;
            r.log_scale += std::log(s);
        }
    }
    return r;
}

GeneratorFn make_constant_generator(const Eigen::MatrixXd& A) {
    return [A](const OrbitPoint&) { return A; };
}

GeneratorFn make_constant_diag_generator(const std::vector<double>& diag) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(diag.size(), diag.size());
    for (size_t i = 0; i < diag.size(); ++i) A(i, i) = diag[i];
    return make_constant_generator(A);
}

int remark42_piece_index(double x, int i_max) {
    // Omega_i = [1 - 1/i, 1 - 1/(i+1)): membership means i <= 1/(1-x) < i+1.
    if (x <= 0.0) return 1;
    if (1.0 - x <= 1.0 / (i_max + 1.0)) return i_max;  // capped tail
    int i = static_cast<int>(std::floor(1.0 / (1.0 - x)));
    // fix floor landing one cell off at piece boundaries
    if (i > 1 && x < 1.0 - 1.0 / i) --i;
    else if (x >= 1.0 - 1.0 / (i + 1.0)) ++i;
    return std::min(std::max(i, 1), i_max);
}

GeneratorFn make_remark42_generator(int i_max) {
    if (i_max < 1) throw std::invalid_argument("remark42 generator: i_max must be >= 1");
    return [i_max](const OrbitPoint& p) {
        const int i = remark42_piece_index(p.coord, i_max);
        const double r = 2.0 * i + 1.0;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
        A(0, 0) = std::exp(-r);
        A(1, 1) = 0.5;
        A(2, 2) = std::exp(r);
        return A;
    };
}

GeneratorFn make_perturbed_generator(GeneratorFn base, const Eigen::MatrixXd& E,
                                     double xi) {
    return [base = std::move(base), E, xi](const OrbitPoint& p) {
        return Eigen::MatrixXd(base(p) + xi * E);
    };
}

GeneratorFn make_table_generator(std::vector<Eigen::MatrixXd> table,
                                 std::int64_t first_index) {
    if (table.empty()) throw std::invalid_argument("table generator: empty table");
    return [table = std::move(table), first_index](const OrbitPoint& p) {
        std::int64_t j = p.index - first_index;
        if (j < 0) j = 0;
        if (j >= static_cast<std::int64_t>(table.size()))
            j = static_cast<std::int64_t>(table.size()) - 1;
        return table[static_cast<size_t>(j)];
    };
}

GeneratorFn make_planar_rotation_generator(double angle) {
    Eigen::MatrixXd R(2, 2);
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return make_constant_generator(R);
}

}  // namespace ted
