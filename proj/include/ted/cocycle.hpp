#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ted/base_driver.hpp"

namespace ted {

// Orbit point as seen by a generator: the base coordinate plus the absolute
// integer index (integer-shift / table generators key on the index).
struct OrbitPoint {
    double coord = 0.0;
    std::int64_t index = 0;
};

using GeneratorFn = std::function<Eigen::MatrixXd(const OrbitPoint&)>;

// Measurable linear cocycle over a base driver: generator A(omega) plus the
// forward products Phi(n, omega) = A(theta^{n-1} omega) ... A(omega).
// Immutable after construction; safe to share across workers.
struct Cocycle {
    BaseDriver driver;
    GeneratorFn generator;
    int dim = 0;

    Eigen::MatrixXd A(const BaseState& s) const {
        return generator(OrbitPoint{driver.coord(s), s.k});
    }
};

// Cached orbit segment: states theta^n omega and matrices A(theta^n omega)
// for n in [n_lo, n_hi]. Matrices are cached on [n_lo, n_hi - 1] (one per
// step of the window); product(m, n) = A(n-1)...A(m) for n >= m.
struct OrbitSegment {
    BaseState base;
    int n_lo = 0;
    int n_hi = 0;
    std::vector<BaseState> states;    // theta^n omega, n in [n_lo, n_hi]
    std::vector<double> coords;       // driver coordinate per state
    std::vector<Eigen::MatrixXd> gen; // A(theta^n omega), n in [n_lo, n_hi-1]

    const BaseState& state(int n) const { return states.at(n - n_lo); }
    OrbitPoint point(int n) const {
        return OrbitPoint{coords.at(n - n_lo), state(n).k};
    }
    const Eigen::MatrixXd& A(int n) const { return gen.at(n - n_lo); }
    int dim() const { return gen.empty() ? 0 : static_cast<int>(gen.front().rows()); }

    // U(n, m) = A(n-1)...A(m), the forward transition from index m to n >= m.
    Eigen::MatrixXd product(int m, int n) const;

    // copy of the sub-window [lo, hi] (absolute indices)
    OrbitSegment slice(int lo, int hi) const;
};

OrbitSegment orbit(const BaseDriver& driver, const BaseState& omega, int n_lo, int n_hi);
OrbitSegment orbit(const Cocycle& cocycle, const BaseState& omega, int n_lo, int n_hi);

// Phi(n, omega) for n >= 0 by plain left-accumulated product. If any
// intermediate entry leaves the double range the overflow flag is set and
// the caller must rescale (see evolve_scaled) or cap n.
Eigen::MatrixXd evolve(const Cocycle& cocycle, const BaseState& omega, long n,
                       bool* overflow = nullptr);

// Product with per-step normalization: Phi(n, omega) = unit * exp(log_scale),
// usable far beyond the plain-double range. Intended for long spectrum runs.
struct ScaledMatrix {
    Eigen::MatrixXd unit;
    double log_scale = 0.0;
};
ScaledMatrix evolve_scaled(const Cocycle& cocycle, const BaseState& omega, long n);

// ---- Generator families (selectable by name in scenario configs) ----

GeneratorFn make_constant_generator(const Eigen::MatrixXd& A);
GeneratorFn make_constant_diag_generator(const std::vector<double>& diag);

// Piecewise-diagonal 3x3 family over the unit interval partitioned into
// Omega_i = [1 - 1/i, 1 - 1/(i+1)): A = diag(e^{-(2i+1)}, 1/2, e^{2i+1}).
// The piece index is capped at i_max; rates above the cap overflow doubles
// and excise only a base set of measure 1/(i_max+1).
GeneratorFn make_remark42_generator(int i_max = 20);
int remark42_piece_index(double x, int i_max);

// Base generator plus xi * E for a fixed direction E.
GeneratorFn make_perturbed_generator(GeneratorFn base, const Eigen::MatrixXd& E,
                                     double xi);

// Matrix-per-step table keyed on the orbit index; out-of-range indexes clamp
// to the table edge.
GeneratorFn make_table_generator(std::vector<Eigen::MatrixXd> table, std::int64_t first_index);

// Planar rotation by a fixed angle (norm-preserving; no dichotomy).
GeneratorFn make_planar_rotation_generator(double angle);

}  // namespace ted
