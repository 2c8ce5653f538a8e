#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ted/dichotomy.hpp"

namespace ted {

struct LyapunovReport {
    std::vector<double> exponents;  // nats per step, sorted descending
    long n_steps = 0;
    // exponent estimates at checkpoint step counts
    std::vector<std::pair<long, std::vector<double>>> history;
};

// Discrete QR method: exponents from the accumulated log of the R diagonal
// of the step-wise reorthonormalized product. Re-orthonormalizes every step
// (the supported dimensions are small and the piecewise rates are huge).
LyapunovReport lyapunov_qr(const Cocycle& cocycle, const BaseState& omega, long n_steps,
                           std::vector<long> checkpoints = {});

struct SplittingEstimate {
    Eigen::MatrixXd stable_basis;    // orthonormal columns
    Eigen::MatrixXd unstable_basis;  // orthonormal columns
    double gap = 0.0;                // min |lambda_i|
};

// Finite-n Oseledets splitting: the stable space from the small right
// singular directions of the forward product at omega, the unstable space as
// the image at omega of the dominant directions of the product arriving from
// theta^{-n} omega.
SplittingEstimate oseledets_split(const Cocycle& cocycle, const BaseState& omega,
                                  long n_steps, double gap_tolerance = 1e-3);

// Interval predicate x in [lo, hi) on the base coordinate; the return-time
// machinery only ever uses F through such explicitly certified sets.
struct CoordInterval {
    double lo = 0.0;
    double hi = 1.0;
    bool contains(double x) const { return x >= lo && x < hi; }
};

struct ReturnCocycle {
    CoordInterval F;
    BaseState base;
    std::vector<long> tau;                    // cumulative return times tau_1..tau_n
    std::vector<Eigen::MatrixXd> increments;  // Phi between consecutive returns
    double empirical_PF = 0.0;                // visits / steps scanned
    long steps_scanned = 0;

    long n_returns() const { return static_cast<long>(tau.size()); }
};

// First-return cocycle over F: return times tau_n and the induced products
// Phi-bar(n, omega) = Phi(tau_n, omega) stored as per-return increments.
// Throws NoReturn when the step cap is hit first.
ReturnCocycle build_return_cocycle(const Cocycle& cocycle, const CoordInterval& F,
                                   const BaseState& omega, long n_returns,
                                   long step_cap = 0);

struct KacReport {
    double mean_return = 0.0;  // tau_n / n
    double kac_ratio = 0.0;    // mean_return * empirical P(F)
};
KacReport kac_check(const ReturnCocycle& rc);

// Explicit constants of the induced-cocycle estimates: h1 = 1 + L^2 + L^4,
// h2 = L^3(1 + L^2) + L^2, n0 = min{n >= 1 : h1^2/(n+1) <= 1/e}, nu = 1/n0,
// Q = h1 e; the primed pair repeats the recipe with h2.
struct ReturnConstants {
    double L = 1.0;
    double h1 = 0.0, h2 = 0.0;
    long n0 = 0, n0_prime = 0;
    double nu = 0.0, Q = 0.0;
    double nu_prime = 0.0, Q_prime = 0.0;
};
ReturnConstants return_constants(double L);

struct DecayCheckReport {
    double max_ratio_stable = 0.0;    // |Phi-bar(n)v| e^{nu n} / (Q |v|)
    bool pass = false;
    double max_ratio_unstable = 0.0;  // reported, growth direction fails by design
};
DecayCheckReport induced_decay_check(const ReturnCocycle& rc,
                                     const SplittingEstimate& split,
                                     const ReturnConstants& consts,
                                     double slack = 0.05);

struct MetOptions {
    int window = 20;                  // DichotomyData window half-width
    double gap_tolerance = 1e-3;
    double margin_fraction = 0.1;     // alpha = (1 - margin) * gap
    DichotomyTolerances tol;
};

// MET route to the dichotomy: splitting per window index, projector onto the
// stable space along the unstable one, alpha from the spectral gap minus a
// margin, K fitted as the smallest envelope making the decay bounds hold.
DichotomyData met_dichotomy(const Cocycle& cocycle, const BaseState& omega, long n_steps,
                            const MetOptions& opt = {});

}  // namespace ted
