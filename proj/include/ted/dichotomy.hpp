#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ted/cocycle.hpp"

namespace ted {

struct DichotomyTolerances {
    double idempotence = 1e-8;
    double equivariance = 1e-7;      // relative to max(1, ||A||)
    double agreement = 1e-5;         // +/- beta reconstruction agreement
    double bound_slack = 0.25;       // additive slack for the decay bounds
    double sv_floor = 1e-12;         // restricted-inversion conditioning floor
    double temperedness = 0.25;      // slope threshold for fitted K samples
};

// Certified dichotomy on a sampled orbit window: the projection field
// Pi^s(theta^n omega), exponent alpha and bound samples K(theta^n omega),
// together with the cached generator matrices that produced them. Output of
// detection (admissibility or MET route) and input to the Green/roughness
// operations. Pi^u is always Id - Pi^s, never stored.
struct DichotomyData {
    OrbitSegment seg;                    // states on [n_lo, n_hi], A on [n_lo, n_hi-1]
    std::vector<Eigen::MatrixXd> proj;   // Pi^s(theta^n omega), n in [n_lo, n_hi]
    std::vector<double> K;               // K(theta^n omega), n in [n_lo, n_hi]
    double alpha = 0.0;

    int n_lo() const { return seg.n_lo; }
    int n_hi() const { return seg.n_hi; }
    int dim() const { return proj.empty() ? 0 : static_cast<int>(proj.front().rows()); }
    const Eigen::MatrixXd& P(int n) const { return proj.at(static_cast<size_t>(n - n_lo())); }
    Eigen::MatrixXd Pu(int n) const {
        return Eigen::MatrixXd::Identity(dim(), dim()) - P(n);
    }
    const Eigen::MatrixXd& A(int n) const { return seg.A(n); }
    double K_at(int n) const { return K.at(static_cast<size_t>(n - n_lo())); }
};

// Spectral (operator 2-) norm; the norm all decay bounds are stated in.
double operator_norm_2(const Eigen::MatrixXd& M);

// Orthonormal basis of the range of a projector. Nonzero singular values of
// an idempotent are >= 1, so the 0.5 cut is unambiguous.
Eigen::MatrixXd projector_range_basis(const Eigen::MatrixXd& P);

// One backward step on the unstable fiber: given W = Phi(n-m, theta^m omega)
// Pi^u(theta^m omega) evaluated at index n, returns the same object at index
// n-1, i.e. applies (A(theta^{n-1} omega)|_{unstable(n-1)})^{-1}. Throws
// SingularRestriction when the restricted map's smallest singular value
// falls below sv_tol.
Eigen::MatrixXd unstable_backstep(const Eigen::MatrixXd& A_prev,
                                  const Eigen::MatrixXd& Pu_prev,
                                  const Eigen::MatrixXd& W, double sv_tol);

// Phi(n, theta^{at} omega) Pi^u(theta^{at} omega) for n <= 0, computed by
// inverting the forward restriction on the unstable fibers step by step.
Eigen::MatrixXd evolve_unstable_backward(const DichotomyData& dich, int n, int at = 0,
                                         double sv_tol = 1e-12);

struct DichotomyValidation {
    double idempotence_defect = 0.0;
    double equivariance_defect = 0.0;
    double stable_slack = 0.0;      // max ||Phi(n)Pi^s|| e^{alpha n} / K(0), n >= 0
    double unstable_slack = 0.0;    // max ||Phi(n)Pi^u|| e^{-alpha n} / K(0), n <= 0
    double temperedness = 0.0;      // slope estimate of the K samples

    // name/value of the worst offending defect, empty when all pass
    std::string failing_defect(const DichotomyTolerances& tol) const;
    bool pass(const DichotomyTolerances& tol) const { return failing_defect(tol).empty(); }
};

DichotomyValidation validate_dichotomy(const DichotomyData& dich,
                                       const DichotomyTolerances& tol = {});

}  // namespace ted
