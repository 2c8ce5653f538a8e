#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ted/dichotomy.hpp"
#include "ted/green.hpp"

namespace ted {

// Parametric perturbation family B_xi over xi in R^p, with the smallness
// level rho (||A - B_xi|| <= rho / K(theta omega)), the Holder modulus
// upsilon (||B_xi1 - B_xi2|| <= upsilon |xi1 - xi2|^sigma / K(theta omega))
// and exponent sigma.
struct PerturbationSpec {
    std::function<GeneratorFn(const Eigen::VectorXd&)> family;
    double rho = 0.0;
    double upsilon = 0.0;
    double sigma = 1.0;
    std::vector<Eigen::VectorXd> xi_probes;
};

// B_xi = A + xi * E for scalar xi (p = 1).
PerturbationSpec linear_perturbation_family(GeneratorFn base, const Eigen::MatrixXd& E,
                                            double rho, double upsilon, double sigma = 1.0);

struct SmallnessReport {
    bool pass = false;
    double rho_threshold = 0.0;   // (1 - e^{-alpha}) / (1 + e^{-alpha})
    double worst_deviation = 0.0; // max ||A - B_xi|| K(theta^{n+1} omega)
    double margin_rho = 0.0;      // rho - worst_deviation
    double margin_threshold = 0.0;// threshold - rho
};

// (A2): the certified level rho dominates the measured deviation on the
// window and stays below the alpha threshold.
SmallnessReport check_smallness(const Cocycle& cocycle, const PerturbationSpec& pert,
                                const DichotomyData& dich);

struct RoughnessConstants {
    double beta_star = 0.0;
    double contraction = 0.0;   // (1 + rho (1+e^{-alpha})/(1-e^{-alpha})) / 2
    double alpha_tilde = 0.0;
    double varrho = 0.0;
    double beta_tilde = 0.0;
    double D1 = 0.0, D2 = 0.0;
    double kappa = 0.0;
};

// beta of Eq. (est-beta-1) together with the contraction value; requires
// 0 < rho < (1 - e^{-alpha})/(1 + e^{-alpha}).
RoughnessConstants beta_star(double alpha, double rho);

// -ln(cosh a - sqrt(cosh^2 a - 1 - 2 rho sinh a)); equals alpha at rho = 0.
double new_exponent(double alpha, double rho);

// kappa and the rescaled bound samples K~ = kappa K.
struct NewBound {
    double kappa = 0.0;
    double varrho = 0.0;
    double beta_tilde = 0.0;
    double D1 = 0.0, D2 = 0.0;
    std::vector<double> K_tilde;
};
NewBound new_bound(double alpha, double rho, double alpha_tilde,
                   const std::vector<double>& K_samples);

// all constants in one pass (K = 1 for the kappa part)
RoughnessConstants compute_roughness_constants(double alpha, double rho);

// contraction rate rho e^{-lambda} gamma~_lambda of the fixed-point map
double contraction_rate(double alpha, double rho, double lambda);

// kappa^2 upsilon K0 (1 + e^{-2 alpha~}) / (1 - e^{-2 alpha~})
double holder_bound(double kappa, double upsilon, double K0, double alpha_tilde,
                    double sigma);

struct PerturbedGreenResult {
    GreenTable table;
    Eigen::MatrixXd projector;   // G~(0,0)
    int iterations = 0;
    double measured_ratio = 0.0; // worst per-iteration error ratio
    double analytic_rate = 0.0;
    double final_delta = 0.0;    // weighted norm of the last increment
};

// Perturbed Green table by fixed-point iteration of the Green identity
//   G~(n,k) = G(n,k) + sum_j G(n,j) C(j-1) G~(j-1,k),  C = B_xi - A,
// geometrically convergent at rho e^{-lambda} gamma~_lambda < 1. Set
// columns_all = false to iterate only the k = 0 column (the projector).
PerturbedGreenResult perturbed_green(const DichotomyData& dich, const GeneratorFn& B_xi,
                                     double lambda, double fp_tol = 1e-12,
                                     bool columns_all = true);

struct HolderReport {
    double max_ratio = 0.0;   // ||P~(xi2) - P~(xi1)|| / |xi2 - xi1|^sigma
    double bound = 0.0;
    bool pass = false;
    int pairs_tested = 0;     // coincident xi pairs are skipped
};

// Empirical Holder continuity of the perturbed projections across the probe
// parameters, measured against the closed-form bound.
HolderReport holder_empirical(const Cocycle& cocycle, const PerturbationSpec& pert,
                              const DichotomyData& dich, double slack = 0.0);

struct DeterministicResult {
    DichotomyData dich;
    double kappa_tilde_hat = 0.0;  // fitted scale of the e^{eps |n|} envelope
};

// Corollary-6.2 mode: deterministic trace A(n) on [-N, N], weights
// kappa e^{eps |n|}; runs the detection pipeline over the integer shift.
DeterministicResult deterministic_mode(const std::vector<Eigen::MatrixXd>& trace,
                                       int n_lo, double kappa, double eps, double beta,
                                       const DichotomyTolerances& tol = {});

}  // namespace ted
