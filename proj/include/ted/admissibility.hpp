#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "ted/dichotomy.hpp"
#include "ted/green.hpp"
#include "ted/weighted.hpp"

namespace ted {

// Finite-window realization of the inhomogeneous problem
//   x(n+1) = A(theta^n omega) x(n) + f(n+1),  n in [n_lo, n_hi - 1].
// Among all exact solutions (a d-parameter family), solve_window returns the
// one minimizing the weighted boundary energy
//   |w_lo x(n_lo)|^2 + |w_hi x(n_hi)|^2,   w_n = K(n) e^{-lambda n},
// which converges to the bi-infinite weighted-bounded solution at a rate
// exponential in the window margin. lambda is weight.beta.
struct WindowProblem {
    OrbitSegment seg;      // matrices A on [n_lo, n_hi - 1]
    WindowedSequence f;    // input on [n_lo, n_hi]
    WeightSpec weight;     // boundary-penalty weights
};

class WindowSolver {
public:
    WindowSolver(const OrbitSegment& seg, const WeightSpec& weight,
                 double rank_tol = 1e-13);

    WindowedSequence solve(const WindowedSequence& f) const;

    int n_lo() const { return n_lo_; }
    int n_hi() const { return n_hi_; }
    int dim() const { return dim_; }

private:
    int n_lo_ = 0, n_hi_ = 0, dim_ = 0;
    std::vector<double> row_scale_;                   // per constraint block
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;  // of scaled C^T
    Eigen::MatrixXd Q_;                               // full orthogonal factor
    Eigen::MatrixXd null_basis_;                      // last d columns of Q
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> boundary_ls_;  // of S * null_basis_
    double w_lo_ = 1.0, w_hi_ = 1.0;                  // normalized boundary weights
};

WindowedSequence solve_window(const WindowProblem& p);

// Columns of the reconstructed Green operator: the j-th column of
// green_at(n, k) is the windowed solution of the delta input at index k with
// value e_j, read off at index n (one QR factorization shared by all
// reconstruction queries at this base point).
class GreenReconstruction {
public:
    GreenReconstruction(const Cocycle& cocycle, const BaseState& omega, int N,
                        const WeightSpec& weight);
    GreenReconstruction(const OrbitSegment& seg, const WeightSpec& weight);

    Eigen::MatrixXd green_at(int n, int k) const;
    int n_lo() const { return solver_.n_lo(); }
    int n_hi() const { return solver_.n_hi(); }
    int dim() const { return solver_.dim(); }

private:
    const std::vector<WindowedSequence>& column_solutions(int k) const;
    WindowSolver solver_;
    mutable std::map<int, std::vector<WindowedSequence>> cache_;
};

Eigen::MatrixXd green_from_deltas(const Cocycle& cocycle, const BaseState& omega, int N,
                                  double beta, const WeightSpec& K, int n, int k);

// max over sampled (n, k) of ||G_{+beta}(n,k) - G_{-beta}(n,k)||. Both
// reconstructions hit the same bi-infinite solution when the weighted pairs
// are properly admissible; a small value certifies uniqueness numerically.
double check_pm_agreement(const Cocycle& cocycle, const BaseState& omega, int N,
                          double beta, const WeightSpec& K,
                          const std::vector<std::pair<int, int>>& sample_pairs);

struct ProjectorCertificate {
    Eigen::MatrixXd P;
    double idempotence_defect = 0.0;
    double equivariance_defect = 0.0;
    double agreement_defect = 0.0;
    double alpha_hat = 0.0;   // fitted Green decay rate
    double K_hat = 0.0;       // fitted Green bound at the binding side
};

// Delta-input reconstruction of the projector P^s = G(0,0) at the base
// point, with its certificate (idempotence, equivariance over interior
// indices, +/- beta agreement, log-linear decay fit on ||G(n,0)||).
ProjectorCertificate extract_projector_certificate(const Cocycle& cocycle,
                                                   const BaseState& omega, int N,
                                                   double beta, const WeightSpec& K);

// Throws NotAProjection when the idempotence defect exceeds the tolerance.
ProjectorCertificate extract_projector(const Cocycle& cocycle, const BaseState& omega,
                                       int N, double beta, const WeightSpec& K,
                                       double idempotence_tol = 1e-8);

enum class VectorClass { Stable, Unstable, Neither };

struct ClassifyResult {
    VectorClass cls = VectorClass::Neither;
    double forward_slope = 0.0;    // LS slope of ln|Phi(n) v| on [0, N]
    double backward_slope = 0.0;   // LS slope of ln|x(n)| on [-N, 0]
    bool backward_ill_conditioned = false;
};

// Growth classification of a vector: forward orbit slope and least-squares
// backward continuation slope. tau_slope defaults to 0.05 when no fitted
// exponent is available; callers with a detected dichotomy pass alpha_hat/4.
ClassifyResult classify_vector(const Cocycle& cocycle, const BaseState& omega,
                               const Eigen::VectorXd& v, int N, double tau_slope = 0.05);

struct DetectionOptions {
    DichotomyTolerances tol;
    double rank_tol = 1e-13;
};

// Full Theorem-4.1-style detection at one base point: projector field over
// the window from shifted-base reconstructions, decay fit for alpha, fitted
// K envelope, and validation of every dichotomy invariant. Throws
// DetectionFailure (with the offending defect) or NotAProjection.
DichotomyData detect_dichotomy(const Cocycle& cocycle, const BaseState& omega,
                               double beta, const WeightSpec& K, int N,
                               const DetectionOptions& opt = {});

// Convenience: detection at several base points (fanned out by the CLI).
std::vector<DichotomyData> detect_dichotomy(const Cocycle& cocycle,
                                            const std::vector<BaseState>& omega_samples,
                                            double beta, const WeightSpec& K, int N,
                                            const DetectionOptions& opt = {});

}  // namespace ted
