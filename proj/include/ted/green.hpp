#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ted/dichotomy.hpp"
#include "ted/weighted.hpp"

namespace ted {

// Green function of the dichotomy at the base point:
//   G(n, omega) =  Phi(n, omega) Pi^s(omega),        n >= 0,
//   G(n, omega) = -Phi(n, omega) Pi^u(omega),        n < 0.
Eigen::MatrixXd green(const DichotomyData& dich, int n, double sv_tol = 1e-12);

// Windowed family G(n, k) = G(n - k, theta^k omega) for n, k in the window.
struct GreenTable {
    int n_lo = 0;
    int n_hi = 0;
    int dim = 0;
    double alpha = 0.0;
    std::vector<double> K;               // K(theta^k omega) samples
    std::vector<Eigen::MatrixXd> cell;   // row-major over (n, k)

    int width() const { return n_hi - n_lo + 1; }
    const Eigen::MatrixXd& at(int n, int k) const {
        return cell.at(static_cast<size_t>(n - n_lo) * width() + static_cast<size_t>(k - n_lo));
    }
    double K_at(int k) const { return K.at(static_cast<size_t>(k - n_lo)); }
};

GreenTable build_green_table(const DichotomyData& dich, double sv_tol = 1e-12);

// max over (n, k) of ||G(n,k)|| e^{alpha |n-k|} / K(k); passes iff the worst
// slack stays within 1 + slack_tolerance (decay bound of the dichotomy).
struct GreenBoundReport {
    double max_slack = 0.0;
    bool pass = false;
};
GreenBoundReport green_bound_check(const GreenTable& table, double slack_tolerance = 0.05);

// x(n) = sum_k G(n - k, theta^k omega) f(k) over the window; the unique
// weighted-bounded solution of x(n+1) = A(theta^n omega) x(n) + f(n+1) for
// inputs supported on the window. tail_bound[n] is the geometric bound
// K(0) e^{-(alpha - |beta|)(N - |n|)} ||f|| on what an input tail beyond the
// window could still contribute at index n.
struct ConvolutionResult {
    WindowedSequence x;
    std::vector<double> tail_bound;
};
ConvolutionResult solve_convolution(const GreenTable& table, const WindowedSequence& f,
                                    double beta = 0.0);
ConvolutionResult solve_convolution(const DichotomyData& dich, const WindowedSequence& f,
                                    double beta = 0.0);

// Admissibility constants of Theorem 3.1. gamma bounds the signed-weight
// solution operator, gamma_tilde the absolute-weight one; rho_beta is the
// Green-decay constant of the converse direction.
double gamma_bound(double alpha, double beta);
double gamma_tilde_bound(double alpha, double beta);
double rho_beta(double gamma_plus, double gamma_minus);

// Exact value of the convolution series sum_j e^{-alpha |j| + lambda j},
// i.e. 1/(1-e^{-(alpha+lambda)}) + e^{-(alpha-lambda)}/(1-e^{-(alpha-lambda)}).
// This is the sharp one-sided factor behind gamma and the contraction rate
// of the roughness fixed point.
double green_series_factor(double alpha, double lambda);

// CSV export with columns (n, k, row, col, value).
void write_green_csv(const GreenTable& table, const std::string& path);

}  // namespace ted
