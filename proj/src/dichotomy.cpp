#include "ted/dichotomy.hpp"

#include <cmath>
#include <limits>

#include "ted/errors.hpp"
#include "ted/weighted.hpp"

namespace ted {

double operator_norm_2(const Eigen::MatrixXd& M) {
    if (!M.allFinite()) return std::numeric_limits<double>::infinity();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

Eigen::MatrixXd projector_range_basis(const Eigen::MatrixXd& P) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinU);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 0.5) ++r;
    return svd.matrixU().leftCols(r);
}

Eigen::MatrixXd unstable_backstep(const Eigen::MatrixXd& A_prev,
                                  const Eigen::MatrixXd& Pu_prev,
                                  const Eigen::MatrixXd& W, double sv_tol) {
    const Eigen::MatrixXd U = projector_range_basis(Pu_prev);
    if (U.cols() == 0) return Eigen::MatrixXd::Zero(W.rows(), W.cols());
    const Eigen::MatrixXd M = A_prev * U;  // d x r
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > sv_tol))
        throw SingularRestriction("unstable restriction near-singular (sigma_min = " +
                                  std::to_string(smin) + ")");
    return U * svd.solve(W);
}

Eigen::MatrixXd evolve_unstable_backward(const DichotomyData& dich, int n, int at,
                                         double sv_tol) {
    if (n > 0) throw DomainError("evolve_unstable_backward needs n <= 0");
    if (at + n < dich.n_lo() || at > dich.n_hi())
        throw DomainError("evolve_unstable_backward: range leaves the window");
    Eigen::MatrixXd W = dich.Pu(at);
    for (int m = at; m > at + n; --m)
        W = unstable_backstep(dich.A(m - 1), dich.Pu(m - 1), W, sv_tol);
    return W;
}

std::string DichotomyValidation::failing_defect(const DichotomyTolerances& tol) const {
    if (!(idempotence_defect <= tol.idempotence)) return "idempotence_defect";
    if (!(equivariance_defect <= tol.equivariance)) return "equivariance_defect";
    if (!(stable_slack <= 1.0 + tol.bound_slack)) return "stable_slack";
    if (!(unstable_slack <= 1.0 + tol.bound_slack)) return "unstable_slack";
    if (!(temperedness <= tol.temperedness)) return "temperedness";
    return {};
}

DichotomyValidation validate_dichotomy(const DichotomyData& dich,
                                       const DichotomyTolerances& tol) {
    DichotomyValidation v;
    const int lo = dich.n_lo(), hi = dich.n_hi();

    for (int n = lo; n <= hi; ++n) {
        const Eigen::MatrixXd& P = dich.P(n);
        v.idempotence_defect = std::max(v.idempotence_defect, (P * P - P).norm());
        if (n < hi) {
            // relative to the generator scale, else stiff pieces swamp the test
            const double s = std::max(1.0, dich.A(n).norm());
            v.equivariance_defect = std::max(
                v.equivariance_defect,
                (dich.P(n + 1) * dich.A(n) - dich.A(n) * P).norm() / s);
        }
    }

    // decay bounds (2.4)-(2.5) at the base point; products iterate on the
    // projected columns so nothing overflows along certified directions
    const double K0 = dich.K_at(0);
    Eigen::MatrixXd W = dich.P(0);
    for (int n = 0; n <= hi; ++n) {
        v.stable_slack = std::max(v.stable_slack,
                                   operator_norm_2(W) * std::exp(dich.alpha * n) / K0);
        if (n < hi) {
            W = dich.A(n) * W;
            if (!W.allFinite() || W.norm() > 1e200) break;  // violated beyond repair
        }
    }
    W = dich.Pu(0);
    for (int n = 0; n >= lo; --n) {
        v.unstable_slack = std::max(
            v.unstable_slack, operator_norm_2(W) * std::exp(-dich.alpha * n) / K0);
        if (n > lo) {
            try {
                W = unstable_backstep(dich.A(n - 1), dich.Pu(n - 1), W, tol.sv_floor);
            } catch (const SingularRestriction&) {
                v.unstable_slack = std::numeric_limits<double>::infinity();
                break;
            }
            if (!W.allFinite() || W.norm() > 1e200) break;
        }
    }

    if (lo == -hi && hi >= 2)
        v.temperedness = temperedness_estimate(dich.K, hi, std::max(1, hi / 2));
    return v;
}

}  // namespace ted
