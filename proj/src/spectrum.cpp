#include "ted/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "ted/errors.hpp"
#include "ted/weighted.hpp"

namespace ted {

LyapunovReport lyapunov_qr(const Cocycle& cocycle, const BaseState& omega, long n_steps,
                           std::vector<long> checkpoints) {
    if (n_steps < 1) throw DomainError("lyapunov_qr needs n_steps >= 1");
    const int d = cocycle.dim;
    std::sort(checkpoints.begin(), checkpoints.end());

    LyapunovReport rep;
    rep.n_steps = n_steps;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(d);
    BaseState cur = omega;
    size_t next_cp = 0;

    auto snapshot = [&](long n) {
        std::vector<double> ex(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) ex[static_cast<size_t>(i)] = sums(i) / n;
        std::sort(ex.begin(), ex.end(), std::greater<>());
        return ex;
    };

    for (long n = 1; n <= n_steps; ++n) {
        Eigen::MatrixXd B = cocycle.A(cur) * Q;
        cur = cocycle.driver.forward(cur);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
        Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
        Q = qr.householderQ();
        for (int i = 0; i < d; ++i) {
            double rii = R(i, i);
            if (rii < 0.0) {
                Q.col(i) = -Q.col(i);
                rii = -rii;
            }
            if (!(rii > 0.0) || !std::isfinite(rii))
                throw Degenerate("rank-deficient generator: R_" + std::to_string(i) +
                                 std::to_string(i) + " vanished at step " +
                                 std::to_string(n));
            sums(i) += std::log(rii);
        }
        if (next_cp < checkpoints.size() && n == checkpoints[next_cp]) {
            rep.history.emplace_back(n, snapshot(n));
            ++next_cp;
        }
    }
    rep.exponents = snapshot(n_steps);
    return rep;
}

namespace {

// number of steps at which the singular-value split has converged well past
// double precision without collapsing the dominant block
long split_steps(double gap, long n_cap) {
    long n = static_cast<long>(std::ceil(45.0 / gap));
    n = std::max<long>(n, 10);
    n = std::min<long>(n, 400);
    return std::min(n, n_cap);
}

}  // namespace

namespace {

SplittingEstimate split_with_spectrum(const Cocycle& cocycle, const BaseState& omega,
                                      long n_cap, double gap, int stable_count) {
    const int d = cocycle.dim;
    const long ns = split_steps(gap, n_cap);
    SplittingEstimate est;
    est.gap = gap;

    // stable directions: small right singular subspace of the forward product
    ScaledMatrix fwd = evolve_scaled(cocycle, omega, ns);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_f(fwd.unit, Eigen::ComputeFullV);
    est.stable_basis = svd_f.matrixV().rightCols(stable_count);

    // unstable directions: image at omega of the dominant directions of the
    // product arriving from theta^{-ns} omega
    BaseState back = cocycle.driver.iterate(omega, -ns);
    ScaledMatrix arr = evolve_scaled(cocycle, back, ns);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_b(arr.unit, Eigen::ComputeFullU);
    est.unstable_basis = svd_b.matrixU().leftCols(d - stable_count);
    return est;
}

}  // namespace

SplittingEstimate oseledets_split(const Cocycle& cocycle, const BaseState& omega,
                                  long n_steps, double gap_tolerance) {
    LyapunovReport rep = lyapunov_qr(cocycle, omega, n_steps);
    double gap = std::abs(rep.exponents.front());
    int stable_count = 0;
    for (double l : rep.exponents) {
        gap = std::min(gap, std::abs(l));
        if (l < 0.0) ++stable_count;
    }
    if (!(gap > gap_tolerance))
        throw NoGap("Lyapunov spectrum has an exponent within " +
                    std::to_string(gap_tolerance) + " of zero");
    return split_with_spectrum(cocycle, omega, n_steps, gap, stable_count);
}

ReturnCocycle build_return_cocycle(const Cocycle& cocycle, const CoordInterval& F,
                                   const BaseState& omega, long n_returns,
                                   long step_cap) {
    if (n_returns < 1) throw DomainError("build_return_cocycle needs n_returns >= 1");
    if (!F.contains(cocycle.driver.coord(omega)))
        throw DomainError("build_return_cocycle: omega must lie in F");
    if (step_cap <= 0) step_cap = 1000 + 100 * n_returns;

    ReturnCocycle rc;
    rc.F = F;
    rc.base = omega;

    const int d = cocycle.dim;
    BaseState cur = omega;
    long visits = 1;  // t = 0
    long t = 0;
    Eigen::MatrixXd inc = Eigen::MatrixXd::Identity(d, d);
    while (rc.n_returns() < n_returns) {
        if (t >= step_cap)
            throw NoReturn("step cap " + std::to_string(step_cap) + " hit after " +
                           std::to_string(rc.n_returns()) + " returns");
        inc = cocycle.A(cur) * inc;
        cur = cocycle.driver.forward(cur);
        ++t;
        if (F.contains(cocycle.driver.coord(cur))) {
            ++visits;
            rc.tau.push_back(t);
            rc.increments.push_back(inc);
            inc = Eigen::MatrixXd::Identity(d, d);
        }
    }
    rc.steps_scanned = t;
    // visits counted on t = 0 .. tau_n - 1, matching the scanned prefix
    rc.empirical_PF = static_cast<double>(visits - 1) / static_cast<double>(t);
    return rc;
}

KacReport kac_check(const ReturnCocycle& rc) {
    KacReport r;
    const long n = rc.n_returns();
    if (n < 1) throw DomainError("kac_check needs at least one return");
    r.mean_return = static_cast<double>(rc.tau.back()) / static_cast<double>(n);
    r.kac_ratio = r.mean_return * rc.empirical_PF;
    return r;
}

ReturnConstants return_constants(double L) {
    if (!(L >= 1.0)) throw DomainError("return_constants needs L >= 1");
    ReturnConstants c;
    c.L = L;
    c.h1 = 1.0 + L * L + L * L * L * L;
    c.h2 = L * L * L * (1.0 + L * L) + L * L;

    auto n0_for = [](double h) {
        // min n >= 1 with h^2/(n+1) <= 1/e
        const double target = std::exp(1.0) * h * h;
        long n = std::max<long>(1, static_cast<long>(std::ceil(target)) - 1);
        while (h * h / static_cast<double>(n + 1) > std::exp(-1.0)) ++n;
        while (n > 1 && h * h / static_cast<double>(n) <= std::exp(-1.0)) --n;
        return n;
    };
    c.n0 = n0_for(c.h1);
    c.n0_prime = n0_for(c.h2);
    c.nu = 1.0 / static_cast<double>(c.n0);
    c.Q = c.h1 * std::exp(1.0);
    c.nu_prime = 1.0 / static_cast<double>(c.n0_prime);
    c.Q_prime = c.h2 * std::exp(1.0);
    return c;
}

DecayCheckReport induced_decay_check(const ReturnCocycle& rc,
                                     const SplittingEstimate& split,
                                     const ReturnConstants& consts, double slack) {
    DecayCheckReport rep;
    auto scan = [&](const Eigen::MatrixXd& basis, double* worst) {
        for (int j = 0; j < basis.cols(); ++j) {
            Eigen::VectorXd w = basis.col(j);
            const double v0 = w.norm();
            for (long n = 1; n <= rc.n_returns(); ++n) {
                w = rc.increments[static_cast<size_t>(n - 1)] * w;
                const double ratio =
                    w.norm() * std::exp(consts.nu * static_cast<double>(n)) /
                    (consts.Q * v0);
                *worst = std::max(*worst, ratio);
                if (!std::isfinite(w.norm()) || w.norm() > 1e100) break;
            }
        }
    };
    scan(split.stable_basis, &rep.max_ratio_stable);
    scan(split.unstable_basis, &rep.max_ratio_unstable);
    rep.pass = rep.max_ratio_stable <= 1.0 + slack;
    return rep;
}

DichotomyData met_dichotomy(const Cocycle& cocycle, const BaseState& omega, long n_steps,
                            const MetOptions& opt) {
    const int d = cocycle.dim;
    const int N = opt.window;

    DichotomyData dich;
    dich.seg = orbit(cocycle, omega, -N, N);
    dich.proj.resize(static_cast<size_t>(2 * N + 1));
    dich.K.resize(static_cast<size_t>(2 * N + 1));

    // exponents are theta-invariant (ergodic drivers): one spectrum pass,
    // then only the splitting products per window index
    LyapunovReport rep = lyapunov_qr(cocycle, omega, n_steps);
    double gap = std::abs(rep.exponents.front());
    int stable_count = 0;
    for (double l : rep.exponents) {
        gap = std::min(gap, std::abs(l));
        if (l < 0.0) ++stable_count;
    }
    if (!(gap > opt.gap_tolerance))
        throw NoGap("Lyapunov spectrum has an exponent within " +
                    std::to_string(opt.gap_tolerance) + " of zero");

    for (int m = -N; m <= N; ++m) {
        SplittingEstimate split = split_with_spectrum(cocycle, dich.seg.state(m),
                                                      n_steps, gap, stable_count);
        const int s = static_cast<int>(split.stable_basis.cols());
        Eigen::MatrixXd M(d, d);
        M.leftCols(s) = split.stable_basis;
        M.rightCols(d - s) = split.unstable_basis;
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, d);
        D.topLeftCorner(s, s).setIdentity();
        dich.proj[static_cast<size_t>(m + N)] =
            M * D * M.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(d, d));
    }
    dich.alpha = (1.0 - opt.margin_fraction) * gap;

    // smallest envelope making the decay bounds hold at each window index
    for (int m = -N; m <= N; ++m) {
        double Khat = 0.0;
        Eigen::MatrixXd W = dich.P(m);
        for (int n = m; n <= N; ++n) {
            Khat = std::max(Khat, operator_norm_2(W) * std::exp(dich.alpha * (n - m)));
            if (n < N) {
                W = dich.A(n) * W;
                if (!W.allFinite() || W.norm() > 1e100) break;
            }
        }
        W = dich.Pu(m);
        for (int n = m; n >= -N; --n) {
            Khat = std::max(Khat, operator_norm_2(W) * std::exp(-dich.alpha * (n - m)));
            if (n > -N) {
                W = unstable_backstep(dich.A(n - 1), dich.Pu(n - 1), W, opt.tol.sv_floor);
                if (!W.allFinite() || W.norm() > 1e100) break;
            }
        }
        dich.K[static_cast<size_t>(m + N)] = Khat;
    }

    const DichotomyValidation val = validate_dichotomy(dich, opt.tol);
    const std::string defect = val.failing_defect(opt.tol);
    if (!defect.empty()) {
        double value = defect == "idempotence_defect"     ? val.idempotence_defect
                       : defect == "equivariance_defect"  ? val.equivariance_defect
                       : defect == "stable_slack"         ? val.stable_slack
                       : defect == "unstable_slack"       ? val.unstable_slack
                                                          : val.temperedness;
        throw DetectionFailure(defect, value, 0.0);
    }
    return dich;
}

}  // namespace ted
