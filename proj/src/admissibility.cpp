#include "ted/admissibility.hpp"

#include <cmath>
#include <limits>

#include "ted/errors.hpp"

namespace ted {

namespace {

// boundary weight w(n) = K(n) e^{-lambda n} (signed) or e^{-lambda |n|}
double boundary_weight(const WeightSpec& w, int n) {
    const double expo =
        (w.variant == WeightVariant::Signed) ? -w.beta * n : -w.beta * std::abs(n);
    return w.K_at(n) * std::exp(expo);
}

// K(theta^n omega) from a caller-provided spec: regenerated exactly for
// deterministic envelopes, clamped to the sampled range otherwise
double K_lookup(const WeightSpec& K, int n) {
    if (K.deterministic_envelope) {
        const auto [kappa, eps] = *K.deterministic_envelope;
        return kappa * std::exp(eps * std::abs(n));
    }
    const int clamped = std::min(std::max(n, K.n_lo), K.n_hi());
    return K.K_at(clamped);
}

// signed-weight spec with exponent lambda on the window [lo, hi]; the (S1)
// pairs of the detection route are the signed ones
WeightSpec signed_weight(const WeightSpec& K, double lambda, int lo, int hi) {
    std::vector<double> samples;
    samples.reserve(static_cast<size_t>(hi - lo + 1));
    for (int n = lo; n <= hi; ++n) samples.push_back(K_lookup(K, n));
    return WeightSpec::from_samples(std::move(samples), lambda, lo, WeightVariant::Signed);
}

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y,
                double* intercept = nullptr) {
    const size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxy / sxx;
    if (intercept) *intercept = my - b * mx;
    return b;
}

}  // namespace

WindowSolver::WindowSolver(const OrbitSegment& seg, const WeightSpec& weight,
                           double rank_tol) {
    n_lo_ = seg.n_lo;
    n_hi_ = seg.n_hi;
    dim_ = seg.dim();
    const int W = n_hi_ - n_lo_ + 1;
    if (W < 1) throw DomainError("WindowSolver: empty window");
    if (weight.n_lo != n_lo_ || weight.n_hi() != n_hi_)
        throw WindowMismatch("WindowSolver: weight window differs from the segment");
    if (W == 1) return;  // degenerate window, solve() returns 0
    const int d = dim_;
    const int nc = (W - 1) * d;
    const int nv = W * d;

    // Scaling each scalar equality by 1/max(1, ||A_i.||_inf) leaves the
    // solution set untouched and keeps rows of stiff generators within the
    // QR's comfortable range.
    row_scale_.resize(static_cast<size_t>(nc));
    Eigen::MatrixXd Ct = Eigen::MatrixXd::Zero(nv, nc);
    for (int m = 0; m < W - 1; ++m) {
        const Eigen::MatrixXd& A = seg.A(n_lo_ + m);
        for (int i = 0; i < d; ++i) {
            const double s = std::max(1.0, A.row(i).cwiseAbs().maxCoeff());
            row_scale_[static_cast<size_t>(m * d + i)] = s;
            Ct.block(m * d, m * d + i, d, 1) = -A.row(i).transpose() / s;
            Ct((m + 1) * d + i, m * d + i) = 1.0 / s;
        }
    }

    qr_.compute(Ct);
    const auto& Rdiag = qr_.matrixR().diagonal();
    double dmax = 0, dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nc; ++i) {
        dmax = std::max(dmax, std::abs(Rdiag(i)));
        dmin = std::min(dmin, std::abs(Rdiag(i)));
    }
    if (!(dmin > rank_tol * dmax))
        throw RankDeficient("window constraint system numerically rank-deficient");

    Q_ = qr_.householderQ() * Eigen::MatrixXd::Identity(nv, nv);
    null_basis_ = Q_.rightCols(d);

    const double wl = boundary_weight(weight, n_lo_);
    const double wh = boundary_weight(weight, n_hi_);
    const double wmax = std::max(wl, wh);
    w_lo_ = wl / wmax;
    w_hi_ = wh / wmax;

    Eigen::MatrixXd SZ(2 * d, d);
    SZ.topRows(d) = w_lo_ * null_basis_.topRows(d);
    SZ.bottomRows(d) = w_hi_ * null_basis_.bottomRows(d);
    boundary_ls_.compute(SZ);
}

WindowedSequence WindowSolver::solve(const WindowedSequence& f) const {
    if (f.n_lo != n_lo_ || f.n_hi() != n_hi_)
        throw WindowMismatch("WindowSolver::solve: input window mismatch");
    const int W = n_hi_ - n_lo_ + 1;
    const int d = dim_;
    WindowedSequence x(n_lo_, n_hi_, d);
    if (W == 1) return x;  // pure boundary energy, minimizer is 0

    const int nc = (W - 1) * d;
    Eigen::VectorXd b(nc);
    for (int m = 0; m < W - 1; ++m)
        for (int i = 0; i < d; ++i)
            b(m * d + i) =
                f.at(n_lo_ + m + 1)(i) / row_scale_[static_cast<size_t>(m * d + i)];

    // min-norm particular solution of C x = b through the QR of C^T
    Eigen::VectorXd pb = qr_.colsPermutation().transpose() * b;
    Eigen::VectorXd u = qr_.matrixR()
                            .topLeftCorner(nc, nc)
                            .triangularView<Eigen::Upper>()
                            .transpose()
                            .solve(pb);
    Eigen::VectorXd xp = Q_.leftCols(nc) * u;

    // shift along the homogeneous solutions to minimize the boundary energy
    Eigen::VectorXd Sxp(2 * d);
    Sxp.head(d) = w_lo_ * xp.head(d);
    Sxp.tail(d) = w_hi_ * xp.tail(d);
    Eigen::VectorXd y = boundary_ls_.solve(-Sxp);
    Eigen::VectorXd xv = xp + null_basis_ * y;

    for (int i = 0; i < W; ++i) x.at(n_lo_ + i) = xv.segment(i * d, d);
    return x;
}

WindowedSequence solve_window(const WindowProblem& p) {
    return WindowSolver(p.seg, p.weight).solve(p.f);
}

GreenReconstruction::GreenReconstruction(const OrbitSegment& seg, const WeightSpec& weight)
    : solver_(seg, weight) {}

GreenReconstruction::GreenReconstruction(const Cocycle& cocycle, const BaseState& omega,
                                         int N, const WeightSpec& weight)
    : solver_(orbit(cocycle, omega, -N, N), weight) {}

const std::vector<WindowedSequence>& GreenReconstruction::column_solutions(int k) const {
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    const int d = solver_.dim();
    std::vector<WindowedSequence> cols;
    cols.reserve(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        WindowedSequence f(solver_.n_lo(), solver_.n_hi(), d);
        f.at(k) = Eigen::VectorXd::Unit(d, j);
        cols.push_back(solver_.solve(f));
    }
    return cache_.emplace(k, std::move(cols)).first->second;
}

Eigen::MatrixXd GreenReconstruction::green_at(int n, int k) const {
    const int d = solver_.dim();
    const auto& cols = column_solutions(k);
    Eigen::MatrixXd G(d, d);
    for (int j = 0; j < d; ++j) G.col(j) = cols[static_cast<size_t>(j)].at(n);
    return G;
}

Eigen::MatrixXd green_from_deltas(const Cocycle& cocycle, const BaseState& omega, int N,
                                  double beta, const WeightSpec& K, int n, int k) {
    GreenReconstruction recon(cocycle, omega, N, signed_weight(K, beta, -N, N));
    return recon.green_at(n, k);
}

double check_pm_agreement(const Cocycle& cocycle, const BaseState& omega, int N,
                          double beta, const WeightSpec& K,
                          const std::vector<std::pair<int, int>>& sample_pairs) {
    if (!(std::abs(beta) > 0.0)) throw DomainError("check_pm_agreement needs |beta| > 0");
    OrbitSegment seg = orbit(cocycle, omega, -N, N);
    GreenReconstruction plus(seg, signed_weight(K, std::abs(beta), -N, N));
    GreenReconstruction minus(seg, signed_weight(K, -std::abs(beta), -N, N));
    double worst = 0.0;
    for (auto [n, k] : sample_pairs)
        worst = std::max(worst, (plus.green_at(n, k) - minus.green_at(n, k)).norm());
    return worst;
}

namespace {

// log-linear fit of ||G(n,0)|| = K e^{-alpha |n|} on one side of the window,
// |n| in [N/4, 3N/4]; returns false if too few points clear the solver's
// absolute noise floor (a side decaying into the floor cannot bind the rate)
bool decay_fit_side(const GreenReconstruction& recon, int N, int sign, double* alpha,
                    double* K) {
    std::vector<double> xs, ys;
    for (int j = std::max(1, N / 4); j <= 3 * N / 4; ++j) {
        const double g = operator_norm_2(recon.green_at(sign * j, 0));
        if (g > 1e-13) {
            xs.push_back(j);
            ys.push_back(std::log(g));
        }
    }
    if (xs.size() < 2) return false;
    double intercept = 0;
    const double slope = ls_slope(xs, ys, &intercept);
    *alpha = -slope;
    *K = std::exp(intercept);
    return true;
}

}  // namespace

ProjectorCertificate extract_projector_certificate(const Cocycle& cocycle,
                                                   const BaseState& omega, int N,
                                                   double beta, const WeightSpec& K) {
    OrbitSegment seg = orbit(cocycle, omega, -N, N);
    GreenReconstruction plus(seg, signed_weight(K, std::abs(beta), -N, N));
    GreenReconstruction minus(seg, signed_weight(K, -std::abs(beta), -N, N));

    ProjectorCertificate cert;
    cert.P = plus.green_at(0, 0);
    cert.idempotence_defect = (cert.P * cert.P - cert.P).norm();

    const int eq_span = std::min(2, N - 1);
    for (int n = -eq_span; n < eq_span; ++n) {
        const Eigen::MatrixXd Pn = plus.green_at(n, n);
        const Eigen::MatrixXd Pn1 = plus.green_at(n + 1, n + 1);
        const double s = std::max(1.0, seg.A(n).norm());
        cert.equivariance_defect = std::max(
            cert.equivariance_defect, (Pn1 * seg.A(n) - seg.A(n) * Pn).norm() / s);
    }

    const std::vector<std::pair<int, int>> pairs = {
        {0, 0}, {N / 2, 0}, {-N / 2, 0}, {0, N / 2}, {0, -N / 2}, {N / 4, -N / 4}};
    for (auto [n, k] : pairs)
        cert.agreement_defect = std::max(
            cert.agreement_defect, (plus.green_at(n, k) - minus.green_at(n, k)).norm());

    double ap = 0, Kp = 0, am = 0, Km = 0;
    const bool has_p = decay_fit_side(plus, N, +1, &ap, &Kp);
    const bool has_m = decay_fit_side(plus, N, -1, &am, &Km);
    if (has_p && has_m) {
        cert.alpha_hat = std::min(ap, am);
        cert.K_hat = (ap <= am) ? Kp : Km;
    } else if (has_p) {
        cert.alpha_hat = ap;
        cert.K_hat = Kp;
    } else if (has_m) {
        cert.alpha_hat = am;
        cert.K_hat = Km;
    } else {
        cert.alpha_hat = 0.0;
        cert.K_hat = cert.P.norm();
    }
    return cert;
}

ProjectorCertificate extract_projector(const Cocycle& cocycle, const BaseState& omega,
                                       int N, double beta, const WeightSpec& K,
                                       double idempotence_tol) {
    ProjectorCertificate cert = extract_projector_certificate(cocycle, omega, N, beta, K);
    if (!(cert.idempotence_defect <= idempotence_tol))
        throw NotAProjection("reconstructed G(0,0) is not a projection (defect = " +
                             std::to_string(cert.idempotence_defect) + ")");
    return cert;
}

ClassifyResult classify_vector(const Cocycle& cocycle, const BaseState& omega,
                               const Eigen::VectorXd& v, int N, double tau_slope) {
    if (v.norm() == 0.0) throw DomainError("classify_vector: v must be nonzero");
    ClassifyResult res;
    OrbitSegment seg = orbit(cocycle, omega, -N, N);

    std::vector<double> xs, ys;
    Eigen::VectorXd u = v;
    double logmag = 0.0;
    xs.push_back(0);
    ys.push_back(std::log(u.norm()));
    for (int n = 0; n < N; ++n) {
        u = seg.A(n) * u;
        const double s = u.norm();
        if (!(s > 0.0) || !std::isfinite(s)) break;
        logmag += std::log(s);
        u /= s;
        xs.push_back(n + 1);
        ys.push_back(logmag + std::log(v.norm()));
    }
    if (xs.size() >= 2) res.forward_slope = ls_slope(xs, ys);

    xs.assign(1, 0.0);
    ys.assign(1, std::log(v.norm()));
    u = v;
    logmag = 0.0;
    for (int n = 0; n > -N; --n) {
        const Eigen::MatrixXd& A = seg.A(n - 1);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 0.0 ||
            sv(0) / sv(sv.size() - 1) > 1e12)
            res.backward_ill_conditioned = true;
        Eigen::VectorXd w = svd.solve(u);
        const double rel_res = (A * w - u).norm() / u.norm();
        if (rel_res > 1e-6)
            throw IllConditionedBackward(
                "backward continuation has no consistent preimage (residual = " +
                std::to_string(rel_res) + ")");
        const double s = w.norm();
        if (!(s > 0.0) || !std::isfinite(s)) break;
        logmag += std::log(s);
        u = w / s;
        xs.push_back(n - 1);
        ys.push_back(logmag + std::log(v.norm()));
    }
    if (xs.size() >= 2) res.backward_slope = ls_slope(xs, ys);

    if (res.forward_slope <= -tau_slope)
        res.cls = VectorClass::Stable;
    else if (res.forward_slope >= tau_slope && res.backward_slope >= tau_slope)
        res.cls = VectorClass::Unstable;
    else
        res.cls = VectorClass::Neither;
    return res;
}

DichotomyData detect_dichotomy(const Cocycle& cocycle, const BaseState& omega,
                               double beta, const WeightSpec& K, int N,
                               const DetectionOptions& opt) {
    if (!(beta > 0.0)) throw DomainError("detect_dichotomy needs beta > 0");
    if (N < 4) throw DomainError("detect_dichotomy needs N >= 4");

    const OrbitSegment big = orbit(cocycle, omega, -2 * N, 2 * N);
    const int d = big.dim();

    // center certificate carries the decay fit and +/- agreement
    const ProjectorCertificate cert =
        extract_projector_certificate(cocycle, omega, N, beta, K);
    if (!(cert.idempotence_defect <= opt.tol.idempotence))
        throw DetectionFailure("idempotence_defect", cert.idempotence_defect,
                               opt.tol.idempotence);
    if (!(cert.agreement_defect <= opt.tol.agreement))
        throw DetectionFailure("pm_agreement_defect", cert.agreement_defect,
                               opt.tol.agreement);
    const double alpha_hat = cert.alpha_hat;
    if (!(alpha_hat >= beta * 0.99))
        throw DetectionFailure("alpha_hat_below_beta", alpha_hat, beta);

    // projections at every window index from re-centered solves, plus the
    // fitted K envelope and the Lemma-4.8-style decay certificate
    DichotomyData dich;
    dich.seg = big.slice(-N, N);
    dich.alpha = alpha_hat;
    dich.proj.resize(static_cast<size_t>(2 * N + 1));
    dich.K.resize(static_cast<size_t>(2 * N + 1));

    const double rho_hat =
        rho_beta(gamma_bound(alpha_hat, beta), gamma_bound(alpha_hat, -beta));
    double idem_worst = cert.idempotence_defect;
    // margin >= N/2 keeps the e^{alpha |n-m|}-amplified scan clear of the
    // window-edge truncation bias
    const int fit_span = N / 2;

    std::vector<double> green_norms(static_cast<size_t>((2 * N + 1) * (2 * fit_span + 1)),
                                    0.0);
    for (int m = -N; m <= N; ++m) {
        GreenReconstruction recon(big.slice(m - N, m + N),
                                  signed_weight(K, std::abs(beta), m - N, m + N));
        const Eigen::MatrixXd P = recon.green_at(m, m);
        idem_worst = std::max(idem_worst, (P * P - P).norm());
        dich.proj[static_cast<size_t>(m + N)] = P;

        double Khat = 0.0;
        for (int j = -fit_span; j <= fit_span; ++j) {
            const double g = operator_norm_2(recon.green_at(m + j, m));
            green_norms[static_cast<size_t>(m + N) * (2 * fit_span + 1) +
                        static_cast<size_t>(j + fit_span)] = g;
            Khat = std::max(Khat, g * std::exp(alpha_hat * std::abs(j)));
        }
        dich.K[static_cast<size_t>(m + N)] = Khat;
    }

    if (!(idem_worst <= opt.tol.idempotence))
        throw DetectionFailure("idempotence_defect", idem_worst, opt.tol.idempotence);

    // Green decay certificate against the declared weight family. The
    // constants only see K up to a theta-invariant scale, so the declared
    // samples are aligned to the fitted envelope (geometric mean) first.
    double log_scale = 0.0;
    for (int m = -N; m <= N; ++m)
        log_scale += std::log(dich.K_at(m) / K_lookup(K, m));
    const double scale = std::exp(log_scale / (2 * N + 1));
    double lemma48_slack = 0.0;
    for (int m = -N; m <= N; ++m)
        for (int j = -fit_span; j <= fit_span; ++j) {
            const double g = green_norms[static_cast<size_t>(m + N) * (2 * fit_span + 1) +
                                         static_cast<size_t>(j + fit_span)];
            lemma48_slack =
                std::max(lemma48_slack, g * std::exp(beta * std::abs(j)) /
                                            (rho_hat * scale * K_lookup(K, m)));
        }
    if (!(lemma48_slack <= 1.0 + opt.tol.bound_slack))
        throw DetectionFailure("green_decay_slack", lemma48_slack,
                               1.0 + opt.tol.bound_slack);

    double equi_worst = cert.equivariance_defect;
    for (int m = -N; m < N; ++m) {
        const double s = std::max(1.0, dich.A(m).norm());
        equi_worst = std::max(
            equi_worst, (dich.P(m + 1) * dich.A(m) - dich.A(m) * dich.P(m)).norm() / s);
    }
    if (!(equi_worst <= opt.tol.equivariance))
        throw DetectionFailure("equivariance_defect", equi_worst, opt.tol.equivariance);

    const double temper = temperedness_estimate(dich.K, N, std::max(1, N / 2));
    if (!(temper <= opt.tol.temperedness))
        throw DetectionFailure("K_temperedness", temper, opt.tol.temperedness);

    (void)d;
    return dich;
}

std::vector<DichotomyData> detect_dichotomy(const Cocycle& cocycle,
                                            const std::vector<BaseState>& omega_samples,
                                            double beta, const WeightSpec& K, int N,
                                            const DetectionOptions& opt) {
    std::vector<DichotomyData> out;
    out.reserve(omega_samples.size());
    for (const BaseState& w : omega_samples)
        out.push_back(detect_dichotomy(cocycle, w, beta, K, N, opt));
    return out;
}

}  // namespace ted
