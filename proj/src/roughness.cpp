#include "ted/roughness.hpp"

#include <cmath>

#include "ted/admissibility.hpp"
#include "ted/errors.hpp"

namespace ted {

namespace {

double one_minus_exp(double x) { return -std::expm1(-x); }  // 1 - e^{-x}

}  // namespace

PerturbationSpec linear_perturbation_family(GeneratorFn base, const Eigen::MatrixXd& E,
                                            double rho, double upsilon, double sigma) {
    PerturbationSpec spec;
    spec.rho = rho;
    spec.upsilon = upsilon;
    spec.sigma = sigma;
    spec.family = [base = std::move(base), E](const Eigen::VectorXd& xi) {
        return make_perturbed_generator(base, E, xi(0));
    };
    return spec;
}

SmallnessReport check_smallness(const Cocycle& cocycle, const PerturbationSpec& pert,
                                const DichotomyData& dich) {
    SmallnessReport rep;
    rep.rho_threshold = one_minus_exp(dich.alpha) / (1.0 + std::exp(-dich.alpha));
    for (const Eigen::VectorXd& xi : pert.xi_probes) {
        GeneratorFn B = pert.family(xi);
        for (int n = dich.n_lo(); n < dich.n_hi(); ++n) {
            const Eigen::MatrixXd C = dich.A(n) - B(dich.seg.point(n));
            rep.worst_deviation =
                std::max(rep.worst_deviation, operator_norm_2(C) * dich.K_at(n + 1));
        }
    }
    rep.margin_rho = pert.rho - rep.worst_deviation;
    rep.margin_threshold = rep.rho_threshold - pert.rho;
    rep.pass = rep.margin_rho >= 0.0 && rep.margin_threshold > 0.0;
    (void)cocycle;
    return rep;
}

RoughnessConstants beta_star(double alpha, double rho) {
    if (!(alpha > 0.0)) throw DomainError("beta_star needs alpha > 0");
    const double threshold = one_minus_exp(alpha) / (1.0 + std::exp(-alpha));
    if (!(rho > 0.0 && rho < threshold))
        throw DomainError("beta_star needs 0 < rho < (1-e^{-a})/(1+e^{-a})");
    const double ea = std::exp(-alpha);
    const double bracket = 1.0 + rho * (1.0 + ea) / one_minus_exp(alpha);
    const double T = 2.0 * rho + ea * bracket;
    const double Delta = T * T + 8.0 * rho * ea * bracket;
    RoughnessConstants c;
    c.beta_star = std::log((-T + std::sqrt(Delta)) / (4.0 * rho * ea));
    c.contraction = bracket / 2.0;
    return c;
}

double new_exponent(double alpha, double rho) {
    if (!(alpha > 0.0)) throw DomainError("new_exponent needs alpha > 0");
    if (rho == 0.0) return alpha;  // degenerate case is exact
    const double sh = std::sinh(alpha);
    const double radicand = sh * (sh - 2.0 * rho);  // cosh^2 - 1 - 2 rho sinh
    if (!(radicand > 0.0))
        throw DomainError("new_exponent: radicand nonpositive, rho too large");
    const double arg = std::cosh(alpha) - std::sqrt(radicand);
    if (!(arg > 0.0 && arg < 1.0))
        throw DomainError("new_exponent: perturbed rate leaves (0,1)");
    return -std::log(arg);
}

NewBound new_bound(double alpha, double rho, double alpha_tilde,
                   const std::vector<double>& K_samples) {
    NewBound nb;
    nb.K_tilde = K_samples;
    if (rho == 0.0) {
        nb.kappa = 1.0;
        nb.beta_tilde = alpha_tilde;
        nb.D1 = nb.D2 = 1.0;
        return nb;
    }
    const double ea = std::exp(-alpha);
    nb.varrho = rho * (1.0 + ea) / one_minus_exp(alpha);
    nb.beta_tilde = alpha_tilde + std::log1p(2.0 * rho * std::sinh(alpha));
    const double den1 = 1.0 - rho * ea / one_minus_exp(alpha + alpha_tilde);
    const double den2 =
        1.0 - rho * std::exp(-nb.beta_tilde) / one_minus_exp(alpha + nb.beta_tilde);
    const double denr = (1.0 - nb.varrho) * one_minus_exp(alpha);
    if (std::abs(den1) < 1e-8 || std::abs(den2) < 1e-8 || std::abs(denr) < 1e-8)
        throw DomainError("new_bound: denominator below 1e-8, rho too close to threshold");
    nb.D1 = 1.0 / den1;
    nb.D2 = 1.0 / den2;
    nb.kappa = (1.0 + rho / denr) * std::max(nb.D1, nb.D2);
    for (double& k : nb.K_tilde) k *= nb.kappa;
    return nb;
}

RoughnessConstants compute_roughness_constants(double alpha, double rho) {
    RoughnessConstants c;
    if (rho == 0.0) {
        // rho -> 0+ limits: the fixed point collapses onto the unperturbed data
        c.beta_star = alpha;
        c.contraction = 0.5;
        c.alpha_tilde = alpha;
        c.kappa = 1.0;
        c.D1 = c.D2 = 1.0;
        c.beta_tilde = alpha;
        return c;
    }
    c = beta_star(alpha, rho);
    c.alpha_tilde = new_exponent(alpha, rho);
    const NewBound nb = new_bound(alpha, rho, c.alpha_tilde, {1.0});
    c.varrho = nb.varrho;
    c.beta_tilde = nb.beta_tilde;
    c.D1 = nb.D1;
    c.D2 = nb.D2;
    c.kappa = nb.kappa;
    return c;
}

double contraction_rate(double alpha, double rho, double lambda) {
    return rho * std::exp(-lambda) * green_series_factor(alpha, lambda);
}

double holder_bound(double kappa, double upsilon, double K0, double alpha_tilde,
                    double sigma) {
    if (!(kappa > 0.0 && upsilon > 0.0 && K0 > 0.0 && alpha_tilde > 0.0))
        throw DomainError("holder_bound needs positive inputs");
    if (!(sigma > 0.0 && sigma <= 1.0)) throw DomainError("holder_bound: sigma in (0,1]");
    return kappa * kappa * upsilon * K0 * (1.0 + std::exp(-2.0 * alpha_tilde)) /
           one_minus_exp(2.0 * alpha_tilde);
}

PerturbedGreenResult perturbed_green(const DichotomyData& dich, const GeneratorFn& B_xi,
                                     double lambda, double fp_tol, bool columns_all) {
    const int lo = dich.n_lo(), hi = dich.n_hi();
    const int W = hi - lo + 1;
    const int d = dich.dim();

    PerturbedGreenResult res;
    GreenTable base = build_green_table(dich);

    // C(j) = B_xi(theta^j omega) - A(theta^j omega) on [lo, hi-1], and the
    // certified deviation level it implies
    std::vector<Eigen::MatrixXd> C(static_cast<size_t>(W - 1));
    double rho_measured = 0.0;
    for (int j = lo; j < hi; ++j) {
        C[static_cast<size_t>(j - lo)] = B_xi(dich.seg.point(j)) - dich.A(j);
        rho_measured = std::max(rho_measured,
                                operator_norm_2(C[static_cast<size_t>(j - lo)]) *
                                    dich.K_at(j + 1));
    }
    res.analytic_rate = rho_measured > 0.0
                            ? contraction_rate(dich.alpha, rho_measured, lambda)
                            : 0.0;
    if (res.analytic_rate >= 1.0)
        throw NoConvergence("perturbed_green: contraction rate >= 1 (rate = " +
                            std::to_string(res.analytic_rate) + ")");

    const int max_iters =
        res.analytic_rate > 0.0
            ? static_cast<int>(std::ceil(std::log(fp_tol) / std::log(res.analytic_rate))) + 10
            : 3;

    res.table = base;
    auto wnorm = [&](const std::vector<Eigen::MatrixXd>& M) {
        double s = 0.0;
        for (int n = lo; n <= hi; ++n)
            s = std::max(s, std::exp(-lambda * n) * M[static_cast<size_t>(n - lo)].norm());
        return s;
    };

    const int k_first = columns_all ? lo : 0;
    const int k_last = columns_all ? hi : 0;
    for (int k = k_first; k <= k_last; ++k) {
        std::vector<Eigen::MatrixXd> X(static_cast<size_t>(W),
                                       Eigen::MatrixXd::Zero(d, d));
        double prev_delta = -1.0;
        int it = 0;
        for (; it < max_iters; ++it) {
            std::vector<Eigen::MatrixXd> Y(static_cast<size_t>(W - 1));
            for (int j = lo + 1; j <= hi; ++j)
                Y[static_cast<size_t>(j - lo - 1)] =
                    C[static_cast<size_t>(j - 1 - lo)] * X[static_cast<size_t>(j - 1 - lo)];
            std::vector<Eigen::MatrixXd> Xn(static_cast<size_t>(W));
            std::vector<Eigen::MatrixXd> diff(static_cast<size_t>(W));
            for (int n = lo; n <= hi; ++n) {
                Eigen::MatrixXd acc = base.at(n, k);
                for (int j = lo + 1; j <= hi; ++j)
                    acc += base.at(n, j) * Y[static_cast<size_t>(j - lo - 1)];
                Xn[static_cast<size_t>(n - lo)] = acc;
                diff[static_cast<size_t>(n - lo)] = acc - X[static_cast<size_t>(n - lo)];
            }
            const double delta = wnorm(diff);
            X = std::move(Xn);
            if (prev_delta > fp_tol * 100.0 && delta > 0.0)
                res.measured_ratio = std::max(res.measured_ratio, delta / prev_delta);
            prev_delta = delta;
            if (delta < fp_tol) {
                ++it;
                break;
            }
        }
        if (it >= max_iters && prev_delta >= fp_tol)
            throw NoConvergence("perturbed_green: fixed point not reached in " +
                                std::to_string(max_iters) + " iterations");
        res.iterations = std::max(res.iterations, it);
        res.final_delta = std::max(res.final_delta, prev_delta);
        for (int n = lo; n <= hi; ++n)
            res.table.cell[static_cast<size_t>(n - lo) * W + static_cast<size_t>(k - lo)] =
                X[static_cast<size_t>(n - lo)];
    }
    res.projector = res.table.at(0, 0);
    return res;
}

HolderReport holder_empirical(const Cocycle& cocycle, const PerturbationSpec& pert,
                              const DichotomyData& dich, double slack) {
    HolderReport rep;
    const double alpha = dich.alpha;
    const RoughnessConstants bc = beta_star(alpha, pert.rho);
    const double at = new_exponent(alpha, pert.rho);
    const NewBound nb = new_bound(alpha, pert.rho, at, {dich.K_at(0)});
    rep.bound = holder_bound(nb.kappa, pert.upsilon, dich.K_at(0), at, pert.sigma);

    std::vector<Eigen::MatrixXd> projectors;
    projectors.reserve(pert.xi_probes.size());
    for (const Eigen::VectorXd& xi : pert.xi_probes) {
        GeneratorFn B = pert.family(xi);
        projectors.push_back(
            perturbed_green(dich, B, bc.beta_star, 1e-12, false).projector);
    }
    for (size_t i = 0; i < projectors.size(); ++i)
        for (size_t j = i + 1; j < projectors.size(); ++j) {
            const double dist = (pert.xi_probes[i] - pert.xi_probes[j]).norm();
            if (dist == 0.0) continue;  // degenerate pair, skipped
            ++rep.pairs_tested;
            rep.max_ratio = std::max(rep.max_ratio,
                                     operator_norm_2(projectors[i] - projectors[j]) /
                                         std::pow(dist, pert.sigma));
        }
    rep.pass = rep.max_ratio <= rep.bound * (1.0 + slack);
    (void)cocycle;
    return rep;
}

DeterministicResult deterministic_mode(const std::vector<Eigen::MatrixXd>& trace,
                                       int n_lo, double kappa, double eps, double beta,
                                       const DichotomyTolerances& tol) {
    if (trace.empty()) throw DomainError("deterministic_mode: empty trace");
    if (!(kappa > 0.0) || eps < 0.0 || !(beta > 0.0))
        throw DomainError("deterministic_mode needs kappa > 0, eps >= 0, beta > 0");
    const int n_hi = n_lo + static_cast<int>(trace.size());  // states up to here
    const int N = std::min(-n_lo, n_hi) / 2;
    if (N < 4) throw DomainError("deterministic_mode: trace too short for detection");

    Cocycle cocycle{BaseDriver::integer_shift(),
                    make_table_generator(trace, n_lo),
                    static_cast<int>(trace.front().rows())};
    const WeightSpec K = WeightSpec::deterministic(kappa, eps, beta, -N, N);
    DetectionOptions opt;
    opt.tol = tol;
    DeterministicResult out{detect_dichotomy(cocycle, cocycle.driver.initial(), beta, K,
                                             N, opt),
                            0.0};
    for (int m = -N; m <= N; ++m)
        out.kappa_tilde_hat = std::max(
            out.kappa_tilde_hat, out.dich.K_at(m) * std::exp(-eps * std::abs(m)));
    return out;
}

}  // namespace ted
