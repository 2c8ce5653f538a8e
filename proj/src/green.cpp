#include "ted/green.hpp"

#include <cmath>
#include <fstream>

#include "ted/csv.hpp"
#include "ted/errors.hpp"

namespace ted {

Eigen::MatrixXd green(const DichotomyData& dich, int n, double sv_tol) {
    if (n < dich.n_lo() || n > dich.n_hi())
        throw DomainError("green: index outside the window");
    if (n >= 0) return dich.seg.product(0, n) * dich.P(0);
    return Eigen::MatrixXd(-evolve_unstable_backward(dich, n, 0, sv_tol));
}

GreenTable build_green_table(const DichotomyData& dich, double sv_tol) {
    GreenTable t;
    t.n_lo = dich.n_lo();
    t.n_hi = dich.n_hi();
    t.dim = dich.dim();
    t.alpha = dich.alpha;
    t.K = dich.K;
    const int W = t.width();
    t.cell.assign(static_cast<size_t>(W) * W, Eigen::MatrixXd());

    auto put = [&](int n, int k, Eigen::MatrixXd M) {
        t.cell[static_cast<size_t>(n - t.n_lo) * W + static_cast<size_t>(k - t.n_lo)] =
            std::move(M);
    };

    // per column k: forward recurrence on Phi Pi^s, backward restricted
    // inversion on Phi Pi^u
    for (int k = t.n_lo; k <= t.n_hi; ++k) {
        Eigen::MatrixXd Wm = dich.P(k);
        put(k, k, Wm);
        for (int n = k + 1; n <= t.n_hi; ++n) {
            Wm = dich.A(n - 1) * Wm;
            put(n, k, Wm);
        }
        Wm = -dich.Pu(k);
        for (int n = k - 1; n >= t.n_lo; --n) {
            Wm = unstable_backstep(dich.A(n), dich.Pu(n), Wm, sv_tol);
            put(n, k, Wm);
        }
    }
    return t;
}

GreenBoundReport green_bound_check(const GreenTable& table, double slack_tolerance) {
    GreenBoundReport r;
    for (int n = table.n_lo; n <= table.n_hi; ++n)
        for (int k = table.n_lo; k <= table.n_hi; ++k) {
            const double slack = operator_norm_2(table.at(n, k)) *
                                 std::exp(table.alpha * std::abs(n - k)) / table.K_at(k);
            r.max_slack = std::max(r.max_slack, slack);
        }
    r.pass = r.max_slack <= 1.0 + slack_tolerance;
    return r;
}

ConvolutionResult solve_convolution(const GreenTable& table, const WindowedSequence& f,
                                    double beta) {
    if (f.n_lo != table.n_lo || f.n_hi() != table.n_hi)
        throw WindowMismatch("solve_convolution: input window differs from the table");
    ConvolutionResult res;
    res.x = WindowedSequence(table.n_lo, table.n_hi, table.dim);
    double fnorm = 0.0;
    for (int k = f.n_lo; k <= f.n_hi(); ++k) fnorm = std::max(fnorm, f.at(k).norm());
    const int N = std::max(std::abs(table.n_lo), std::abs(table.n_hi));
    const double rate = table.alpha - std::abs(beta);
    res.tail_bound.resize(static_cast<size_t>(table.width()));
    for (int n = table.n_lo; n <= table.n_hi; ++n) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(table.dim);
        for (int k = table.n_lo; k <= table.n_hi; ++k) acc += table.at(n, k) * f.at(k);
        res.x.at(n) = acc;
        res.tail_bound[static_cast<size_t>(n - table.n_lo)] =
            table.K_at(0) * std::exp(-rate * (N - std::abs(n))) * fnorm;
    }
    return res;
}

ConvolutionResult solve_convolution(const DichotomyData& dich, const WindowedSequence& f,
                                    double beta) {
    return solve_convolution(build_green_table(dich), f, beta);
}

double gamma_bound(double alpha, double beta) {
    if (!(alpha > 0.0) || !(std::abs(beta) < alpha))
        throw DomainError("gamma_bound needs |beta| < alpha, alpha > 0");
    return (1.0 + std::exp(-(alpha - beta))) / (-std::expm1(-(alpha - std::abs(beta))));
}

double gamma_tilde_bound(double alpha, double beta) {
    if (!(alpha > 0.0) || !(std::abs(beta) < alpha))
        throw DomainError("gamma_tilde_bound needs |beta| < alpha, alpha > 0");
    const double a = alpha - std::abs(beta);
    return (1.0 + std::exp(-a)) / (-std::expm1(-a));
}

double rho_beta(double gamma_plus, double gamma_minus) {
    if (!(gamma_plus > 0.0) || !(gamma_minus > 0.0))
        throw DomainError("rho_beta needs positive admissibility constants");
    return std::max(gamma_plus, gamma_minus);
}

double green_series_factor(double alpha, double lambda) {
    if (!(alpha > 0.0) || !(std::abs(lambda) < alpha))
        throw DomainError("green_series_factor needs |lambda| < alpha");
    return 1.0 / (-std::expm1(-(alpha + lambda))) +
           std::exp(-(alpha - lambda)) / (-std::expm1(-(alpha - lambda)));
}

void write_green_csv(const GreenTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "n,k,row,col,value\n";
    for (int n = table.n_lo; n <= table.n_hi; ++n)
        for (int k = table.n_lo; k <= table.n_hi; ++k) {
            const Eigen::MatrixXd& G = table.at(n, k);
            for (int r = 0; r < G.rows(); ++r)
                for (int c = 0; c < G.cols(); ++c)
                    out << n << ',' << k << ',' << r << ',' << c << ','
                        << csv_double(G(r, c)) << '\n';
        }
}

}  // namespace ted
