#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace ted {

// Vector-valued sequence on a finite index window [n_lo, n_hi].
struct WindowedSequence {
    int n_lo = 0;
    std::vector<Eigen::VectorXd> values;

    WindowedSequence() = default;
    WindowedSequence(int lo, int hi, int dim)
        : n_lo(lo), values(static_cast<size_t>(hi - lo + 1), Eigen::VectorXd::Zero(dim)) {}

    int n_hi() const { return n_lo + static_cast<int>(values.size()) - 1; }
    int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
    Eigen::VectorXd& at(int n) { return values.at(static_cast<size_t>(n - n_lo)); }
    const Eigen::VectorXd& at(int n) const { return values.at(static_cast<size_t>(n - n_lo)); }
    bool contains(int n) const { return n >= n_lo && n <= n_hi(); }
};

enum class WeightVariant { Signed, Absolute };

// Weight data for the norms sup_n K(theta^n omega) e^{-beta n} |f(n)| (signed)
// and sup_n K(theta^n omega) e^{-beta |n|} |f(n)| (absolute), restricted to a
// finite window. The deterministic envelope variant generates
// K(n) = kappa e^{eps |n|} exactly.
struct WeightSpec {
    int n_lo = 0;
    std::vector<double> K;
    double beta = 0.0;
    WeightVariant variant = WeightVariant::Signed;
    std::optional<std::pair<double, double>> deterministic_envelope;  // (kappa, eps)

    int n_hi() const { return n_lo + static_cast<int>(K.size()) - 1; }
    double K_at(int n) const { return K.at(static_cast<size_t>(n - n_lo)); }

    static WeightSpec constant(double K0, double beta, int n_lo, int n_hi,
                               WeightVariant variant = WeightVariant::Signed);
    static WeightSpec deterministic(double kappa, double eps, double beta, int n_lo,
                                    int n_hi, WeightVariant variant = WeightVariant::Signed);
    static WeightSpec from_samples(std::vector<double> K, double beta, int n_lo,
                                   WeightVariant variant = WeightVariant::Signed);
};

// sup_n K(n) e^{-beta n} |f(n)| over the shared window (Euclidean |.|).
// Throws WindowMismatch when the windows differ.
double weighted_norm(const WindowedSequence& f, const WeightSpec& w);

// max over n_min <= |n| <= N of |ln K(n)| / |n|; a weight passes the
// temperedness test at tolerance tau when the estimate is <= tau. K must be
// sampled on a window [-N, N].
double temperedness_estimate(const WeightSpec& w, int n_min);
double temperedness_estimate(const std::vector<double>& K_samples, int N, int n_min);

}  // namespace ted
