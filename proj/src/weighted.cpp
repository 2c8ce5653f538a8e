#include "ted/weighted.hpp"

#include <cmath>
#include <stdexcept>

#include "ted/errors.hpp"

namespace ted {

WeightSpec WeightSpec::constant(double K0, double beta, int n_lo, int n_hi,
                                WeightVariant variant) {
    if (!(K0 > 0.0)) throw DomainError("weight K must be strictly positive");
    WeightSpec w;
    w.n_lo = n_lo;
    w.K.assign(static_cast<size_t>(n_hi - n_lo + 1), K0);
    w.beta = beta;
    w.variant = variant;
    return w;
}

WeightSpec WeightSpec::deterministic(double kappa, double eps, double beta, int n_lo,
                                     int n_hi, WeightVariant variant) {
    if (!(kappa > 0.0)) throw DomainError("deterministic envelope needs kappa > 0");
    if (eps < 0.0) throw DomainError("deterministic envelope needs eps >= 0");
    WeightSpec w;
    w.n_lo = n_lo;
    w.beta = beta;
    w.variant = variant;
    w.deterministic_envelope = std::make_pair(kappa, eps);
    w.K.reserve(static_cast<size_t>(n_hi - n_lo + 1));
    for (int n = n_lo; n <= n_hi; ++n) w.K.push_back(kappa * std::exp(eps * std::abs(n)));
    return w;
}

WeightSpec WeightSpec::from_samples(std::vector<double> K, double beta, int n_lo,
                                    WeightVariant variant) {
    for (double k : K)
        if (!(k > 0.0)) throw DomainError("weight samples must be strictly positive");
    WeightSpec w;
    w.n_lo = n_lo;
    w.K = std::move(K);
    w.beta = beta;
    w.variant = variant;
    return w;
}

double weighted_norm(const WindowedSequence& f, const WeightSpec& w) {
    if (f.n_lo != w.n_lo || f.n_hi() != w.n_hi())
        throw WindowMismatch("weighted_norm: sequence and weight windows differ");
    double sup = 0.0;
    for (int n = f.n_lo; n <= f.n_hi(); ++n) {
        const double expo = (w.variant == WeightVariant::Signed)
                                ? -w.beta * n
                                : -w.beta * std::abs(n);
        sup = std::max(sup, w.K_at(n) * std::exp(expo) * f.at(n).norm());
    }
    return sup;
}

double temperedness_estimate(const std::vector<double>& K_samples, int N, int n_min) {
    if (n_min < 1 || N <= n_min)
        throw DomainError("temperedness_estimate needs N > n_min >= 1");
    if (static_cast<int>(K_samples.size()) != 2 * N + 1)
        throw WindowMismatch("temperedness_estimate: samples must cover [-N, N]");
    double worst = 0.0;
    for (int n = n_min; n <= N; ++n) {
        const double kp = K_samples[static_cast<size_t>(N + n)];
        const double km = K_samples[static_cast<size_t>(N - n)];
        worst = std::max(worst, std::abs(std::log(kp)) / n);
        worst = std::max(worst, std::abs(std::log(km)) / n);
    }
    return worst;
}

double temperedness_estimate(const WeightSpec& w, int n_min) {
    if (w.n_lo != -w.n_hi())
        throw WindowMismatch("temperedness_estimate: weight window must be [-N, N]");
    return temperedness_estimate(w.K, w.n_hi(), n_min);
}

}  // namespace ted
