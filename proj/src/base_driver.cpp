#include "ted/base_driver.hpp"

#include <cmath>
#include <stdexcept>

namespace ted {

namespace {

double mod1(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0;  // floor rounding edge
    if (r < 0.0) r += 1.0;
    return r;
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t symbol_hash(std::uint64_t seed, std::int64_t pos) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(pos)));
}

}  // namespace

BaseDriver BaseDriver::rotation(double q, double omega0) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("rotation frequency q must lie in (0,1)");
    BaseDriver d;
    d.kind_ = DriverKind::IrrationalRotation;
    d.q_ = q;
    d.initial_ = BaseState{mod1(omega0), 0};
    return d;
}

BaseDriver BaseDriver::golden_rotation(double omega0) {
    return rotation((std::sqrt(5.0) - 1.0) / 2.0, omega0);
}

BaseDriver BaseDriver::bernoulli(std::uint64_t seed, int symbol_count) {
    if (symbol_count < 2)
        throw std::invalid_argument("bernoulli shift needs at least 2 symbols");
    BaseDriver d;
    d.kind_ = DriverKind::BernoulliShift;
    d.seed_ = seed;
    d.symbol_count_ = symbol_count;
    d.initial_ = BaseState{0.0, 0};
    return d;
}

BaseDriver BaseDriver::integer_shift() {
    BaseDriver d;
    d.kind_ = DriverKind::IntegerShift;
    d.initial_ = BaseState{0.0, 0};
    return d;
}

BaseState BaseDriver::forward(const BaseState& s) const {
    switch (kind_) {
        case DriverKind::IrrationalRotation:
            return BaseState{mod1(s.x + q_), s.k + 1};
        case DriverKind::BernoulliShift:
        case DriverKind::IntegerShift:
            return BaseState{s.x, s.k + 1};
    }
    return s;
}

BaseState BaseDriver::backward(const BaseState& s) const {
    switch (kind_) {
        case DriverKind::IrrationalRotation:
            return BaseState{mod1(s.x - q_), s.k - 1};
        case DriverKind::BernoulliShift:
        case DriverKind::IntegerShift:
            return BaseState{s.x, s.k - 1};
    }
    return s;
}

BaseState BaseDriver::iterate(const BaseState& s, std::int64_t n) const {
    BaseState cur = s;
    for (std::int64_t i = 0; i < n; ++i) cur = forward(cur);
    for (std::int64_t i = 0; i > n; --i) cur = backward(cur);
    return cur;
}

int BaseDriver::symbol(const BaseState& s, std::int64_t j) const {
    return static_cast<int>(symbol_hash(seed_, s.k + j) %
                            static_cast<std::uint64_t>(symbol_count_));
}

double BaseDriver::coord(const BaseState& s) const {
    switch (kind_) {
        case DriverKind::IrrationalRotation:
            return s.x;
        case DriverKind::BernoulliShift: {
            // base-m expansion of the symbol tail starting at the current
            // position; enough digits to exhaust a double mantissa
            const double m = static_cast<double>(symbol_count_);
            int digits = static_cast<int>(std::ceil(60.0 / std::log2(m)));
            if (digits > 64) digits = 64;
            double x = 0.0, scale = 1.0;
            for (int j = 0; j < digits; ++j) {
                scale /= m;
                x += scale * symbol(s, j);
            }
            return x;
        }
        case DriverKind::IntegerShift:
            return 0.0;
    }
    return 0.0;
}

}  // namespace ted
