#pragma once

#include <cstdint>
#include <vector>

namespace ted {

// A point of the base space. Rotation drivers use the real coordinate x in
// [0,1); shift drivers use the integer position k into the (virtual)
// bi-infinite symbol stream / time axis.
struct BaseState {
    double x = 0.0;
    std::int64_t k = 0;
};

enum class DriverKind { IrrationalRotation, BernoulliShift, IntegerShift };

// Invertible measure-preserving base map theta with orbit generation.
//
// rotation:  theta(x) = x + q (mod 1), q irrational.
// bernoulli: full two-sided shift on symbol_count symbols; the symbol at
//            absolute position k is a pure function of (seed, k), so states
//            are reproducible and order-independent. Only the finitely many
//            symbols an orbit touches are ever materialized; a generator
//            that needs deeper coordinates reads them through coord(), which
//            embeds the one-sided symbol tail into [0,1) by base-m expansion.
// integer:   deterministic time axis, theta(n) = n + 1.
class BaseDriver {
public:
    static BaseDriver rotation(double q, double omega0 = 0.0);
    // q = (sqrt(5)-1)/2, the canonical irrational-by-construction choice.
    static BaseDriver golden_rotation(double omega0 = 0.0);
    static BaseDriver bernoulli(std::uint64_t seed, int symbol_count);
    static BaseDriver integer_shift();

    DriverKind kind() const { return kind_; }

    BaseState initial() const { return initial_; }
    BaseState forward(const BaseState& s) const;
    BaseState backward(const BaseState& s) const;
    BaseState iterate(const BaseState& s, std::int64_t n) const;

    // Coordinate of the state in [0,1); this is what generator families are
    // written against.
    double coord(const BaseState& s) const;

    // Symbol at offset j from the state's position (bernoulli only).
    int symbol(const BaseState& s, std::int64_t j = 0) const;

    int symbol_count() const { return symbol_count_; }
    double q() const { return q_; }

private:
    BaseDriver() = default;
    DriverKind kind_ = DriverKind::IntegerShift;
    double q_ = 0.0;
    std::uint64_t seed_ = 0;
    int symbol_count_ = 2;
    BaseState initial_;
};

}  // namespace ted
