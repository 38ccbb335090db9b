#pragma once

/**
 * @file semiring.hpp
 * @brief Scalars of an idempotent semifield, in four standard flavours.
 *
 * A semifield scalar is either a finite value or the distinguished zero
 * element of its kind. The four kinds
 *
 *   max_plus  = (R u {-inf}, max, +)     zero = -inf, one = 0
 *   min_plus  = (R u {+inf}, min, +)     zero = +inf, one = 0
 *   max_times = (R+ u {0},   max, *)     zero = 0,    one = 1
 *   min_times = (R+ u {+inf}, min, *)    zero = +inf, one = 1
 *
 * are mutually isomorphic; max_plus is the canonical one and the engine
 * computes in it, the others exist for input/output conversion.
 *
 * The zero element is a dedicated variant rather than an IEEE infinity, so
 * the absorbing law zero * x = zero can never produce -inf + inf artifacts.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "tropic/errors.hpp"

namespace tropic {

enum class Semifield : std::uint8_t { max_plus, min_plus, max_times, min_times };

inline const char* name(Semifield k) {
    switch (k) {
        case Semifield::max_plus: return "max_plus";
        case Semifield::min_plus: return "min_plus";
        case Semifield::max_times: return "max_times";
        case Semifield::min_times: return "min_times";
    }
    return "?";
}

/// True for kinds whose addition picks the larger real.
constexpr bool is_max_kind(Semifield k) {
    return k == Semifield::max_plus || k == Semifield::max_times;
}

/// True for kinds whose multiplication is ordinary +.
constexpr bool is_plus_kind(Semifield k) {
    return k == Semifield::max_plus || k == Semifield::min_plus;
}

/**
 * @brief An element of an idempotent semifield: a finite value or zero.
 *
 * Scalars are immutable values; all operations are pure and thread-safe.
 * Comparisons are exact (addition is a selection, never an accumulation).
 */
class Scalar {
public:
    Scalar() : Scalar(zero(Semifield::max_plus)) {}

    static Scalar zero(Semifield k) { return Scalar(k, true, 0.0); }

    static Scalar one(Semifield k) {
        return Scalar(k, false, is_plus_kind(k) ? 0.0 : 1.0);
    }

    /// A finite element. For the *_times kinds the value must be positive.
    static Scalar finite(double v, Semifield k = Semifield::max_plus) {
        if (!std::isfinite(v))
            throw DomainError("finite scalar requires a finite value");
        if (!is_plus_kind(k) && v <= 0.0)
            throw DomainError(std::string(name(k)) + " holds positive reals only");
        return Scalar(k, false, v);
    }

    Semifield kind() const { return kind_; }
    bool is_zero() const { return zero_; }
    bool is_one() const { return !zero_ && v_ == (is_plus_kind(kind_) ? 0.0 : 1.0); }

    /// The finite value; undefined question for the zero element.
    double value() const {
        if (zero_) throw DomainError("zero element has no finite value");
        return v_;
    }

    /// IEEE representation, mapping zero to the conventional sentinel.
    double ieee() const {
        if (!zero_) return v_;
        switch (kind_) {
            case Semifield::max_plus: return -std::numeric_limits<double>::infinity();
            case Semifield::max_times: return 0.0;
            default: return std::numeric_limits<double>::infinity();
        }
    }

    bool operator==(const Scalar& o) const {
        return kind_ == o.kind_ && zero_ == o.zero_ && (zero_ || v_ == o.v_);
    }
    bool operator!=(const Scalar& o) const { return !(*this == o); }

private:
    Scalar(Semifield k, bool z, double v) : v_(v), kind_(k), zero_(z) {}

    double v_;
    Semifield kind_;
    bool zero_;

    friend Scalar oplus(const Scalar&, const Scalar&);
    friend Scalar otimes(const Scalar&, const Scalar&);
};

namespace detail {
inline void require_same_kind(const Scalar& x, const Scalar& y, const char* op) {
    if (x.kind() != y.kind())
        throw KindMismatchError(std::string(op) + ": operands of kind " + name(x.kind()) +
                                " and " + name(y.kind()));
}
} // namespace detail

/// Idempotent addition: max or min of the finite values, zero is neutral.
inline Scalar oplus(const Scalar& x, const Scalar& y) {
    detail::require_same_kind(x, y, "oplus");
    if (x.zero_) return y;
    if (y.zero_) return x;
    bool pick_x = is_max_kind(x.kind_) ? (x.v_ >= y.v_) : (x.v_ <= y.v_);
    return pick_x ? x : y;
}

/// Multiplication: ordinary + or * of the finite values, zero is absorbing.
inline Scalar otimes(const Scalar& x, const Scalar& y) {
    detail::require_same_kind(x, y, "otimes");
    if (x.zero_ || y.zero_) return Scalar::zero(x.kind_);
    return Scalar(x.kind_, false, is_plus_kind(x.kind_) ? x.v_ + y.v_ : x.v_ * y.v_);
}

inline Scalar operator+(const Scalar& x, const Scalar& y) { return oplus(x, y); }
inline Scalar operator*(const Scalar& x, const Scalar& y) { return otimes(x, y); }

/**
 * Power with a real exponent. In the plus kinds this is the arithmetic
 * product value*y; in the times kinds it is pow(value, y).
 * zero^y is zero for y > 0 and undefined otherwise.
 */
inline Scalar power(const Scalar& x, double y) {
    if (x.is_zero()) {
        if (y > 0.0) return Scalar::zero(x.kind());
        throw DomainError("power of the zero element with a nonpositive exponent");
    }
    if (y == 0.0) return Scalar::one(x.kind());
    double v = is_plus_kind(x.kind()) ? x.value() * y : std::pow(x.value(), y);
    return Scalar::finite(v, x.kind());
}

/// Multiplicative inverse of a nonzero scalar.
inline Scalar inverse(const Scalar& x) { return power(x, -1.0); }

/// The semiring linear order: x <= y iff x + y == y. Zero is the least element.
inline bool leq(const Scalar& x, const Scalar& y) { return oplus(x, y) == y; }

/// Isomorphic conversion between kinds, through canonical max_plus.
inline Scalar convert(const Scalar& x, Semifield target) {
    if (x.kind() == target) return x;
    if (x.is_zero()) return Scalar::zero(target);
    double m;  // the max_plus image
    switch (x.kind()) {
        case Semifield::max_plus: m = x.value(); break;
        case Semifield::min_plus: m = -x.value(); break;
        case Semifield::max_times: m = std::log(x.value()); break;
        case Semifield::min_times: m = -std::log(x.value()); break;
        default: throw DomainError("unknown kind");
    }
    switch (target) {
        case Semifield::max_plus: return Scalar::finite(m, target);
        case Semifield::min_plus: return Scalar::finite(-m, target);
        case Semifield::max_times: return Scalar::finite(std::exp(m), target);
        case Semifield::min_times: return Scalar::finite(std::exp(-m), target);
    }
    throw DomainError("unknown target kind");
}

} // namespace tropic
