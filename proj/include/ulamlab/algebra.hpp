#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ulamlab/errors.hpp"
#include "ulamlab/semigroup.hpp"

namespace ulamlab::algebra {

using Complex = std::complex<double>;

inline constexpr double kOverflowThreshold = 1e300;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class NormRule { modulus, max, euclidean };

inline std::string norm_name(NormRule n) {
    switch (n) {
        case NormRule::modulus: return "modulus";
        case NormRule::max: return "max";
        case NormRule::euclidean: return "euclidean";
    }
    return "?";
}

/// The value codomain: C for d = 1, else the componentwise product algebra
/// C^d with unit (1, ..., 1). C^d under the max-norm is submultiplicative but
/// not multiplicative, which is exactly what the counterexample gallery needs.
struct Spec {
    int dimension = 1;
    NormRule norm = NormRule::modulus;

    Spec() = default;
    Spec(int d, NormRule n) : dimension(d), norm(n) {
        if (d < 1) throw config_error("algebra dimension must be >= 1");
        if (d > 1 && n == NormRule::modulus)
            throw config_error("modulus norm requires dimension 1");
    }

    /// True iff the norm is multiplicative: only |.| on C.
    bool multiplicative_norm() const {
        return dimension == 1 && norm == NormRule::modulus;
    }
};

/// Element of the algebra. Overflow is sticky: once any intermediate exceeds
/// the threshold the value is poisoned and every norm involving it is +inf,
/// so windowed suprema degrade loudly instead of wrapping.
struct Value {
    std::vector<Complex> comp;
    bool overflowed = false;

    Value() = default;
    explicit Value(Complex c) : comp{c} {}
    explicit Value(std::vector<Complex> cs) : comp(std::move(cs)) {}

    static Value unit(int dimension) {
        return Value(std::vector<Complex>(static_cast<std::size_t>(dimension), Complex(1.0, 0.0)));
    }
    static Value zero(int dimension) {
        return Value(std::vector<Complex>(static_cast<std::size_t>(dimension), Complex(0.0, 0.0)));
    }

    int dimension() const { return static_cast<int>(comp.size()); }

    Value& check() {
        for (const Complex& c : comp) {
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) ||
                std::abs(c.real()) > kOverflowThreshold || std::abs(c.imag()) > kOverflowThreshold)
                overflowed = true;
        }
        return *this;
    }

    friend Value operator+(const Value& a, const Value& b) {
        Value r = a;
        for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] += b.comp[i];
        r.overflowed = a.overflowed || b.overflowed;
        return r.check();
    }
    friend Value operator-(const Value& a, const Value& b) {
        Value r = a;
        for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] -= b.comp[i];
        r.overflowed = a.overflowed || b.overflowed;
        return r.check();
    }
    /// Componentwise algebra product.
    friend Value operator*(const Value& a, const Value& b) {
        Value r = a;
        for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] *= b.comp[i];
        r.overflowed = a.overflowed || b.overflowed;
        return r.check();
    }
    friend Value operator*(Complex s, const Value& a) {
        Value r = a;
        for (auto& c : r.comp) c *= s;
        return r.check();
    }
    friend Value operator/(const Value& a, Complex s) {
        Value r = a;
        for (auto& c : r.comp) c /= s;
        return r.check();
    }

    friend bool operator==(const Value& a, const Value& b) {
        return a.comp == b.comp && a.overflowed == b.overflowed;
    }
};

inline double norm(const Spec& spec, const Value& x) {
    if (x.overflowed) return kInfinity;
    switch (spec.norm) {
        case NormRule::modulus:
            return std::abs(x.comp[0]);
        case NormRule::max: {
            double m = 0;
            for (const Complex& c : x.comp) m = std::max(m, std::abs(c));
            return m;
        }
        case NormRule::euclidean: {
            double s = 0;
            for (const Complex& c : x.comp) s += std::norm(c);
            return std::sqrt(s);
        }
    }
    return 0;
}

/// Scalar extraction of an algebra-valued map: if g(a) = c * 1_B (all stored
/// components exactly equal) the lift is c and a belongs to M_g; everywhere
/// else the lift is 1 by convention.
struct HatLift {
    bool in_m_set = false;
    Complex value{1.0, 0.0};
};

inline HatLift hat_lift(const Value& ga) {
    HatLift r;
    if (ga.overflowed) return r;
    const Complex& first = ga.comp[0];
    for (const Complex& c : ga.comp)
        if (c != first) return r;
    r.in_m_set = true;
    r.value = first;
    return r;
}

/// Generalized distance: a nonnegative real or +infinity.
using GeneralizedDistance = double;

/// sup over window elements of ||u(y) - v(y)|| / weight(y). Points of zero
/// weight demand exact equality of u and v there, otherwise the distance is
/// infinite; so is any ratio past the overflow threshold.
template <typename MapU, typename MapV, typename WeightFn>
GeneralizedDistance generalized_metric(const Spec& spec, MapU&& u, MapV&& v,
                                       WeightFn&& weight, const semigroup::Window& window) {
    double sup = 0.0;
    for (const semigroup::Element& y : window.elements) {
        const Value uy = u(y);
        const Value vy = v(y);
        const double w = weight(y);
        if (w < 0)
            throw precondition_error("generalized_metric weight negative at " + y.str());
        if (w == 0.0) {
            if (!(uy == vy)) return kInfinity;
            continue;
        }
        double d = norm(spec, uy - vy) / w;
        if (!(d <= kOverflowThreshold)) return kInfinity;
        sup = std::max(sup, d);
    }
    return sup;
}

/// Complex numbers restricted to the strip on which exp is injective:
/// imaginary part normalized to (-pi, pi].
namespace principal {

inline bool in_strip(Complex z) {
    constexpr double pi = 3.14159265358979323846;
    return z.imag() > -pi && z.imag() <= pi;
}

inline Complex normalize(Complex z) {
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    double im = z.imag();
    im = std::remainder(im, two_pi);
    if (im <= -3.14159265358979323846) im += two_pi;
    return {z.real(), im};
}

} // namespace principal

} // namespace ulamlab::algebra
