#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ulamlab/algebra.hpp"
#include "ulamlab/expr.hpp"
#include "ulamlab/rng.hpp"
#include "ulamlab/semigroup.hpp"

namespace ulamlab::model {

using algebra::Complex;
using algebra::Value;
using semigroup::Domain;
using semigroup::Element;
using semigroup::Window;

/// Type-erased map S -> B. Stabilizers accept any callable of this shape;
/// ApproximateMap below is the expression-backed realization used by the
/// scenario harness.
using MapFn = std::function<Value(const Element&)>;

/// Scalar-valued map S -> C (the given g of the exponential theorems).
using ScalarMapFn = std::function<Complex(const Element&)>;

namespace detail {

inline void bind_element(expr::Env& env, const Domain& domain, const Element& a) {
    if (domain.dimension() == 1) {
        env.vars["x"] = Complex(domain.value(a), 0.0);
    } else {
        for (int i = 0; i < domain.dimension(); ++i)
            env.vars["x" + std::to_string(i + 1)] =
                Complex(domain.coordinate_value(a.coords[static_cast<std::size_t>(i)]), 0.0);
    }
}

} // namespace detail

/// Deterministic complex noise of magnitude <= envelope: magnitude uniform in
/// [0, envelope], phase uniform in (-pi, pi], keyed by (seed, coordinates) so
/// the value at an element never depends on enumeration order.
inline Complex perturbation_noise(std::uint64_t seed, const Element& at, double envelope) {
    constexpr double pi = 3.14159265358979323846;
    const double u1 = CounterRng::unit(seed, at.coords, 1);
    const double u2 = CounterRng::unit(seed, at.coords, 2);
    const double mag = u1 * envelope;
    const double theta = pi - 2.0 * pi * u2;
    return Complex(mag * std::cos(theta), mag * std::sin(theta));
}

struct Perturbation {
    expr::Ast envelope;
    std::uint64_t seed = 0;
};

/// A function S -> B given by one expression per component plus an optional
/// seeded perturbation (the same noise value is added to every component).
class ApproximateMap {
public:
    ApproximateMap(const Domain& domain, const algebra::Spec& spec,
                   std::vector<expr::Ast> components,
                   std::optional<Perturbation> perturbation = std::nullopt)
        : domain_(&domain), spec_(spec), components_(std::move(components)),
          perturbation_(std::move(perturbation)) {
        if (static_cast<int>(components_.size()) != spec_.dimension)
            throw config_error("map needs one component expression per algebra dimension");
    }

    static ApproximateMap parse(const Domain& domain, const algebra::Spec& spec,
                                const std::vector<std::string>& sources,
                                std::optional<Perturbation> perturbation = std::nullopt) {
        std::vector<expr::Ast> comps;
        comps.reserve(sources.size());
        for (const auto& s : sources) comps.push_back(expr::parse(s));
        return ApproximateMap(domain, spec, std::move(comps), std::move(perturbation));
    }

    Value operator()(const Element& a) const {
        expr::Env env;
        detail::bind_element(env, *domain_, a);
        Value v;
        v.comp.reserve(components_.size());
        for (const auto& c : components_) v.comp.push_back(expr::eval(c, env));
        if (perturbation_) {
            const double envl = expr::eval(perturbation_->envelope, env).real();
            const Complex eta = perturbation_noise(perturbation_->seed, a, envl);
            for (auto& c : v.comp) c += eta;
        }
        return v.check();
    }

    const algebra::Spec& spec() const { return spec_; }
    bool perturbed() const { return perturbation_.has_value(); }

private:
    const Domain* domain_;
    algebra::Spec spec_;
    std::vector<expr::Ast> components_;
    std::optional<Perturbation> perturbation_;
};

/// Nonnegative control function of one or two domain arguments. Expression
/// bodies see |x|-style magnitudes of the arguments; derived controls are
/// composed evaluators. Non-finite evaluations come back as +infinity and
/// poison downstream suprema.
class ControlFunction {
public:
    ControlFunction() = default;

    static ControlFunction from_expr(const Domain& domain, int arity, expr::Ast body,
                                     std::map<std::string, double> params = {},
                                     std::string description = {}) {
        if (arity != 1 && arity != 2) throw config_error("control arity must be 1 or 2");
        ControlFunction c;
        c.arity_ = arity;
        c.description_ = std::move(description);
        c.fn_ = [&domain, body = std::move(body), params = std::move(params)](
                    const Element& a, const Element* b) {
            expr::Env env;
            for (const auto& [k, v] : params) env.vars[k] = Complex(v, 0.0);
            env.vars["x"] = Complex(domain.magnitude(a), 0.0);
            if (b) env.vars["y"] = Complex(domain.magnitude(*b), 0.0);
            const double v = expr::eval(body, env).real();
            return std::isfinite(v) ? v : algebra::kInfinity;
        };
        return c;
    }

    static ControlFunction parse(const Domain& domain, int arity, const std::string& source,
                                 std::map<std::string, double> params = {}) {
        return from_expr(domain, arity, expr::parse(source), std::move(params), source);
    }

    static ControlFunction from_fn(int arity, std::function<double(const Element&, const Element*)> fn,
                                   std::string description = {}) {
        ControlFunction c;
        c.arity_ = arity;
        c.fn_ = std::move(fn);
        c.description_ = std::move(description);
        return c;
    }

    static ControlFunction constant(double v) {
        return from_fn(2, [v](const Element&, const Element*) { return v; },
                       "const " + std::to_string(v));
    }

    int arity() const { return arity_; }
    const std::string& description() const { return description_; }
    explicit operator bool() const { return static_cast<bool>(fn_); }

    double operator()(const Element& a) const {
        if (arity_ != 1) throw precondition_error("control expects two arguments");
        return fn_(a, nullptr);
    }
    double operator()(const Element& a, const Element& b) const {
        if (arity_ != 2) throw precondition_error("control expects one argument");
        return fn_(a, &b);
    }

    /// Fixes the first argument of a two-argument control.
    ControlFunction bind_first(const Element& a) const {
        auto fn = fn_;
        return from_fn(1,
                       [fn, a](const Element& y, const Element*) {
                           Element ax = a;
                           return fn(ax, &y);
                       },
                       description_ + " with first argument fixed");
    }

    /// Empirical nonnegativity check; the DSL cannot prove positivity, so
    /// every theorem run verifies it on the window first.
    void require_nonnegative(const Window& window, const std::string& name) const {
        if (arity_ == 1) {
            for (const Element& a : window.elements)
                if (fn_(a, nullptr) < 0)
                    throw precondition_error("control '" + name + "' negative at " + a.str());
            return;
        }
        window.for_each_pair([&](const Element& a, const Element& b) {
            if (fn_(a, &b) < 0)
                throw precondition_error("control '" + name + "' negative at (" + a.str() + "," +
                                         b.str() + ")");
        });
    }

private:
    int arity_ = 2;
    std::function<double(const Element&, const Element*)> fn_;
    std::string description_;
};

/// Controls for the Pexider exponential split: from a bound on
/// ||f(x*y) - g(x)h(y)|| build the controls that bound the two one-function
/// defects,
///   tilde(x,y) = psi(x,y) + ||g(x)|| psi(x0,y)
///   hat(x,y)   = psi(x,y) + psi(x0, x*y).
/// Requires g(x0) = 1_B within 1e-12.
inline std::pair<ControlFunction, ControlFunction> derive_pexider_exponential_controls(
    const Domain& domain, const algebra::Spec& spec, const ControlFunction& psi,
    const MapFn& g, const Element& x0) {
    const double unit_gap = algebra::norm(spec, g(x0) - Value::unit(spec.dimension));
    if (!(unit_gap <= 1e-12))
        throw precondition_error("pexider control derivation requires g(x0)=1_B; ||g(" +
                                 x0.str() + ")-1|| = " + std::to_string(unit_gap));
    auto tilde = ControlFunction::from_fn(
        2,
        [&domain, spec, psi, g, x0](const Element& x, const Element* y) {
            return psi(x, *y) + algebra::norm(spec, g(x)) * psi(x0, *y);
        },
        "psi(x,y)+||g(x)||*psi(x0,y)");
    auto hat = ControlFunction::from_fn(
        2,
        [&domain, psi, x0](const Element& x, const Element* y) {
            return psi(x, *y) + psi(x0, domain.op(x, *y));
        },
        "psi(x,y)+psi(x0,x*y)");
    return {tilde, hat};
}

/// Control for the Pexider linear equation: tilde(x) = psi(x) + |p(x)| ||f(x)-g(x)||.
inline ControlFunction derive_pexider_linear_control(const algebra::Spec& spec,
                                                     const ControlFunction& psi,
                                                     const ScalarMapFn& p, const MapFn& f,
                                                     const MapFn& g) {
    return ControlFunction::from_fn(
        1,
        [spec, psi, p, f, g](const Element& x, const Element*) {
            return psi(x) + std::abs(p(x)) * algebra::norm(spec, f(x) - g(x));
        },
        "psi(x)+|p(x)|*||f(x)-g(x)||");
}

} // namespace ulamlab::model
