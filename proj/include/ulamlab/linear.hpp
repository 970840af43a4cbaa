#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ulamlab/algebra.hpp"
#include "ulamlab/fixedpoint.hpp"
#include "ulamlab/function_model.hpp"
#include "ulamlab/numeric.hpp"

namespace ulamlab::linstab {

using algebra::Complex;
using algebra::Value;
using model::ControlFunction;
using model::MapFn;
using model::ScalarMapFn;
using semigroup::Domain;
using semigroup::Element;
using semigroup::Window;

using SelfMap = std::function<Element(const Element&)>;

/// The linear equation f(rho(x)) = p(x) f(x) + q(x).
struct EquationSpec {
    SelfMap rho;
    SelfMap rho_inverse; // backward direction only
    ScalarMapFn p;       // nonzero on the window
    MapFn q;             // zero map for the homogeneous equation
};

inline MapFn zero_map(int dimension) {
    return [dimension](const Element&) { return Value::zero(dimension); };
}

// ---------------------------------------------------------------------------
// Lipschitz finders. Returning nullopt is the no-certificate outcome: no
// admissible constant below 1 exists, which is exactly how the scaling
// counterexamples manifest.

inline constexpr double kConventionalL = 0.5; // for identically-zero controls

/// Smallest L with psi(rho(x)) <= L |p(rho(x))| psi(x) on the window.
inline std::optional<double> find_lipschitz_forward([[maybe_unused]] const Domain& domain,
                                                    const EquationSpec& spec,
                                                    const ControlFunction& psi,
                                                    const Window& window) {
    double sup = 0.0;
    bool any = false;
    for (const Element& x : window.elements) {
        const double w = psi(x);
        if (w == 0.0) continue;
        any = true;
        const Element rx = spec.rho(x);
        sup = std::max(sup, psi(rx) / (std::abs(spec.p(rx)) * w));
    }
    if (!any) return kConventionalL;
    if (!(sup < 1.0)) return std::nullopt;
    return sup;
}

/// Smallest L with |p(x)| psi(rho^{-1}(x)) <= L psi(x) on the window.
inline std::optional<double> find_lipschitz_backward([[maybe_unused]] const Domain& domain,
                                                     const EquationSpec& spec,
                                                     const ControlFunction& psi,
                                                     const Window& window) {
    if (!spec.rho_inverse)
        throw precondition_error("backward direction needs rho_inverse");
    double sup = 0.0;
    bool any = false;
    for (const Element& x : window.elements) {
        const double w = psi(x);
        if (w == 0.0) continue;
        any = true;
        sup = std::max(sup, std::abs(spec.p(x)) * psi(spec.rho_inverse(x)) / w);
    }
    if (!any) return kConventionalL;
    if (!(sup < 1.0)) return std::nullopt;
    return sup;
}

// ---------------------------------------------------------------------------
// Solvers.

struct SolveOptions {
    double tol = 1e-9;
    int max_steps = fixedpoint::kDefaultMaxSteps;
    bool uniqueness_probe = false;
};

struct SolveReport {
    std::string verdict; // hur-stable-certified | no-certificate |
                         // hypotheses-not-met | window-exhausted
    std::string detail;
    double lipschitz = 0.0;
    MapFn T;
    std::vector<double> bound_profile;  // per window element
    std::vector<double> observed_error; // per window element
    double residual_sup = 0.0;
    int depth = 0; // deepest n used (uniform across the window)
    fixedpoint::Trace trace;
    std::optional<double> uniqueness_delta;

    bool certified() const { return verdict == "hur-stable-certified"; }
};

namespace detail {

inline void check_defect([[maybe_unused]] const Domain& domain, const algebra::Spec& aspec,
                         const EquationSpec& spec, const MapFn& f, const ControlFunction& psi,
                         const Window& window, SolveReport& report) {
    for (const Element& x : window.elements) {
        const double d =
            algebra::norm(aspec, f(spec.rho(x)) - spec.p(x) * f(x) - spec.q(x));
        if (d > psi(x)) {
            report.verdict = "hypotheses-not-met";
            report.detail = "equation defect " + std::to_string(d) + " exceeds psi(" + x.str() +
                            ") = " + std::to_string(psi(x));
            return;
        }
    }
}

} // namespace detail

/// Forward solver: J(h)(x) = (h(rho(x)) - q(x)) / p(x) contracts with the
/// weight psi(x)/|p(x)|, certifying ||f - T|| <= psi/((1-L)|p|) + tol. The
/// orbit rho^n(x) walks through the domain grid only as far as the extent
/// allows; exhausting it before convergence is reported, never extrapolated.
inline SolveReport solve_linear_forward(const Domain& domain, const algebra::Spec& aspec,
                                        const EquationSpec& spec, const MapFn& f,
                                        const ControlFunction& psi, const Window& window,
                                        const SolveOptions& opts = {}) {
    SolveReport report;
    psi.require_nonnegative(window, "psi");

    auto L_opt = find_lipschitz_forward(domain, spec, psi, window);
    if (!L_opt) {
        report.verdict = "no-certificate";
        report.detail = "no Lipschitz constant below 1 satisfies "
                        "psi(rho(x)) <= L |p(rho(x))| psi(x) on the window";
        return report;
    }
    const double L = *L_opt;
    report.lipschitz = L;

    detail::check_defect(domain, aspec, spec, f, psi, window, report);
    if (!report.verdict.empty()) return report;

    fixedpoint::Operator op;
    op.lipschitz = L;
    op.provenance = "forward linear operator, L from the control ratio";
    op.apply = [spec](const MapFn& h) -> MapFn {
        return [spec, h](const Element& x) {
            return (h(spec.rho(x)) - spec.q(x)) / spec.p(x);
        };
    };
    ControlFunction weight = ControlFunction::from_fn(
        1, [spec, psi](const Element& x, const Element*) { return psi(x) / std::abs(spec.p(x)); },
        "psi(x)/|p(x)|");

    auto result =
        fixedpoint::iterate_to_fixed_point(aspec, op, f, weight, window, opts.tol, opts.max_steps);
    report.trace = result.trace;
    report.depth = static_cast<int>(result.trace.steps.size());
    if (result.trace.stop == fixedpoint::StopReason::domain_exhausted) {
        report.verdict = "window-exhausted";
        report.detail = result.trace.note;
        return report;
    }
    if (result.trace.stop != fixedpoint::StopReason::converged) {
        report.verdict = "hypotheses-not-met";
        report.detail = "iteration stopped without converging: " +
                        fixedpoint::stop_reason_name(result.trace.stop);
        return report;
    }
    report.T = result.fixed_point;
    if (opts.uniqueness_probe)
        report.uniqueness_delta = fixedpoint::uniqueness_probe(aspec, op, f, report.T, weight,
                                                               window, opts.tol, opts.max_steps);

    for (const Element& x : window.elements) {
        const double bound = psi(x) / ((1.0 - L) * std::abs(spec.p(x)));
        const double observed = algebra::norm(aspec, f(x) - report.T(x));
        report.bound_profile.push_back(bound);
        report.observed_error.push_back(observed);
        if (observed > bound + opts.tol)
            throw engine_inconsistency("bound " + std::to_string(bound) +
                                       " fails to dominate error " + std::to_string(observed) +
                                       " at " + x.str());
        const double residual = algebra::norm(
            aspec, report.T(spec.rho(x)) - spec.p(x) * report.T(x) - spec.q(x));
        report.residual_sup = std::max(report.residual_sup, residual);
        if (residual > opts.tol)
            throw engine_inconsistency("recovered T violates the equation at " + x.str() +
                                       ": residual " + std::to_string(residual));
    }
    report.verdict = "hur-stable-certified";
    return report;
}

/// Backward solver for permutations: J(h)(x) = p(rho^{-1}(x)) h(rho^{-1}(x))
/// + q(rho^{-1}(x)), certifying ||f - T|| <= psi(rho^{-1}(x))/(1-L) + tol.
/// The equation residual is checked in its inverse-orbit form
/// T(x) = p(rho^{-1} x) T(rho^{-1} x) + q(rho^{-1} x), the same statement
/// over permuted points.
inline SolveReport solve_linear_backward(const Domain& domain, const algebra::Spec& aspec,
                                         const EquationSpec& spec, const MapFn& f,
                                         const ControlFunction& psi, const Window& window,
                                         const SolveOptions& opts = {}) {
    SolveReport report;
    psi.require_nonnegative(window, "psi");

    auto L_opt = find_lipschitz_backward(domain, spec, psi, window);
    if (!L_opt) {
        report.verdict = "no-certificate";
        report.detail = "no Lipschitz constant below 1 satisfies "
                        "|p(x)| psi(rho^{-1}(x)) <= L psi(x) on the window";
        return report;
    }
    const double L = *L_opt;
    report.lipschitz = L;

    // rho must permute the window: inversion-table check with a collision
    // witness.
    {
        std::map<Element, Element> table;
        for (const Element& x : window.elements) {
            const Element pre = spec.rho_inverse(x);
            auto [it, fresh] = table.emplace(pre, x);
            if (!fresh)
                throw precondition_error("rho is not a bijection on the window: rho^{-1}(" +
                                         it->second.str() + ") = rho^{-1}(" + x.str() + ") = " +
                                         pre.str());
        }
        if (spec.rho)
            for (const auto& [pre, x] : table)
                if (!(spec.rho(pre) == x))
                    throw precondition_error("rho(rho_inverse(" + x.str() + ")) != " + x.str());
    }

    {
        bool ok = true;
        std::string detail;
        for (const Element& x : window.elements) {
            const Element pre = spec.rho_inverse(x);
            const double d =
                algebra::norm(aspec, f(x) - spec.p(pre) * f(pre) - spec.q(pre));
            if (d > psi(pre)) {
                ok = false;
                detail = "equation defect " + std::to_string(d) + " exceeds psi at " + pre.str();
                break;
            }
        }
        if (!ok) {
            report.verdict = "hypotheses-not-met";
            report.detail = detail;
            return report;
        }
    }

    fixedpoint::Operator op;
    op.lipschitz = L;
    op.provenance = "backward linear operator on the inverse orbit";
    op.apply = [spec](const MapFn& h) -> MapFn {
        return [spec, h](const Element& x) {
            const Element pre = spec.rho_inverse(x);
            return spec.p(pre) * h(pre) + spec.q(pre);
        };
    };
    ControlFunction weight = ControlFunction::from_fn(
        1,
        [spec, psi](const Element& x, const Element*) { return psi(spec.rho_inverse(x)); },
        "psi(rho^{-1}(x))");

    auto result =
        fixedpoint::iterate_to_fixed_point(aspec, op, f, weight, window, opts.tol, opts.max_steps);
    report.trace = result.trace;
    report.depth = static_cast<int>(result.trace.steps.size());
    if (result.trace.stop == fixedpoint::StopReason::domain_exhausted) {
        report.verdict = "window-exhausted";
        report.detail = result.trace.note;
        return report;
    }
    if (result.trace.stop != fixedpoint::StopReason::converged) {
        report.verdict = "hypotheses-not-met";
        report.detail = "iteration stopped without converging: " +
                        fixedpoint::stop_reason_name(result.trace.stop);
        return report;
    }
    report.T = result.fixed_point;
    if (opts.uniqueness_probe)
        report.uniqueness_delta = fixedpoint::uniqueness_probe(aspec, op, f, report.T, weight,
                                                               window, opts.tol, opts.max_steps);

    for (const Element& x : window.elements) {
        const Element pre = spec.rho_inverse(x);
        const double bound = psi(pre) / (1.0 - L);
        const double observed = algebra::norm(aspec, f(x) - report.T(x));
        report.bound_profile.push_back(bound);
        report.observed_error.push_back(observed);
        if (observed > bound + opts.tol)
            throw engine_inconsistency("bound fails to dominate error at " + x.str());
        const double residual =
            algebra::norm(aspec, report.T(x) - spec.p(pre) * report.T(pre) - spec.q(pre));
        report.residual_sup = std::max(report.residual_sup, residual);
        if (residual > opts.tol)
            throw engine_inconsistency("recovered T violates the equation at " + x.str());
    }
    report.verdict = "hur-stable-certified";
    return report;
}

// ---------------------------------------------------------------------------
// Pexider linear equation f(rho(x)) = p(x) g(x) + q(x).

struct PexiderLinearReport {
    std::string verdict;
    std::string detail;
    double lipschitz = 0.0;
    SolveReport forward; // run with the derived control
    std::vector<double> g_bound_profile;
    double g_observed_sup = 0.0;

    bool certified() const { return verdict == "hur-stable-certified"; }
};

inline PexiderLinearReport solve_pexider_linear(const Domain& domain, const algebra::Spec& aspec,
                                                const EquationSpec& spec, const MapFn& f,
                                                const MapFn& g, const ControlFunction& psi,
                                                const Window& window,
                                                const SolveOptions& opts = {}) {
    PexiderLinearReport report;

    auto L1 = find_lipschitz_forward(domain, spec, psi, window);
    if (!L1) {
        report.verdict = "hypotheses-not-met";
        report.detail = "control hypothesis psi(rho(x)) <= L |p(rho(x))| psi(x) admits no L < 1";
        return report;
    }
    double L = *L1;
    {
        bool any = false;
        for (const Element& x : window.elements) {
            const double gap = algebra::norm(aspec, f(x) - g(x));
            if (gap == 0.0) continue;
            any = true;
            const Element rx = spec.rho(x);
            const double ratio = algebra::norm(aspec, f(rx) - g(rx)) / gap;
            L = std::max(L, ratio);
        }
        if (any && !(L < 1.0)) {
            report.verdict = "hypotheses-not-met";
            report.detail = "||f(rho(x)) - g(rho(x))|| <= L ||f(x) - g(x)|| fails for every L < 1";
            return report;
        }
    }
    report.lipschitz = L;

    ControlFunction tilde = model::derive_pexider_linear_control(aspec, psi, spec.p, f, g);

    SolveOptions inner = opts;
    SolveReport fwd = solve_linear_forward(domain, aspec, spec, f, tilde, window, inner);
    if (!fwd.certified()) {
        report.verdict = fwd.verdict;
        report.detail = fwd.detail;
        report.forward = std::move(fwd);
        return report;
    }

    for (std::size_t k = 0; k < window.elements.size(); ++k) {
        const Element& x = window.elements[k];
        const double bound =
            (L / (1.0 - L)) * (tilde(x) + psi(x)) / std::abs(spec.p(x)) + opts.tol;
        const double observed = algebra::norm(aspec, g(x) - fwd.T(x));
        report.g_bound_profile.push_back(bound);
        report.g_observed_sup = std::max(report.g_observed_sup, observed);
        if (observed > bound)
            throw engine_inconsistency("second-function bound fails at " + x.str() + ": " +
                                       std::to_string(observed) + " > " + std::to_string(bound));
    }
    report.forward = std::move(fwd);
    report.verdict = "hur-stable-certified";
    return report;
}

// ---------------------------------------------------------------------------
// Common stability for commuting families of homogeneous equations.

struct FamilyMember {
    std::string label;
    SelfMap rho;
    ScalarMapFn p;
    ControlFunction psi; // arity 1
    double lipschitz = 0.0;
};

struct FamilySpec {
    std::vector<FamilyMember> members;

    /// P_{i,n}(x) = prod_{k=0}^{n-1} p_i(rho_i^k(x)).
    static Complex product_along_orbit(const FamilyMember& m, const Element& x, int n) {
        Complex prod(1.0, 0.0);
        Element cur = x;
        for (int k = 0; k < n; ++k) {
            prod *= m.p(cur);
            if (k + 1 < n) cur = m.rho(cur);
        }
        return prod;
    }

    /// theta_{i,n}(x) = (1 - L_i^n) psi_i(x) / ((1 - L_i) |p_i(x)|).
    static double theta(const FamilyMember& m, const Element& x, int n) {
        return (1.0 - std::pow(m.lipschitz, n)) * m.psi(x) /
               ((1.0 - m.lipschitz) * std::abs(m.p(x)));
    }
};

struct ConditionCheck {
    int condition = 0; // 1..4
    bool passed = true;
    std::string witness;
};

struct CommonReport {
    std::string verdict; // common-stable-certified | hypotheses-not-met
    std::string detail;
    std::vector<ConditionCheck> conditions;
    std::vector<SolveReport> per_index;
    MapFn T;
    double pairwise_gap = 0.0;
    std::vector<double> bound_profile;
    std::vector<double> observed_error;
    double residual_sup = 0.0;

    bool certified() const { return verdict == "common-stable-certified"; }
};

/// Theorem machinery for the system f(rho_i(x)) = p_i(x) f(x): checks the
/// four admissibility conditions numerically, constructs each T_i via the
/// forward solver, insists the limits coincide, and certifies the common
/// function against every equation of the family.
inline CommonReport solve_common_stability(const Domain& domain, const algebra::Spec& aspec,
                                           const FamilySpec& family, const MapFn& f,
                                           const Window& window, const SolveOptions& opts = {},
                                           int condition_depth = 64) {
    if (family.members.empty()) throw precondition_error("family must be non-empty");
    CommonReport report;

    auto fail = [&](int cond, const std::string& witness) {
        report.conditions.push_back({cond, false, witness});
        report.verdict = "hypotheses-not-met";
        report.detail = "condition (" + std::to_string(cond) + ") fails: " + witness;
    };

    // (1) Per-index contraction constants below 1.
    for (const FamilyMember& m : family.members) {
        if (!(m.lipschitz > 0.0 && m.lipschitz < 1.0)) {
            fail(1, "L_" + m.label + " = " + std::to_string(m.lipschitz) + " outside (0,1)");
            return report;
        }
        for (const Element& x : window.elements) {
            const double w = m.psi(x);
            if (w == 0.0) continue;
            const Element rx = m.rho(x);
            if (m.psi(rx) > m.lipschitz * std::abs(m.p(rx)) * w * (1.0 + 1e-12)) {
                fail(1, "psi_" + m.label + "(rho(x)) > L |p| psi at x=" + x.str());
                return report;
            }
        }
    }
    report.conditions.push_back({1, true, ""});

    // (2) Actions commute, checked in exact grid arithmetic.
    for (std::size_t i = 0; i < family.members.size(); ++i)
        for (std::size_t j = i + 1; j < family.members.size(); ++j)
            for (const Element& x : window.elements) {
                const auto& mi = family.members[i];
                const auto& mj = family.members[j];
                if (!(mi.rho(mj.rho(x)) == mj.rho(mi.rho(x)))) {
                    fail(2, "rho_" + mi.label + " and rho_" + mj.label +
                                " do not commute at x=" + x.str());
                    return report;
                }
            }
    report.conditions.push_back({2, true, ""});

    // (3) Each p_i is invariant along the other actions, exact comparison.
    for (std::size_t i = 0; i < family.members.size(); ++i)
        for (std::size_t j = 0; j < family.members.size(); ++j) {
            if (i == j) continue;
            for (const Element& x : window.elements) {
                const auto& mi = family.members[i];
                const auto& mj = family.members[j];
                if (mi.p(mj.rho(x)) != mi.p(x)) {
                    fail(3, "p_" + mi.label + "(rho_" + mj.label + "(x)) != p_" + mi.label +
                                "(x) at x=" + x.str());
                    return report;
                }
            }
        }
    report.conditions.push_back({3, true, ""});

    // (4) theta_{i,n}(rho_j^n(x)) / |P_{j,n}(x)| -> 0, tail-fitted.
    for (std::size_t i = 0; i < family.members.size(); ++i)
        for (std::size_t j = 0; j < family.members.size(); ++j) {
            if (i == j) continue;
            const auto& mi = family.members[i];
            const auto& mj = family.members[j];
            for (const Element& x : window.elements) {
                std::vector<double> seq;
                Element orbit = x;
                for (int n = 1; n <= condition_depth; ++n) {
                    try {
                        orbit = mj.rho(orbit);
                        domain.require(orbit);
                    } catch (const range_error&) {
                        break;
                    }
                    const double pn = std::abs(FamilySpec::product_along_orbit(mj, x, n));
                    if (!(pn > 0.0) || pn > algebra::kOverflowThreshold) break;
                    seq.push_back(FamilySpec::theta(mi, orbit, n) / pn);
                }
                if (seq.size() < 8) continue;
                const double limit = numeric::tail_limit(seq);
                const double scale = std::max(1.0, seq.front());
                if (!(limit <= opts.tol * scale)) {
                    fail(4, "theta_{" + mi.label + ",n}(rho_" + mj.label +
                                "^n(x))/|P_{" + mj.label + ",n}(x)| stalls at " +
                                std::to_string(limit) + " for x=" + x.str());
                    return report;
                }
            }
        }
    report.conditions.push_back({4, true, ""});

    // Per-index stabilization (homogeneous forward solve), then agreement.
    // The common T must satisfy every equation of the family within tol, and
    // the residual against equation j is amplified by |p_j|; each inner solve
    // therefore runs at a tolerance shrunk by the largest multiplier.
    double max_p = 1.0;
    for (const FamilyMember& m : family.members)
        for (const Element& x : window.elements) max_p = std::max(max_p, std::abs(m.p(x)));
    std::vector<std::vector<Value>> t_values;
    for (const FamilyMember& m : family.members) {
        EquationSpec eq;
        eq.rho = m.rho;
        eq.p = m.p;
        eq.q = zero_map(aspec.dimension);
        SolveOptions inner = opts;
        inner.tol = opts.tol / (1.0 + max_p);
        inner.uniqueness_probe = opts.uniqueness_probe && report.per_index.empty();
        SolveReport solved = solve_linear_forward(domain, aspec, eq, f, m.psi, window, inner);
        if (!solved.certified()) {
            report.verdict = "hypotheses-not-met";
            report.detail = "index " + m.label + ": " + solved.verdict + " (" + solved.detail + ")";
            report.per_index.push_back(std::move(solved));
            return report;
        }
        std::vector<Value> vals;
        for (const Element& y : window.elements) vals.push_back(solved.T(y));
        t_values.push_back(std::move(vals));
        report.per_index.push_back(std::move(solved));
    }

    for (std::size_t i = 0; i < t_values.size(); ++i)
        for (std::size_t j = i + 1; j < t_values.size(); ++j)
            for (std::size_t k = 0; k < window.elements.size(); ++k) {
                const double gap = algebra::norm(aspec, t_values[i][k] - t_values[j][k]);
                report.pairwise_gap = std::max(report.pairwise_gap, gap);
                if (gap > 2.0 * opts.tol)
                    throw engine_inconsistency(
                        "T_" + family.members[i].label + " and T_" + family.members[j].label +
                        " disagree by " + std::to_string(gap) + " at " +
                        window.elements[k].str());
            }

    const MapFn T = report.per_index.front().T;
    report.T = T;

    for (std::size_t k = 0; k < window.elements.size(); ++k) {
        const Element& x = window.elements[k];
        double bound = algebra::kInfinity;
        for (const FamilyMember& m : family.members)
            bound = std::min(bound, m.psi(x) / ((1.0 - m.lipschitz) * std::abs(m.p(x))));
        const double observed = algebra::norm(aspec, f(x) - t_values.front()[k]);
        report.bound_profile.push_back(bound);
        report.observed_error.push_back(observed);
        if (observed > bound + opts.tol)
            throw engine_inconsistency("common bound fails to dominate error at " + x.str());
        for (const FamilyMember& m : family.members) {
            const double residual =
                algebra::norm(aspec, T(m.rho(x)) - m.p(x) * T(x));
            report.residual_sup = std::max(report.residual_sup, residual);
            if (residual > opts.tol)
                throw engine_inconsistency("common T violates equation " + m.label + " at " +
                                           x.str());
        }
    }
    report.verdict = "common-stable-certified";
    return report;
}

/// Convenience constructor for constant-coefficient families: derives each
/// L_i from the control ratio and keeps exactly the members with |c_i| > 1
/// and L_i |c_i| <= 1.
struct ConstantFamilyInput {
    std::string label;
    SelfMap rho;
    Complex c;
    ControlFunction psi;
};

inline FamilySpec family_from_constants([[maybe_unused]] const Domain& domain,
                                        const std::vector<ConstantFamilyInput>& inputs,
                                        const Window& window) {
    FamilySpec family;
    for (const ConstantFamilyInput& in : inputs) {
        const double ca = std::abs(in.c);
        if (!(ca > 1.0)) continue;
        double L = 0.0;
        bool any = false;
        for (const Element& x : window.elements) {
            const double w = in.psi(x);
            if (w == 0.0) continue;
            any = true;
            L = std::max(L, in.psi(in.rho(x)) / (ca * w));
        }
        if (!any) L = 1.0 / (2.0 * ca);
        if (!(L > 0.0)) L = 1.0 / (2.0 * ca);
        if (!(L < 1.0) || L * ca > 1.0 + 1e-12) continue;
        Complex c = in.c;
        family.members.push_back(
            {in.label, in.rho, [c](const Element&) { return c; }, in.psi, L});
    }
    return family;
}

// ---------------------------------------------------------------------------
// Superstability of f(x*y) = g(y) f(x) through common stability.

struct ViaCommonReport {
    std::string verdict; // equation-certified | hypotheses-not-met | conclusion-not-observed
    std::string detail;
    std::vector<Element> j_set;
    bool g_unbounded = false;
    CommonReport common;
    double conclusion_defect = 0.0;
};

/// Builds the family rho_i(x) = x*i, c_i = g(i), psi_i(x) = phi(i, x) over
/// the admissible set J = { i : |g(i)| > 1 and some L_i in (0,1) has
/// L_i |g(i)| <= 1 with phi(x, y*i) <= L_i |g(i)| phi(x, y) }, runs the common
/// solver, and for unbounded g asserts the equation itself on window pairs.
inline ViaCommonReport exponential_via_common(const Domain& domain, const algebra::Spec& aspec,
                                              const MapFn& f, const ScalarMapFn& g,
                                              const ControlFunction& phi, const Window& window,
                                              const SolveOptions& opts = {},
                                              double unbounded_threshold = 1e6) {
    ViaCommonReport report;

    {
        std::vector<std::pair<double, double>> profile;
        for (const Element& y : window.elements)
            profile.emplace_back(domain.magnitude(y), std::abs(g(y)));
        report.g_unbounded = numeric::unbounded_growth(std::move(profile), unbounded_threshold);
    }
    if (!report.g_unbounded) {
        report.verdict = "hypotheses-not-met";
        report.detail = "g shows no unbounded growth over the window";
        return report;
    }

    std::vector<ConstantFamilyInput> inputs;
    for (const Element& i : window.elements) {
        const Complex gi = g(i);
        const double ga = std::abs(gi);
        if (!(ga > 1.0)) continue;
        // Smallest L_i with phi(x, y*i) <= L_i |g(i)| phi(x, y) on window pairs.
        double L = 0.0;
        bool any = false;
        bool feasible = true;
        window.for_each_pair([&](const Element& x, const Element& y) {
            if (!feasible) return;
            const double w = phi(x, y);
            if (w == 0.0) {
                if (phi(x, domain.op(y, i)) > 0.0) feasible = false;
                return;
            }
            any = true;
            L = std::max(L, phi(x, domain.op(y, i)) / (ga * w));
        });
        if (!feasible) continue;
        if (!any) L = 1.0 / (2.0 * ga);
        if (!(L > 0.0)) L = 1.0 / (2.0 * ga);
        if (!(L < 1.0) || L * ga > 1.0 + 1e-12) continue;

        ConstantFamilyInput in;
        in.label = i.str();
        Element shift = i;
        in.rho = [&domain, shift](const Element& x) { return domain.op(x, shift); };
        in.c = gi;
        Element first = i;
        in.psi = ControlFunction::from_fn(
            1, [phi, first](const Element& x, const Element*) { return phi(first, x); },
            "phi(i,x) with i=" + i.str());
        inputs.push_back(std::move(in));
        report.j_set.push_back(i);
    }
    if (inputs.empty()) {
        report.verdict = "hypotheses-not-met";
        report.detail = "admissible set J is empty";
        return report;
    }

    FamilySpec family;
    for (const ConstantFamilyInput& in : inputs) {
        Complex c = in.c;
        double L = 0.0;
        bool any = false;
        for (const Element& x : window.elements) {
            const double w = in.psi(x);
            if (w == 0.0) continue;
            any = true;
            L = std::max(L, in.psi(in.rho(x)) / (std::abs(c) * w));
        }
        if (!any || !(L > 0.0)) L = 1.0 / (2.0 * std::abs(c));
        family.members.push_back(
            {in.label, in.rho, [c](const Element&) { return c; }, in.psi, L});
    }

    report.common = solve_common_stability(domain, aspec, family, f, window, opts);
    if (!report.common.certified()) {
        report.verdict = "hypotheses-not-met";
        report.detail = report.common.detail;
        return report;
    }

    window.for_each_pair([&](const Element& x, const Element& y) {
        const double d = algebra::norm(aspec, f(domain.op(x, y)) - g(y) * f(x));
        report.conclusion_defect = std::max(report.conclusion_defect, d);
    });
    if (report.conclusion_defect <= opts.tol) {
        report.verdict = "equation-certified";
    } else {
        report.verdict = "conclusion-not-observed";
        report.detail = "family certified but the full equation defect " +
                        std::to_string(report.conclusion_defect) + " stays above tol";
    }
    return report;
}

} // namespace ulamlab::linstab
