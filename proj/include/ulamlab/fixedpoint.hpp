#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ulamlab/algebra.hpp"
#include "ulamlab/function_model.hpp"

namespace ulamlab::fixedpoint {

using algebra::Spec;
using algebra::Value;
using model::ControlFunction;
using model::MapFn;
using semigroup::Element;
using semigroup::Window;

/// A strictly contractive self-map of function space together with its
/// declared Lipschitz constant and where that constant comes from.
struct Operator {
    std::function<MapFn(const MapFn&)> apply;
    double lipschitz = 0.5;
    std::string provenance;
};

enum class StopReason { converged, max_steps, overflow, domain_exhausted };

inline std::string stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::converged: return "converged";
        case StopReason::max_steps: return "max-steps";
        case StopReason::overflow: return "overflow";
        case StopReason::domain_exhausted: return "domain-exhausted";
    }
    return "?";
}

struct TraceStep {
    int step;        // n
    double distance; // d(J^n f0, J^{n+1} f0)
    double ratio;    // distance / previous distance, NaN on the first step
};

struct Trace {
    std::vector<TraceStep> steps;
    StopReason stop = StopReason::converged;
    std::string note;
    double declared_lipschitz = 0.0;
};

struct Result {
    MapFn fixed_point;
    double bound = 0.0; // d(J f0, f0) / (1 - L), in the weighted metric
    Trace trace;
};

inline constexpr int kDefaultMaxSteps = 200;

/// Iterates J from f0 until successive iterates are within tol*(1-L) in the
/// weighted sup metric, which pins the distance to the fixed point below tol.
/// The certified bound d(J f0, f0)/(1-L) uses the declared constant.
///
/// Throws precondition_error when d(J f0, f0) is infinite (the inapplicable
/// branch of the alternative) and contraction_violation when the observed
/// ratio exceeds L + 0.05 three steps in a row.
inline Result iterate_to_fixed_point(const Spec& spec, const Operator& op, const MapFn& f0,
                                     const ControlFunction& weight, const Window& window,
                                     double tol, int max_steps = kDefaultMaxSteps) {
    if (!(op.lipschitz > 0.0 && op.lipschitz < 1.0))
        throw precondition_error("declared Lipschitz constant must lie in (0,1), got " +
                                 std::to_string(op.lipschitz));
    if (!(tol > 0.0)) throw precondition_error("tol must be positive");

    const double L = op.lipschitz;
    const double stop_at = tol * (1.0 - L);
    auto metric = [&](const MapFn& u, const MapFn& v) {
        return algebra::generalized_metric(
            spec, u, v, [&](const Element& y) { return weight(y); }, window);
    };

    Result res;
    res.trace.declared_lipschitz = L;
    MapFn prev = f0;
    MapFn cur = op.apply(f0);

    double dist;
    try {
        dist = metric(prev, cur);
    } catch (const range_error&) {
        throw precondition_error(
            "operator escapes the domain on the very first application; enlarge the extent");
    }
    if (std::isinf(dist))
        throw precondition_error(
            "d(J(f),f) is infinite: the fixed-point alternative's inapplicable branch");

    res.bound = dist / (1.0 - L);
    res.trace.steps.push_back({0, dist, std::numeric_limits<double>::quiet_NaN()});

    int violation_streak = 0;
    for (int n = 1; n <= max_steps; ++n) {
        if (dist <= stop_at) {
            res.trace.stop = StopReason::converged;
            res.fixed_point = cur;
            return res;
        }
        MapFn next = op.apply(cur);
        double next_dist;
        try {
            next_dist = metric(cur, next);
        } catch (const range_error& e) {
            res.trace.stop = StopReason::domain_exhausted;
            res.trace.note = std::string("orbit left the evaluable grid after ") +
                             std::to_string(n - 1) + " certified steps: " + e.what();
            res.fixed_point = cur;
            return res;
        }
        const double ratio = dist > 0 ? next_dist / dist : std::numeric_limits<double>::quiet_NaN();
        res.trace.steps.push_back({n, next_dist, ratio});
        if (std::isinf(next_dist)) {
            res.trace.stop = StopReason::overflow;
            res.fixed_point = cur;
            return res;
        }
        if (std::isfinite(ratio) && ratio > L + 0.05) {
            if (++violation_streak >= 3)
                throw contraction_violation(
                    "observed contraction ratio " + std::to_string(ratio) +
                    " exceeds declared L=" + std::to_string(L) +
                    "+0.05 for 3 consecutive steps (" + op.provenance + ")");
        } else {
            violation_streak = 0;
        }
        prev = cur;
        cur = next;
        dist = next_dist;
    }
    res.trace.stop = dist <= stop_at ? StopReason::converged : StopReason::max_steps;
    res.fixed_point = cur;
    return res;
}

/// Empirical Lipschitz estimate: max over probe pairs of d(Ju, Jv)/d(u, v).
template <typename ProbePairs>
double estimate_contraction(const Spec& spec, const Operator& op, const ProbePairs& probes,
                            const ControlFunction& weight, const Window& window) {
    auto metric = [&](const MapFn& u, const MapFn& v) {
        return algebra::generalized_metric(
            spec, u, v, [&](const Element& y) { return weight(y); }, window);
    };
    std::size_t usable = 0;
    double observed = 0.0;
    for (const auto& [u, v] : probes) {
        const double d = metric(u, v);
        if (d == 0.0 || std::isinf(d)) continue;
        const double dj = metric(op.apply(u), op.apply(v));
        observed = std::max(observed, dj / d);
        ++usable;
    }
    if (usable == 0)
        throw precondition_error("degenerate probes: all probe distances are zero or infinite");
    if (usable < 3)
        throw precondition_error("contraction estimation needs >= 3 usable probe pairs, got " +
                                 std::to_string(usable));
    return observed;
}

/// Restarts the iteration from a second point at finite distance from f0 and
/// returns d(T, T'); the fixed point is unique in that ball, so the two runs
/// must agree within 2*tol.
inline double uniqueness_probe(const Spec& spec, const Operator& op, const MapFn& f0,
                               const MapFn& primary_fixed_point, const ControlFunction& weight,
                               const Window& window, double tol,
                               int max_steps = kDefaultMaxSteps) {
    MapFn g0 = [f0, spec, &weight](const Element& y) {
        Value v = f0(y);
        const algebra::Complex bump(0.5 * weight(y), 0.0);
        for (auto& c : v.comp) c += bump;
        return v.check();
    };
    Result second = iterate_to_fixed_point(spec, op, g0, weight, window, tol, max_steps);
    return algebra::generalized_metric(
        spec, primary_fixed_point, second.fixed_point,
        [&](const Element& y) { return weight(y); }, window);
}

} // namespace ulamlab::fixedpoint
