#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ulamlab/additive.hpp"
#include "ulamlab/exponential.hpp"
#include "ulamlab/linear.hpp"
#include "ulamlab/report.hpp"

namespace ulamlab::scenario {

using Json = nlohmann::ordered_json;
using model::ApproximateMap;
using model::ControlFunction;
using model::MapFn;
using semigroup::Domain;
using semigroup::Element;
using semigroup::Window;

inline constexpr const char* kArtifactVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Catalog.

struct CatalogEntry {
    std::string kind;
    std::string description;
    std::string anchor; // which piece of the stability theory it exercises
};

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"exponential.defect", "sup of ||f(x*y) - g(x) f(y)|| over window pairs",
         "defect of the exponential-type equation"},
        {"exponential.stabilize", "construct T = lim f(y*a^n)/g(a)^n over the admissible set",
         "HUR-stability of f(x*y) = g(x) f(y), scalar g"},
        {"exponential.algebra", "stabilizer driven through the hat-lift of algebra-valued g",
         "HUR-stability in a unital commutative Banach algebra"},
        {"exponential.pexider", "split equation f(x*y) = g(x) h(y) via derived controls",
         "Pexider exponential stability and its constant-control corollaries"},
        {"exponential.dichotomy", "bounded-or-exponential verdict with the quadratic threshold",
         "superstability dichotomy, (1+sqrt(1+4 eps))/2 bound"},
        {"exponential.oracle", "exhaustive check of the dichotomy over all maps Z_m -> grid",
         "brute-force verification of the dichotomy at desk scale"},
        {"gallery.baker-example", "(e^x, delta) in C^2 under the max norm",
         "non-multiplicative-norm counterexample with constant defect |delta - delta^2|"},
        {"additive.defect", "sup of ||f(x+y) - g(x) - h(y)|| over window pairs",
         "defect of the Pexider additive equation"},
        {"additive.hyperstability", "Cesaro and scaled-ray limit conditions on the control",
         "hyperstability of f(x+y) = f(x) + f(y)"},
        {"additive.superstability", "exp-composition reduction along an admissible direction",
         "superstability of the additive equation on semigroups"},
        {"additive.logarithmic", "sign-normalized additive reduction for real-valued maps",
         "superstability of the logarithmic equation"},
        {"additive.asymptotic", "radius profile of the defect including fixed-coordinate rays",
         "asymptotic-vanishing defect forces exact additivity"},
        {"additive.pexider", "monoid controls psi-tilde and psi-hat from the identity element",
         "Pexider additive equation on monoids"},
        {"additive.jensen", "f(x) := 2 J(x/2) turns the midpoint equation into Pexider form",
         "midpoint-convexity reduction"},
        {"linear.forward", "iterate J(h)(x) = (h(rho(x)) - q(x))/p(x) along the orbit",
         "HUR-stability of f(rho(x)) = p(x) f(x) + q(x)"},
        {"linear.backward", "iterate along rho^{-1} when rho permutes the window",
         "backward-orbit stability of the linear equation"},
        {"linear.pexider", "two-function linear equation via the gap-augmented control",
         "Pexider linear equation"},
        {"linear.common", "one T for a commuting family f(rho_i(x)) = p_i(x) f(x)",
         "common stability of homogeneous linear systems"},
        {"linear.exponential-via-common", "multiplier equation f(x*y) = g(y) f(x) as a family",
         "superstability of the multiplier equation through common stability"},
        {"gallery.gajda-no-certificate", "f(2x) = 2 f(x) with control theta |x|",
         "scaling counterexample: no admissible contraction constant exists"},
    };
    return entries;
}

// ---------------------------------------------------------------------------
// Config parsing.

struct Tolerances {
    double tol = 1e-9;
    int n_max = 512;
    int max_steps = fixedpoint::kDefaultMaxSteps;
    double unbounded_threshold = 1e6;
};

class Context {
public:
    Json config;
    std::string kind;
    std::string expect;
    std::unique_ptr<Domain> domain;
    algebra::Spec spec;
    Window window;
    Tolerances tolerances;
    bool uniqueness_probe = false;
    bool want_traces = true;
    std::optional<std::uint64_t> seed_override;

    const Domain& dom() const { return *domain; }

    Element element(const Json& j) const {
        if (j.is_array()) {
            std::vector<std::int64_t> coords;
            for (const auto& c : j) coords.push_back(c.get<std::int64_t>());
            return Element(std::move(coords));
        }
        return Element(j.get<std::int64_t>());
    }

    ApproximateMap function(const std::string& name, int dimension = 0) const {
        const Json& fns = config.at("functions");
        if (!fns.contains(name))
            throw config_error("scenario needs function '" + name + "'");
        const Json& fj = fns.at(name);
        std::vector<std::string> comps;
        for (const auto& c : fj.at("components")) comps.push_back(c.get<std::string>());
        const int dim = dimension > 0 ? dimension : spec.dimension;
        algebra::Spec fspec(dim, dim == 1 ? algebra::NormRule::modulus : spec.norm);
        std::optional<model::Perturbation> pert;
        if (fj.contains("perturbation")) {
            const Json& pj = fj.at("perturbation");
            std::uint64_t seed = pj.at("seed").get<std::uint64_t>();
            if (seed_override) seed = *seed_override;
            pert = model::Perturbation{expr::parse(pj.at("envelope").get<std::string>()), seed};
            for (const Element& a : window.elements) {
                expr::Env env;
                model::detail::bind_element(env, dom(), a);
                if (expr::eval(pert->envelope, env).real() < 0.0)
                    throw config_error("function '" + name + "' envelope is negative at " +
                                       a.str());
            }
        }
        return ApproximateMap::parse(dom(), fspec, comps, std::move(pert));
    }

    MapFn map(const std::string& name) const { return MapFn(function(name)); }

    model::ScalarMapFn scalar_map(const std::string& name) const {
        ApproximateMap m = function(name, 1);
        return [m](const Element& a) { return m(a).comp[0]; };
    }

    ControlFunction control(const std::string& name, int arity) const {
        const Json& cj = config.at("controls").at(name);
        std::map<std::string, double> params;
        if (cj.contains("params"))
            for (const auto& [k, v] : cj.at("params").items()) params[k] = v.get<double>();
        const int declared = cj.contains("arity") ? cj.at("arity").get<int>() : arity;
        if (declared != arity)
            throw config_error("control '" + name + "' must have arity " + std::to_string(arity));
        return ControlFunction::parse(dom(), arity, cj.at("expr").get<std::string>(), params);
    }

    std::vector<addstab::BaseTuple> base_tuples() const {
        std::vector<addstab::BaseTuple> out;
        for (const Json& bj : config.at("base-pairs")) {
            addstab::BaseTuple b;
            b.x0 = element(bj.at("x0"));
            b.y0 = element(bj.at("y0"));
            b.x = element(bj.at("x"));
            b.y = element(bj.at("y"));
            out.push_back(std::move(b));
        }
        return out;
    }

    /// Self-map of the domain from a {"shift": n} form or an expression over
    /// x; expression results must land exactly on the grid.
    linstab::SelfMap self_map(const Json& j) const {
        if (j.is_object() && j.contains("shift")) {
            const Element s = element(j.at("shift"));
            const Domain& d = dom();
            return [&d, s](const Element& x) { return d.op(x, s); };
        }
        if (dom().dimension() != 1)
            throw config_error("expression self-maps need a scalar domain");
        expr::Ast ast = expr::parse(j.get<std::string>());
        const Domain& d = dom();
        return [&d, ast](const Element& x) {
            expr::Env env;
            env.vars["x"] = algebra::Complex(d.value(x), 0.0);
            const algebra::Complex v = expr::eval(ast, env);
            if (v.imag() != 0.0) throw range_error("self-map produced a non-real value");
            std::int64_t index = 0;
            switch (d.kind()) {
                case semigroup::Kind::naturals_add:
                case semigroup::Kind::integers_mod:
                    index = std::llround(v.real());
                    break;
                case semigroup::Kind::reals_add_grid:
                    index = std::llround(v.real() / d.step().value());
                    break;
                case semigroup::Kind::reals_pos_mul_grid:
                    index = std::llround(std::log(v.real()) / std::log(d.step().value()));
                    break;
                default:
                    throw config_error("self-map unsupported on this domain kind");
            }
            if (d.kind() == semigroup::Kind::integers_mod)
                index = ((index % d.modulus()) + d.modulus()) % d.modulus();
            Element r(index);
            if (d.coordinate_value(index) != v.real())
                throw range_error("self-map left the grid at " + x.str() + " (value " +
                                  std::to_string(v.real()) + ")");
            d.require(r);
            return r;
        };
    }
};

inline Json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error("config is not valid JSON: " + std::string(e.what()));
    }
    return j;
}

namespace detail {

inline std::unique_ptr<Domain> parse_domain(const Json& dj) {
    const std::string kind = dj.at("kind").get<std::string>();
    auto step = [&]() {
        const Json& s = dj.at("step");
        return s.is_string() ? Rational::parse(s.get<std::string>())
                             : Rational::parse(s.dump());
    };
    auto extent_pair = [&]() -> std::pair<std::int64_t, std::int64_t> {
        const Json& e = dj.at("extent");
        if (e.is_array()) return {e.at(0).get<std::int64_t>(), e.at(1).get<std::int64_t>()};
        return {-e.get<std::int64_t>(), e.get<std::int64_t>()};
    };
    if (kind == "naturals-add")
        return std::make_unique<Domain>(Domain::naturals_add(dj.at("extent").get<std::int64_t>()));
    if (kind == "integers-mod-m")
        return std::make_unique<Domain>(Domain::integers_mod(dj.at("modulus").get<std::int64_t>()));
    if (kind == "reals-add-grid") {
        auto [lo, hi] = extent_pair();
        return std::make_unique<Domain>(Domain::reals_add_grid(step(), lo, hi));
    }
    if (kind == "reals-positive-mul-grid") {
        auto [lo, hi] = extent_pair();
        return std::make_unique<Domain>(Domain::reals_pos_mul_grid(step(), lo, hi));
    }
    if (kind == "vector-naturals-k")
        return std::make_unique<Domain>(Domain::vector_naturals(
            dj.at("dimension").get<int>(), dj.at("extent").get<std::int64_t>()));
    throw config_error("unknown domain kind: " + kind);
}

inline algebra::Spec parse_algebra(const Json& config) {
    if (!config.contains("algebra")) return algebra::Spec(1, algebra::NormRule::modulus);
    const Json& aj = config.at("algebra");
    const int dim = aj.value("dimension", 1);
    const std::string norm = aj.value("norm", dim == 1 ? "modulus" : "max");
    algebra::NormRule rule;
    if (norm == "modulus") rule = algebra::NormRule::modulus;
    else if (norm == "max") rule = algebra::NormRule::max;
    else if (norm == "euclidean") rule = algebra::NormRule::euclidean;
    else throw config_error("unknown norm rule: " + norm);
    return algebra::Spec(dim, rule);
}

inline Window parse_window(const Domain& domain, const Json& config) {
    const Json& wj = config.at("window");
    semigroup::PairPolicy pairs;
    if (wj.contains("pairs") && wj.at("pairs").is_object()) {
        const Json& pj = wj.at("pairs");
        pairs = semigroup::PairPolicy::seeded(pj.at("seed").get<std::uint64_t>(),
                                              pj.at("count").get<std::size_t>());
    }
    Window w = (domain.kind() == semigroup::Kind::integers_mod && !wj.contains("lo"))
                   ? enumerate_window(domain)
                   : enumerate_window(domain, wj.at("lo").get<std::int64_t>(),
                                      wj.at("hi").get<std::int64_t>());
    w.pairs = pairs;
    return w;
}

} // namespace detail

inline Context make_context(const Json& config, std::optional<std::uint64_t> seed_override = {}) {
    Context ctx;
    ctx.config = config;
    ctx.kind = config.at("kind").get<std::string>();
    ctx.expect = config.value("expect", std::string{});
    ctx.domain = detail::parse_domain(config.at("domain"));
    ctx.spec = detail::parse_algebra(config);
    ctx.window = detail::parse_window(*ctx.domain, config);
    ctx.seed_override = seed_override;
    if (config.contains("tolerances")) {
        const Json& tj = config.at("tolerances");
        ctx.tolerances.tol = tj.value("tol", 1e-9);
        ctx.tolerances.n_max = tj.value("n-max", 512);
        ctx.tolerances.max_steps = tj.value("max-steps", fixedpoint::kDefaultMaxSteps);
        ctx.tolerances.unbounded_threshold = tj.value("unbounded-threshold", 1e6);
    }
    if (config.contains("report")) {
        const Json& rj = config.at("report");
        ctx.uniqueness_probe = rj.value("uniqueness-probe", false);
        ctx.want_traces = rj.value("traces", true);
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Validation: all problems, not just the first.

inline std::vector<std::string> validate(const Json& config) {
    std::vector<std::string> problems;
    auto need = [&](const char* key) {
        if (!config.contains(key)) problems.push_back(std::string("missing field '") + key + "'");
        return config.contains(key);
    };
    if (need("kind")) {
        const std::string kind = config.at("kind").get<std::string>();
        bool known = false;
        for (const auto& entry : catalog()) known = known || entry.kind == kind;
        if (!known) problems.push_back("unknown scenario kind: " + kind);
    }
    if (!config.contains("expect")) problems.push_back("missing field 'expect'");
    if (!config.contains("window")) problems.push_back("missing field 'window'");
    if (need("domain")) {
        try {
            detail::parse_domain(config.at("domain"));
        } catch (const std::exception& e) {
            problems.push_back(std::string("domain: ") + e.what());
        }
    }
    try {
        detail::parse_algebra(config);
    } catch (const std::exception& e) {
        problems.push_back(std::string("algebra: ") + e.what());
    }
    if (config.contains("functions"))
        for (const auto& [name, fj] : config.at("functions").items()) {
            if (!fj.contains("components")) {
                problems.push_back("function '" + name + "' needs components");
                continue;
            }
            for (const auto& c : fj.at("components")) {
                try {
                    expr::parse(c.get<std::string>());
                } catch (const parse_error& e) {
                    problems.push_back("function '" + name + "': " + e.what());
                }
            }
            if (fj.contains("perturbation")) {
                const Json& pj = fj.at("perturbation");
                if (!pj.contains("seed"))
                    problems.push_back("function '" + name +
                                       "' declares a perturbation without a seed");
                if (!pj.contains("envelope")) {
                    problems.push_back("function '" + name +
                                       "' declares a perturbation without an envelope");
                } else {
                    try {
                        expr::parse(pj.at("envelope").get<std::string>());
                    } catch (const parse_error& e) {
                        problems.push_back("function '" + name + "' envelope: " + e.what());
                    }
                }
            }
        }
    if (config.contains("controls"))
        for (const auto& [name, cj] : config.at("controls").items()) {
            if (!cj.contains("expr")) {
                problems.push_back("control '" + name + "' needs expr");
                continue;
            }
            try {
                expr::parse(cj.at("expr").get<std::string>());
            } catch (const parse_error& e) {
                problems.push_back("control '" + name + "': " + e.what());
            }
        }
    return problems;
}

// ---------------------------------------------------------------------------
// Kind dispatch.

struct RunResult {
    std::string verdict;
    std::string detail;
    Json payload; // full deterministic report
    int exit_code = 0;
    // CSV side-tables, exported by the writer when csv format is selected.
    std::vector<std::pair<std::string, fixedpoint::Trace>> traces;
    std::vector<std::string> profile_elements;
    std::vector<double> profile_bound, profile_observed;
    std::vector<std::pair<std::string, std::vector<double>>> sequences;
};

namespace detail {

inline Json profile_json(const Window& window, const std::vector<double>& bound,
                         const std::vector<double>& observed) {
    Json arr = Json::array();
    for (std::size_t k = 0; k < window.size(); ++k) {
        Json row;
        row["element"] = window.elements[k].str();
        if (k < bound.size()) row["bound"] = report::number(bound[k]);
        if (k < observed.size()) row["observed"] = report::number(observed[k]);
        arr.push_back(std::move(row));
    }
    return arr;
}

inline void stash_stabilize(const Context& ctx, const expstab::StabilizeReport& rep,
                            RunResult& out, const std::string& prefix = "") {
    Json j;
    j["verdict"] = rep.verdict;
    if (!rep.detail.empty()) j["detail"] = rep.detail;
    Json nset = Json::array();
    for (const auto& e : rep.n_set.members) {
        Json row;
        row["a"] = e.a.str();
        row["g-abs"] = report::number(e.g_abs);
        row["margin"] = report::number(e.margin);
        nset.push_back(std::move(row));
    }
    j["n-set"] = std::move(nset);
    if (!rep.dropped_members.empty()) {
        Json dropped = Json::array();
        for (const auto& a : rep.dropped_members) dropped.push_back(a.str());
        j["dropped-directions"] = std::move(dropped);
    }
    if (rep.certified()) {
        j["profile"] = profile_json(ctx.window, rep.bound_profile, rep.observed_error);
        j["pairwise-gap"] = report::number(rep.pairwise_gap);
        j["equation-residual"] = report::number(rep.equation_residual);
        j["product-identity-residual"] = report::number(rep.product_identity_residual);
        j["g-unbounded"] = rep.g_unbounded;
        out.profile_elements.clear();
        for (const auto& e : ctx.window.elements) out.profile_elements.push_back(e.str());
        out.profile_bound = rep.bound_profile;
        out.profile_observed = rep.observed_error;
    }
    if (rep.uniqueness_delta) j["uniqueness-delta"] = report::number(*rep.uniqueness_delta);
    if (ctx.want_traces) {
        Json traces = Json::array();
        for (const auto& [a, trace] : rep.traces) {
            Json tj = report::trace_to_json(trace);
            tj["direction"] = a.str();
            traces.push_back(std::move(tj));
            out.traces.emplace_back(prefix.empty() ? a.str() : prefix + ":" + a.str(), trace);
        }
        j["traces"] = std::move(traces);
    }
    out.payload[prefix.empty() ? "stabilizer" : prefix] = std::move(j);
}

inline void stash_solve(const Context& ctx, const linstab::SolveReport& rep, RunResult& out,
                        const std::string& key = "solver") {
    Json j;
    j["verdict"] = rep.verdict;
    if (!rep.detail.empty()) j["detail"] = rep.detail;
    j["lipschitz"] = report::number(rep.lipschitz);
    if (rep.certified()) {
        j["profile"] = profile_json(ctx.window, rep.bound_profile, rep.observed_error);
        j["residual-sup"] = report::number(rep.residual_sup);
        j["depth"] = rep.depth;
        out.profile_elements.clear();
        for (const auto& e : ctx.window.elements) out.profile_elements.push_back(e.str());
        out.profile_bound = rep.bound_profile;
        out.profile_observed = rep.observed_error;
    }
    if (rep.uniqueness_delta) j["uniqueness-delta"] = report::number(*rep.uniqueness_delta);
    if (ctx.want_traces) {
        j["trace"] = report::trace_to_json(rep.trace);
        out.traces.emplace_back(key, rep.trace);
    }
    out.payload[key] = std::move(j);
}

inline Json conditions_json(const addstab::HyperstabilityReport& rep, RunResult& out) {
    Json j;
    j["verdict"] = rep.verdict;
    if (!rep.met()) {
        j["worst-limit"] = report::number(rep.worst_limit);
        j["worst-label"] = rep.worst_label;
    }
    Json seqs = Json::array();
    for (const auto& s : rep.sequences) {
        Json row;
        row["label"] = s.label;
        row["fitted-limit"] = report::number(s.fitted_limit);
        row["overflowed"] = s.overflowed;
        row["samples"] = s.values.size();
        seqs.push_back(std::move(row));
        out.sequences.emplace_back(s.label, s.values);
    }
    j["sequences"] = std::move(seqs);
    return j;
}

inline expstab::StabilizeOptions stabilize_options(const Context& ctx) {
    expstab::StabilizeOptions opts;
    opts.tol = ctx.tolerances.tol;
    opts.max_steps = ctx.tolerances.max_steps;
    opts.uniqueness_probe = ctx.uniqueness_probe;
    opts.unbounded_threshold = ctx.tolerances.unbounded_threshold;
    return opts;
}

inline linstab::SolveOptions solve_options(const Context& ctx) {
    linstab::SolveOptions opts;
    opts.tol = ctx.tolerances.tol;
    opts.max_steps = ctx.tolerances.max_steps;
    opts.uniqueness_probe = ctx.uniqueness_probe;
    return opts;
}

inline linstab::EquationSpec parse_linear(const Context& ctx) {
    const Json& lj = ctx.config.at("linear");
    linstab::EquationSpec spec;
    spec.rho = ctx.self_map(lj.at("rho"));
    if (lj.contains("rho-inverse")) spec.rho_inverse = ctx.self_map(lj.at("rho-inverse"));
    {
        expr::Ast p_ast = expr::parse(lj.at("p").get<std::string>());
        const Domain& d = ctx.dom();
        spec.p = [&d, p_ast](const Element& x) {
            expr::Env env;
            env.vars["x"] = algebra::Complex(d.value(x), 0.0);
            return expr::eval(p_ast, env);
        };
    }
    if (lj.contains("q")) {
        expr::Ast q_ast = expr::parse(lj.at("q").get<std::string>());
        const Domain& d = ctx.dom();
        const int dim = ctx.spec.dimension;
        spec.q = [&d, q_ast, dim](const Element& x) {
            expr::Env env;
            env.vars["x"] = algebra::Complex(d.value(x), 0.0);
            const algebra::Complex v = expr::eval(q_ast, env);
            algebra::Value out = algebra::Value::zero(dim);
            for (auto& c : out.comp) c = v;
            return out.check();
        };
    } else {
        spec.q = linstab::zero_map(ctx.spec.dimension);
    }
    return spec;
}

// --- per-kind runners -------------------------------------------------------

inline void run_exponential_defect(Context& ctx, RunResult& out) {
    MapFn f = ctx.map("f");
    MapFn g = ctx.config.at("functions").contains("g") ? ctx.map("g") : f;
    auto rep = expstab::compute_defect_exponential(ctx.dom(), ctx.spec, f, g, ctx.window);
    out.payload["defect"] = {{"sup", report::number(rep.sup)},
                             {"witness", rep.arg_x.str() + "," + rep.arg_y.str()},
                             {"overflowed", rep.overflowed}};
    out.verdict = "defect-computed";
    if (ctx.config.contains("expect-defect")) {
        const Json& ej = ctx.config.at("expect-defect");
        const double want = ej.at("value").get<double>();
        const double within = ej.value("within", 1e-12);
        if (std::abs(rep.sup - want) > within) {
            out.verdict = "assert-failed";
            out.detail = "defect " + std::to_string(rep.sup) + " != " + std::to_string(want);
        }
    }
}

inline void run_exponential_stabilize(Context& ctx, RunResult& out) {
    auto rep = expstab::stabilize_exponential(ctx.dom(), ctx.spec, ctx.map("f"),
                                              ctx.scalar_map("g"), ctx.control("psi", 2),
                                              ctx.window, stabilize_options(ctx));
    stash_stabilize(ctx, rep, out);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
}

inline void run_exponential_algebra(Context& ctx, RunResult& out) {
    auto rep = expstab::stabilize_exponential_algebra(ctx.dom(), ctx.spec, ctx.map("f"),
                                                      ctx.map("g"), ctx.control("psi", 2),
                                                      ctx.window, stabilize_options(ctx));
    stash_stabilize(ctx, rep, out);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
}

inline void run_exponential_pexider(Context& ctx, RunResult& out) {
    auto rep = expstab::stabilize_pexider_exponential(
        ctx.dom(), ctx.spec, ctx.map("f"), ctx.map("g"), ctx.map("h"), ctx.control("psi", 2),
        ctx.element(ctx.config.at("x0")), ctx.window, stabilize_options(ctx));
    out.verdict = rep.verdict;
    out.detail = rep.detail;
    if (rep.verdict == "hur-stable-certified") {
        stash_stabilize(ctx, rep.from_f, out, "from-f");
        stash_stabilize(ctx, rep.from_h, out, "from-h");
        out.payload["limits-gap"] = report::number(rep.limits_gap);
        out.payload["g-unbounded"] = rep.g_unbounded;
        if (rep.g_unbounded) {
            out.payload["f-minus-h-sup"] = report::number(rep.f_minus_h_sup);
            if (rep.homogeneity_sup)
                out.payload["homogeneity-sup"] = report::number(*rep.homogeneity_sup);
        }
    }
}

inline void run_exponential_dichotomy(Context& ctx, RunResult& out) {
    auto rep = expstab::dichotomy_check(ctx.dom(), ctx.spec, ctx.map("f"),
                                        ctx.config.at("epsilon").get<double>(), ctx.window,
                                        ctx.tolerances.tol);
    out.verdict = rep.verdict;
    out.payload["dichotomy"] = {{"bound", report::number(rep.bound)},
                                {"bound-formula", rep.bound_formula},
                                {"sup-norm", report::number(rep.sup_norm)},
                                {"defect-sup", report::number(rep.defect_sup)},
                                {"witness", rep.witness}};
    if (ctx.config.contains("power-control")) {
        const Json& pc = ctx.config.at("power-control");
        const double theta = pc.at("theta").get<double>();
        const double p = pc.at("p").get<double>();
        Json profile = Json::array();
        for (const Element& y : ctx.window.elements) {
            const double mag = ctx.dom().magnitude(y);
            if (mag < 1.0) continue;
            profile.push_back({{"element", y.str()},
                               {"bound", report::number(expstab::gavruta_bound(theta, p, mag))}});
        }
        out.payload["power-control-bound"] = std::move(profile);
    }
}

inline void run_exponential_oracle(Context& ctx, RunResult& out) {
    const Json& oj = ctx.config.at("oracle");
    const std::int64_t m = oj.at("modulus").get<std::int64_t>();
    const std::int64_t range = oj.at("grid-range").get<std::int64_t>();
    std::vector<algebra::Complex> grid;
    for (std::int64_t a = -range; a <= range; ++a)
        for (std::int64_t b = -range; b <= range; ++b)
            grid.emplace_back(static_cast<double>(a), static_cast<double>(b));
    auto rep = expstab::dichotomy_oracle(m, grid, ctx.config.at("epsilon").get<double>(),
                                         ctx.tolerances.tol);
    out.verdict = rep.violations == 0 ? "oracle-zero-violations" : "oracle-violations-found";
    Json j;
    j["functions-checked"] = rep.functions_checked;
    j["compliant"] = rep.compliant;
    j["violations"] = rep.violations;
    j["bound"] = report::number(rep.bound);
    if (m == 1) j["analytic-cross-check-ok"] = rep.analytic_cross_check_ok;
    if (!rep.violation_witnesses.empty()) j["witnesses"] = rep.violation_witnesses;
    out.payload["oracle"] = std::move(j);
}

inline void run_gallery_baker(Context& ctx, RunResult& out) {
    const double delta = ctx.config.at("delta").get<double>();
    const double expected_defect = std::abs(delta - delta * delta);
    algebra::Spec plane(2, algebra::NormRule::max);
    const Domain& d = ctx.dom();
    MapFn f = [&d, delta](const Element& y) {
        return algebra::Value({algebra::Complex(std::exp(d.value(y)), 0.0),
                               algebra::Complex(delta, 0.0)})
            .check();
    };

    // Constant defect over the sampled pairs.
    double lo = expected_defect, hi = 0.0;
    std::size_t pairs = 0;
    ctx.window.for_each_pair([&](const Element& x, const Element& y) {
        const double v = algebra::norm(plane, f(d.op(x, y)) - f(x) * f(y));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++pairs;
    });

    // sup ||f|| grows monotonically over nested windows.
    Json sups = Json::array();
    bool monotone = true;
    double prev = 0.0;
    for (const Json& wj : ctx.config.at("nested-windows")) {
        Window nested = enumerate_window(d, wj.at(0).get<std::int64_t>(),
                                         wj.at(1).get<std::int64_t>());
        double sup = 0.0;
        for (const Element& y : nested.elements) sup = std::max(sup, algebra::norm(plane, f(y)));
        monotone = monotone && sup > prev;
        prev = sup;
        sups.push_back(report::number(sup));
    }

    auto stab = expstab::stabilize_exponential_algebra(
        d, plane, f, f, ControlFunction::constant(expected_defect), ctx.window,
        stabilize_options(ctx));

    out.payload["baker"] = {{"delta", delta},
                            {"expected-defect", report::number(expected_defect)},
                            {"defect-min", report::number(lo)},
                            {"defect-max", report::number(hi)},
                            {"pairs", pairs},
                            {"sup-norms", std::move(sups)},
                            {"sup-growth-monotone", monotone},
                            {"stabilizer-verdict", stab.verdict}};
    const bool defect_constant = std::abs(lo - expected_defect) <= 1e-12 &&
                                 std::abs(hi - expected_defect) <= 1e-12;
    out.verdict = stab.verdict;
    if (!defect_constant || !monotone) {
        out.verdict = "assert-failed";
        out.detail = "gallery expectations not reproduced";
    }
}

inline void run_additive_defect(Context& ctx, RunResult& out) {
    MapFn f = ctx.map("f");
    const auto& fns = ctx.config.at("functions");
    MapFn g = fns.contains("g") ? ctx.map("g") : f;
    MapFn h = fns.contains("h") ? ctx.map("h") : f;
    auto rep = addstab::compute_defect_additive(ctx.dom(), ctx.spec, f, g, h, ctx.window);
    out.payload["defect"] = {{"sup", report::number(rep.sup)},
                             {"witness", rep.arg_x.str() + "," + rep.arg_y.str()},
                             {"overflowed", rep.overflowed}};
    out.verdict = "defect-computed";
    if (ctx.config.contains("expect-defect")) {
        const Json& ej = ctx.config.at("expect-defect");
        if (std::abs(rep.sup - ej.at("value").get<double>()) > ej.value("within", 1e-12)) {
            out.verdict = "assert-failed";
            out.detail = "defect mismatch";
        }
    }
}

inline void run_additive_hyperstability(Context& ctx, RunResult& out) {
    auto psi = ctx.control("psi", 2);
    auto bases = ctx.base_tuples();
    if (ctx.config.at("functions").contains("f")) {
        auto cert = addstab::certify_hyperstable(ctx.dom(), ctx.spec, ctx.map("f"), psi, bases,
                                                 ctx.window, ctx.tolerances.n_max,
                                                 ctx.tolerances.tol);
        out.verdict = cert.verdict;
        out.detail = cert.detail;
        out.payload["conditions"] = conditions_json(cert.conditions, out);
        out.payload["defect-sup"] = report::number(cert.defect_sup);
    } else {
        auto rep = addstab::check_hyperstability_conditions(ctx.dom(), psi, bases,
                                                            ctx.tolerances.n_max,
                                                            ctx.tolerances.tol);
        out.verdict = rep.verdict;
        out.detail = rep.met() ? "" : rep.worst_label;
        out.payload["conditions"] = conditions_json(rep, out);
    }
}

inline void run_additive_superstability(Context& ctx, RunResult& out) {
    auto rep = addstab::check_additive_superstability(
        ctx.dom(), ctx.map("f"), ctx.control("phi", 2), ctx.control("psi", 1),
        ctx.element(ctx.config.at("p")), ctx.window, ctx.tolerances.tol,
        ctx.tolerances.max_steps);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
    Json j;
    j["series-converges"] = rep.series_converges;
    j["additive-defect-sup"] = report::number(rep.additive_defect_sup);
    Json sums = Json::array();
    for (double s : rep.phi_partial_sums) sums.push_back(report::number(s));
    j["phi-partial-sums"] = std::move(sums);
    out.payload["superstability"] = std::move(j);
    if (rep.trace && ctx.want_traces) {
        out.payload["trace"] = report::trace_to_json(*rep.trace);
        out.traces.emplace_back("exp-reduction", *rep.trace);
    }
}

inline void run_additive_logarithmic(Context& ctx, RunResult& out) {
    auto rep = addstab::check_logarithmic(ctx.dom(), ctx.map("f"), ctx.control("phi", 2),
                                          ctx.control("psi", 1),
                                          ctx.element(ctx.config.at("p")), ctx.window,
                                          ctx.tolerances.tol);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
    out.payload["additive-defect-sup"] = report::number(rep.additive_defect_sup);
}

inline void run_additive_asymptotic(Context& ctx, RunResult& out) {
    MapFn f = ctx.map("f");
    const auto& fns = ctx.config.at("functions");
    MapFn g = fns.contains("g") ? ctx.map("g") : f;
    MapFn h = fns.contains("h") ? ctx.map("h") : f;
    const std::string rho_name = ctx.config.value("rho-choice", "sum");
    addstab::RhoSpec rho;
    if (rho_name == "sum") rho = addstab::RhoSpec::sum();
    else if (rho_name == "of-product") rho = addstab::RhoSpec::of_product();
    else if (rho_name == "max") rho = addstab::RhoSpec::max();
    else if (rho_name == "custom") rho = addstab::RhoSpec::custom_fn(ctx.control("rho", 2));
    else throw config_error("unknown rho-choice: " + rho_name);
    std::vector<double> radii;
    for (const auto& r : ctx.config.at("radii")) radii.push_back(r.get<double>());
    auto rep = addstab::asymptotic_scan(ctx.dom(), ctx.spec, f, g, h, rho, ctx.window, radii,
                                        ctx.base_tuples(), ctx.tolerances.n_max,
                                        ctx.tolerances.tol);
    out.verdict = rep.verdict;
    Json profile = Json::array();
    for (const auto& e : rep.profile)
        profile.push_back({{"radius", report::number(e.radius)},
                           {"sup", report::number(e.sup)},
                           {"pairs", e.pair_count},
                           {"witness", e.witness_x.str() + "," + e.witness_y.str()}});
    out.payload["profile"] = std::move(profile);
    out.payload["full-window-defect"] = report::number(rep.full_window_defect);
    if (rep.conditions) out.payload["conditions"] = conditions_json(*rep.conditions, out);
    out.payload["exact-additivity-certified"] = rep.exact_additivity_certified;
    if (rep.verdict == "asymptotically-additive" && rep.exact_additivity_certified)
        out.verdict = "asymptotically-additive-certified";
}

inline void run_additive_pexider(Context& ctx, RunResult& out) {
    auto rep = addstab::stabilize_pexider_additive(
        ctx.dom(), ctx.spec, ctx.map("f"), ctx.map("g"), ctx.map("h"), ctx.control("psi", 2),
        ctx.base_tuples(), ctx.window, ctx.tolerances.n_max, ctx.tolerances.tol);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
    out.payload["tilde-conditions"] = conditions_json(rep.tilde_conditions, out);
    out.payload["combined-conditions"] = conditions_json(rep.combined_conditions, out);
    out.payload["defects"] = {{"f", report::number(rep.f_defect)},
                              {"g", report::number(rep.g_defect)},
                              {"h", report::number(rep.h_defect)},
                              {"pexider", report::number(rep.pexider_defect)}};
}

inline void run_additive_jensen(Context& ctx, RunResult& out) {
    MapFn J = ctx.map("f");
    auto triple = addstab::jensen_reduction(ctx.dom(), J, ctx.window);
    // The identity is algebraic: both sides are the same computation at the
    // representable pairs, so the gap must be exactly zero.
    double worst = 0.0;
    std::size_t checked = 0;
    const Domain& d = ctx.dom();
    for (const Element& x : ctx.window.elements)
        for (const Element& y : ctx.window.elements) {
            bool representable = true;
            for (std::size_t i = 0; i < x.coords.size(); ++i)
                representable = representable && (x.coords[i] + y.coords[i]) % 2 == 0;
            if (!representable) continue;
            const Element s = d.op(x, y);
            Element half = s;
            for (auto& c : half.coords) c /= 2;
            algebra::Value direct = J(half);
            for (auto& c : direct.comp) c *= 2.0;
            direct = direct - J(x) - J(y);
            const algebra::Value via = triple.f(s) - triple.g(x) - triple.h(y);
            worst = std::max(worst, algebra::norm(ctx.spec, direct - via));
            ++checked;
        }
    out.payload["jensen"] = {{"pairs-checked", checked}, {"identity-gap", report::number(worst)}};
    out.verdict = worst == 0.0 ? "jensen-identity-exact" : "assert-failed";
}

inline void run_linear_forward(Context& ctx, RunResult& out) {
    auto spec = parse_linear(ctx);
    auto rep = linstab::solve_linear_forward(ctx.dom(), ctx.spec, spec, ctx.map("f"),
                                             ctx.control("psi", 1), ctx.window,
                                             solve_options(ctx));
    stash_solve(ctx, rep, out);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
}

inline void run_linear_backward(Context& ctx, RunResult& out) {
    auto spec = parse_linear(ctx);
    auto rep = linstab::solve_linear_backward(ctx.dom(), ctx.spec, spec, ctx.map("f"),
                                              ctx.control("psi", 1), ctx.window,
                                              solve_options(ctx));
    stash_solve(ctx, rep, out);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
}

inline void run_linear_pexider(Context& ctx, RunResult& out) {
    auto spec = parse_linear(ctx);
    auto rep = linstab::solve_pexider_linear(ctx.dom(), ctx.spec, spec, ctx.map("f"),
                                             ctx.map("g"), ctx.control("psi", 1), ctx.window,
                                             solve_options(ctx));
    out.verdict = rep.verdict;
    out.detail = rep.detail;
    out.payload["lipschitz"] = report::number(rep.lipschitz);
    if (rep.certified()) {
        stash_solve(ctx, rep.forward, out, "from-f");
        Json gb = Json::array();
        for (double b : rep.g_bound_profile) gb.push_back(report::number(b));
        out.payload["g-bound-profile"] = std::move(gb);
        out.payload["g-observed-sup"] = report::number(rep.g_observed_sup);
    }
}

inline void run_linear_common(Context& ctx, RunResult& out) {
    linstab::FamilySpec family;
    for (const Json& mj : ctx.config.at("family")) {
        linstab::FamilyMember m;
        m.label = mj.at("label").get<std::string>();
        m.rho = ctx.self_map(mj.at("rho"));
        {
            expr::Ast p_ast = expr::parse(mj.at("p").get<std::string>());
            const Domain& d = ctx.dom();
            m.p = [&d, p_ast](const Element& x) {
                expr::Env env;
                env.vars["x"] = algebra::Complex(d.value(x), 0.0);
                return expr::eval(p_ast, env);
            };
        }
        {
            std::map<std::string, double> params;
            if (mj.at("psi").contains("params"))
                for (const auto& [k, v] : mj.at("psi").at("params").items())
                    params[k] = v.get<double>();
            m.psi = ControlFunction::parse(ctx.dom(), 1,
                                           mj.at("psi").at("expr").get<std::string>(), params);
        }
        m.lipschitz = mj.at("L").get<double>();
        family.members.push_back(std::move(m));
    }
    auto rep = linstab::solve_common_stability(ctx.dom(), ctx.spec, family, ctx.map("f"),
                                               ctx.window, solve_options(ctx),
                                               ctx.tolerances.n_max);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
    Json conds = Json::array();
    for (const auto& c : rep.conditions)
        conds.push_back({{"condition", c.condition}, {"passed", c.passed}, {"witness", c.witness}});
    out.payload["conditions"] = std::move(conds);
    if (rep.certified()) {
        out.payload["pairwise-gap"] = report::number(rep.pairwise_gap);
        out.payload["residual-sup"] = report::number(rep.residual_sup);
        out.payload["profile"] = profile_json(ctx.window, rep.bound_profile, rep.observed_error);
        out.profile_elements.clear();
        for (const auto& e : ctx.window.elements) out.profile_elements.push_back(e.str());
        out.profile_bound = rep.bound_profile;
        out.profile_observed = rep.observed_error;
    }
    Json solves = Json::array();
    for (std::size_t i = 0; i < rep.per_index.size(); ++i) {
        const auto& s = rep.per_index[i];
        Json sj;
        sj["label"] = family.members[i].label;
        sj["verdict"] = s.verdict;
        sj["lipschitz"] = report::number(s.lipschitz);
        if (s.uniqueness_delta) sj["uniqueness-delta"] = report::number(*s.uniqueness_delta);
        if (ctx.want_traces) {
            sj["trace"] = report::trace_to_json(s.trace);
            out.traces.emplace_back("index-" + family.members[i].label, s.trace);
        }
        solves.push_back(std::move(sj));
    }
    out.payload["per-index"] = std::move(solves);
}

inline void run_linear_via_common(Context& ctx, RunResult& out) {
    auto rep = linstab::exponential_via_common(
        ctx.dom(), ctx.spec, ctx.map("f"), ctx.scalar_map("g"), ctx.control("phi", 2), ctx.window,
        solve_options(ctx), ctx.tolerances.unbounded_threshold);
    out.verdict = rep.verdict;
    out.detail = rep.detail;
    Json jset = Json::array();
    for (const auto& i : rep.j_set) jset.push_back(i.str());
    out.payload["j-set"] = std::move(jset);
    out.payload["g-unbounded"] = rep.g_unbounded;
    out.payload["conclusion-defect"] = report::number(rep.conclusion_defect);
    if (rep.common.certified()) {
        out.payload["pairwise-gap"] = report::number(rep.common.pairwise_gap);
        out.payload["residual-sup"] = report::number(rep.common.residual_sup);
        if (ctx.want_traces)
            for (std::size_t i = 0; i < rep.common.per_index.size(); ++i)
                out.traces.emplace_back("index-" + rep.common.per_index[i].verdict +
                                            std::to_string(i),
                                        rep.common.per_index[i].trace);
    }
}

inline void run_gallery_gajda(Context& ctx, RunResult& out) {
    // f(2x) = 2 f(x) with psi = theta |x|: the forward finder must return
    // none, which is the no-certificate verdict of the scaling family.
    linstab::EquationSpec spec;
    spec.rho = ctx.self_map(Json("2*x"));
    spec.p = [](const Element&) { return algebra::Complex(2.0, 0.0); };
    spec.q = linstab::zero_map(1);
    const double theta = ctx.config.value("theta", 1.0);
    auto psi = ControlFunction::parse(ctx.dom(), 1, "theta*abs(x)", {{"theta", theta}});
    auto L = linstab::find_lipschitz_forward(ctx.dom(), spec, psi, ctx.window);
    out.payload["lipschitz-found"] = L.has_value();
    if (L) out.payload["lipschitz"] = report::number(*L);
    out.verdict = L ? "certificate-exists" : "no-certificate";
}

} // namespace detail

inline RunResult run(const Json& config, std::optional<std::uint64_t> seed_override = {}) {
    RunResult out;
    Context ctx = make_context(config, seed_override);

    out.payload["artifact-version"] = kArtifactVersion;
    out.payload["scenario"] = config;

    using Runner = void (*)(Context&, RunResult&);
    static const std::map<std::string, Runner> runners = {
        {"exponential.defect", &detail::run_exponential_defect},
        {"exponential.stabilize", &detail::run_exponential_stabilize},
        {"exponential.algebra", &detail::run_exponential_algebra},
        {"exponential.pexider", &detail::run_exponential_pexider},
        {"exponential.dichotomy", &detail::run_exponential_dichotomy},
        {"exponential.oracle", &detail::run_exponential_oracle},
        {"gallery.baker-example", &detail::run_gallery_baker},
        {"additive.defect", &detail::run_additive_defect},
        {"additive.hyperstability", &detail::run_additive_hyperstability},
        {"additive.superstability", &detail::run_additive_superstability},
        {"additive.logarithmic", &detail::run_additive_logarithmic},
        {"additive.asymptotic", &detail::run_additive_asymptotic},
        {"additive.pexider", &detail::run_additive_pexider},
        {"additive.jensen", &detail::run_additive_jensen},
        {"linear.forward", &detail::run_linear_forward},
        {"linear.backward", &detail::run_linear_backward},
        {"linear.pexider", &detail::run_linear_pexider},
        {"linear.common", &detail::run_linear_common},
        {"linear.exponential-via-common", &detail::run_linear_via_common},
        {"gallery.gajda-no-certificate", &detail::run_gallery_gajda},
    };
    auto it = runners.find(ctx.kind);
    if (it == runners.end()) throw config_error("unknown scenario kind: " + ctx.kind);
    it->second(ctx, out);

    out.payload["verdict"] = out.verdict;
    if (!out.detail.empty()) out.payload["detail"] = out.detail;
    out.exit_code = (!ctx.expect.empty() && out.verdict != ctx.expect) ? 1 : 0;
    out.payload["expect"] = ctx.expect;
    out.payload["expect-matched"] = out.exit_code == 0;
    return out;
}

/// Writes report.json (deterministic payload) plus meta.json and optional
/// CSV tables into the output directory.
inline void write_report(const RunResult& result, const std::string& out_dir,
                         const std::string& format, double duration_ms) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
        out << result.payload.dump(2) << '\n';
    }
    {
        Json meta;
        meta["duration-ms"] = duration_ms;
        std::ofstream out(fs::path(out_dir) / "meta.json", std::ios::binary);
        out << meta.dump(2) << '\n';
    }
    if (format == "csv") {
        for (std::size_t i = 0; i < result.traces.size(); ++i)
            report::write_trace_csv(result.traces[i].second,
                                    (fs::path(out_dir) /
                                     ("trace-" + std::to_string(i) + ".csv"))
                                        .string());
        if (!result.profile_elements.empty())
            report::write_profile_csv(result.profile_elements, result.profile_bound,
                                      result.profile_observed,
                                      (fs::path(out_dir) / "bound_profile.csv").string());
        if (!result.sequences.empty())
            report::write_sequence_csv(result.sequences,
                                       (fs::path(out_dir) / "conditions.csv").string());
    }
}

} // namespace ulamlab::scenario
