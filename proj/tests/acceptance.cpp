// Acceptance suite: one test case per criterion, each pinned to the stated
// tolerance. A listener prints one PASS/FAIL line per criterion.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <vector>

#include "ulamlab/scenario.hpp"

using namespace ulamlab;
using algebra::Complex;
using algebra::Value;
using model::ControlFunction;
using model::MapFn;
using semigroup::Domain;
using semigroup::Element;
using semigroup::Window;
using ulamlab::scenario::Json;

namespace {

class CriterionReporter : public Catch::EventListenerBase {
public:
    using EventListenerBase::EventListenerBase;
    void testCaseEnded(const Catch::TestCaseStats& stats) override {
        std::cout << (stats.totals.assertions.allPassed() ? "PASS " : "FAIL ")
                  << stats.testInfo->name << std::endl;
    }
};

const algebra::Spec kScalar(1, algebra::NormRule::modulus);
const algebra::Spec kPlane(2, algebra::NormRule::max);

std::vector<std::filesystem::path> scenario_files() {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(ULAMLAB_SCENARIO_DIR))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

double factorial_of(std::int64_t x) {
    double acc = 1.0;
    for (std::int64_t k = 2; k < x; ++k) acc *= static_cast<double>(k);
    return acc;
}

} // namespace

CATCH_REGISTER_LISTENER(CriterionReporter)

TEST_CASE("criterion 01: exhaustive dichotomy oracle on Z_2") {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Complex> grid;
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) grid.emplace_back(a, b);
    REQUIRE(grid.size() == 25);

    auto rep = expstab::dichotomy_oracle(2, grid, 1.0, 1e-9);
    CHECK(rep.functions_checked == 625);
    CHECK(rep.violations == 0);
    CHECK(rep.bound == Catch::Approx((1.0 + std::sqrt(5.0)) / 2.0));

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 10.0);
}

TEST_CASE("criterion 02: baker counterexample in C^2") {
    Domain grid = Domain::reals_add_grid(Rational::parse("0.25"), -64, 64);
    const double delta = 0.3;
    const double expected = std::abs(delta - delta * delta);
    MapFn f = [&grid, delta](const Element& y) {
        return Value({Complex(std::exp(grid.value(y)), 0.0), Complex(delta, 0.0)}).check();
    };

    // Constant defect on 1e4 seeded pairs.
    Window w = enumerate_window(grid, -16, 16, semigroup::PairPolicy::seeded(7, 10000));
    double lo = expected, hi = 0.0;
    std::size_t count = 0;
    w.for_each_pair([&](const Element& x, const Element& y) {
        const double d = algebra::norm(kPlane, f(grid.op(x, y)) - f(x) * f(y));
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        ++count;
    });
    CHECK(count == 10000);
    CHECK(std::abs(lo - expected) <= 1e-12);
    CHECK(std::abs(hi - expected) <= 1e-12);

    // sup ||f|| grows monotonically over windows of growing real part.
    double prev = 0.0;
    for (std::int64_t half : {16, 32, 48, 64}) {
        Window nested = enumerate_window(grid, -half, half);
        double sup = 0.0;
        for (const Element& y : nested.elements) sup = std::max(sup, algebra::norm(kPlane, f(y)));
        CHECK(sup > prev);
        prev = sup;
    }

    // The algebra stabilizer refuses: M_f is empty, so g-hat is identically 1.
    auto stab = expstab::stabilize_exponential_algebra(grid, kPlane, f, f,
                                                       ControlFunction::constant(expected),
                                                       enumerate_window(grid, -16, 16), {});
    CHECK(stab.verdict == "hypotheses-not-met");
    CHECK(stab.n_set.empty());
}

TEST_CASE("criterion 03: exponential stabilizer recovery over 5 seeds") {
    const auto start = std::chrono::steady_clock::now();
    Domain nat = Domain::naturals_add(4096);
    Window w = enumerate_window(nat, 0, 16);
    auto g = [&nat](const Element& y) { return Complex(std::pow(2.0, nat.value(y)), 0.0); };
    auto psi = ControlFunction::parse(nat, 2, "2*2^x*2^(-y)");
    expstab::StabilizeOptions opts;
    opts.tol = 1e-9;

    for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
        MapFn f = [&nat, seed](const Element& y) {
            Value v(Complex(std::pow(2.0, nat.value(y)), 0.0));
            v.comp[0] += model::perturbation_noise(seed, y, std::pow(2.0, -nat.value(y)));
            return v.check();
        };
        auto rep = expstab::stabilize_exponential(nat, kScalar, f, g, psi, w, opts);
        REQUIRE(rep.certified());
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double yv = nat.value(w.elements[k]);
            CHECK(std::abs(rep.T(w.elements[k]).comp[0] - std::pow(2.0, yv)) <= 1e-6);
            CHECK(rep.observed_error[k] <= std::pow(2.0, 1.0 - yv) + 1e-6);
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 5.0);
}

TEST_CASE("criterion 04: gamma recurrence against exact factorials over 5 seeds") {
    Domain nat = Domain::naturals_add(48);
    Window w = enumerate_window(nat, 1, 12);
    const double delta = 1e-3;
    linstab::EquationSpec spec;
    spec.rho = [&nat](const Element& x) { return nat.op(x, Element(1)); };
    spec.p = [&nat](const Element& x) { return Complex(nat.value(x), 0.0); };
    spec.q = linstab::zero_map(1);
    auto psi = ControlFunction::from_fn(1, [delta](const Element&, const Element*) {
        return delta;
    });

    for (std::uint64_t seed : {101u, 202u, 303u, 404u, 505u}) {
        MapFn f = [&nat, seed, delta](const Element& x) {
            Value v(Complex(factorial_of(x.coords[0]), 0.0));
            v.comp[0] += model::perturbation_noise(seed, x, delta / (2.0 * nat.value(x)));
            return v.check();
        };
        auto rep = linstab::solve_linear_forward(nat, kScalar, spec, f, psi, w, {});
        REQUIRE(rep.certified());
        CHECK(rep.lipschitz == Catch::Approx(0.5));
        for (std::size_t k = 0; k < w.size(); ++k) {
            const Element& x = w.elements[k];
            const double xv = nat.value(x);
            CHECK(std::abs(rep.T(x).comp[0] - factorial_of(x.coords[0])) <=
                  2e-3 / xv + 1e-9);
            CHECK(rep.bound_profile[k] == Catch::Approx(2e-3 / xv));
            CHECK(rep.observed_error[k] <= rep.bound_profile[k]);
        }
    }
}

TEST_CASE("criterion 05: hyperstability condition table") {
    Domain nat = Domain::naturals_add(4096);
    std::vector<addstab::BaseTuple> bases = {
        addstab::BaseTuple{Element(1), Element(1), Element(1), Element(1)}};
    const int n_max = 512;
    const double tol = 1e-4;

    auto verdict_of = [&](const std::string& expr) {
        auto psi = ControlFunction::parse(nat, 2, expr);
        return addstab::check_hyperstability_conditions(nat, psi, bases, n_max, tol);
    };

    auto zero = addstab::check_hyperstability_conditions(nat, ControlFunction::constant(0.0),
                                                         bases, n_max, tol);
    CHECK(zero.met());

    auto constant = verdict_of("0.1");
    CHECK_FALSE(constant.met());
    CHECK(constant.worst_limit == Catch::Approx(0.1).margin(1e-6));

    auto product_a = verdict_of("abs(x)^(-2)*abs(y)");
    CHECK(product_a.met());

    auto product_b = verdict_of("abs(x)^(-1)*abs(y)^(-1)");
    CHECK(product_b.met());

    auto sum_control = verdict_of("0.1*(abs(x)^(-1)+abs(y))");
    CHECK_FALSE(sum_control.met());
    CHECK(sum_control.worst_limit == Catch::Approx(0.1).margin(1e-3)); // 0.1 * |x0|, x0 = 1

    // The two met product controls certify exact additivity of a zero-defect
    // instance.
    Window w = enumerate_window(nat, 1, 16);
    MapFn f = [&nat](const Element& y) { return Value(Complex(3.0 * nat.value(y), 0.0)); };
    for (const char* expr : {"abs(x)^(-2)*abs(y)", "abs(x)^(-1)*abs(y)^(-1)"}) {
        auto psi = ControlFunction::parse(nat, 2, expr);
        auto cert = addstab::certify_hyperstable(nat, kScalar, f, psi, bases, w, n_max, tol);
        CHECK(cert.verdict == "hyperstable-certified");
    }
}

TEST_CASE("criterion 06: common stability of the three-shift family") {
    Domain nat = Domain::naturals_add(1024);
    Window w = enumerate_window(nat, 0, 24);
    MapFn f = [&nat](const Element& x) {
        Value v(Complex(std::pow(2.0, nat.value(x)), 0.0));
        v.comp[0] += model::perturbation_noise(2718, x, std::pow(2.0, -nat.value(x)));
        return v.check();
    };

    linstab::FamilySpec family;
    for (int i = 1; i <= 3; ++i) {
        linstab::FamilyMember m;
        m.label = std::to_string(i);
        m.rho = [&nat, i](const Element& x) { return nat.op(x, Element(i)); };
        const Complex ci(std::pow(2.0, i), 0.0);
        m.p = [ci](const Element&) { return ci; };
        const double scale = std::pow(2.0, i + 1);
        m.psi = ControlFunction::from_fn(1, [scale, &nat](const Element& x, const Element*) {
            return scale * std::pow(2.0, -nat.value(x));
        });
        m.lipschitz = std::pow(2.0, -2 * i);
        family.members.push_back(std::move(m));
    }

    linstab::SolveOptions opts;
    opts.tol = 1e-9;
    auto rep = linstab::solve_common_stability(nat, kScalar, family, f, w, opts);
    REQUIRE(rep.certified());
    REQUIRE(rep.conditions.size() == 4);
    for (const auto& c : rep.conditions) CHECK(c.passed);
    CHECK(rep.pairwise_gap <= 1e-8);
    CHECK(rep.residual_sup <= 1e-9);
    for (std::size_t k = 0; k < w.size(); ++k)
        CHECK(rep.observed_error[k] <= rep.bound_profile[k]);
}

TEST_CASE("criterion 07: no-certificate outcomes for the scaling counterexamples") {
    Domain grid = Domain::reals_add_grid(Rational::parse("0.25"), -512, 512);
    Window w = enumerate_window(grid, -64, 64);
    auto psi = ControlFunction::parse(grid, 1, "theta*abs(x)", {{"theta", 0.7}});

    {
        linstab::EquationSpec spec;
        spec.rho = [](const Element& x) { return Element(x.coords[0] * 2); };
        spec.p = [](const Element&) { return Complex(2.0, 0.0); };
        spec.q = linstab::zero_map(1);
        CHECK_FALSE(linstab::find_lipschitz_forward(grid, spec, psi, w).has_value());
    }
    {
        linstab::EquationSpec spec;
        spec.rho_inverse = [](const Element& x) { return Element(x.coords[0] * 2); };
        spec.p = [](const Element&) { return Complex(0.5, 0.0); };
        spec.q = linstab::zero_map(1);
        CHECK_FALSE(linstab::find_lipschitz_backward(grid, spec, psi, w).has_value());
    }

    // Both bundled scenarios exit 0 under expect = no-certificate, through
    // the real CLI. ctest exports ULAMLAB_CLI; fall back to the usual build
    // locations for direct invocations from the repository root.
    std::string cli;
    if (const char* env = std::getenv("ULAMLAB_CLI")) {
        cli = env;
    } else {
        for (const char* candidate : {"build/ulamlab", "./ulamlab", "../ulamlab"})
            if (std::filesystem::exists(candidate)) {
                cli = candidate;
                break;
            }
    }
    REQUIRE_FALSE(cli.empty());
    for (const char* name : {"linear_forward_nocert.json", "linear_backward_nocert.json"}) {
        const std::string cmd = cli + " run " +
                                (std::filesystem::path(ULAMLAB_SCENARIO_DIR) / name).string() +
                                " --out " +
                                (std::filesystem::temp_directory_path() / "ulamlab-acc7").string() +
                                " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        CHECK(status == 0);
    }
}

TEST_CASE("criterion 08: engine properties across the bundled scenario library") {
    std::size_t traces_checked = 0, profiles_checked = 0, probes_checked = 0;
    for (const auto& path : scenario_files()) {
        Json config = ulamlab::scenario::load_config(path.string());
        auto result = ulamlab::scenario::run(config);
        const double tol =
            config.contains("tolerances") ? config["tolerances"].value("tol", 1e-9) : 1e-9;

        // Recorded contraction ratios never exceed the declared constant.
        std::function<void(const Json&)> walk = [&](const Json& node) {
            if (node.is_object()) {
                if (node.contains("steps") && node.contains("declared-lipschitz") &&
                    node["declared-lipschitz"].is_number()) {
                    const double L = node["declared-lipschitz"].get<double>();
                    for (const auto& step : node["steps"])
                        if (step.at(2).is_number()) {
                            INFO(path.filename().string());
                            CHECK(step.at(2).get<double>() <= L + 1e-9);
                        }
                    ++traces_checked;
                }
                if (node.contains("bound") && node.contains("observed") &&
                    node["bound"].is_number() && node["observed"].is_number()) {
                    INFO(path.filename().string());
                    CHECK(node["observed"].get<double>() <= node["bound"].get<double>() + tol);
                    ++profiles_checked;
                }
                if (node.contains("uniqueness-delta") && node["uniqueness-delta"].is_number()) {
                    INFO(path.filename().string());
                    CHECK(node["uniqueness-delta"].get<double>() <= 2.0 * tol);
                    ++probes_checked;
                }
                for (const auto& [key, child] : node.items()) walk(child);
            } else if (node.is_array()) {
                for (const auto& child : node) walk(child);
            }
        };
        walk(result.payload);
    }
    CHECK(traces_checked >= 8);
    CHECK(profiles_checked >= 50);
    CHECK(probes_checked >= 4);
}

TEST_CASE("criterion 09: skof fixed-ray scan") {
    Domain grid = Domain::reals_add_grid(Rational::parse("0.25"), -4096, 4096);
    Window w = enumerate_window(grid, -80, 80); // values -20..20, step 0.25
    const std::vector<double> radii = {5, 10, 20, 30, 39};
    std::vector<addstab::BaseTuple> bases = {
        addstab::BaseTuple{Element(4), Element(4), Element(4), Element(4)}};

    {
        MapFn f = [&grid](const Element& y) {
            const double x = grid.value(y);
            return Value(Complex(x + std::exp(-std::abs(x)), 0.0));
        };
        auto rep = addstab::asymptotic_scan(grid, kScalar, f, f, f, addstab::RhoSpec::sum(), w,
                                            radii, bases, 256, 1e-6);
        CHECK(rep.verdict == "not-asymptotically-additive");
        for (const auto& entry : rep.profile) CHECK(entry.sup >= 0.5);
    }
    {
        MapFn f = [&grid](const Element& y) { return Value(Complex(3.0 * grid.value(y), 0.0)); };
        auto rep = addstab::asymptotic_scan(grid, kScalar, f, f, f, addstab::RhoSpec::sum(), w,
                                            radii, bases, 256, 1e-6);
        CHECK(rep.verdict == "asymptotically-additive");
        for (const auto& entry : rep.profile) CHECK(entry.sup == 0.0);
        CHECK(rep.exact_additivity_certified);
    }
}

TEST_CASE("criterion 10: determinism and expected verdicts of the scenario library") {
    const auto files = scenario_files();
    REQUIRE(files.size() >= 20);
    for (const auto& path : files) {
        Json config = ulamlab::scenario::load_config(path.string());
        auto first = ulamlab::scenario::run(config);
        auto second = ulamlab::scenario::run(config);
        INFO(path.filename().string());
        CHECK(first.payload.dump(2) == second.payload.dump(2));
        CHECK(first.exit_code == 0); // every bundled scenario meets its expect
    }
}
