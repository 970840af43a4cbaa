// Randomized sweeps over instance space. The stabilizers carry their own
// internal certificates (bound domination, equation residuals, pairwise
// agreement), so simply driving them across varied parameters turns any
// latent numerics bug into a thrown engine_inconsistency.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ulamlab/additive.hpp"
#include "ulamlab/exponential.hpp"
#include "ulamlab/linear.hpp"

using namespace ulamlab;
using algebra::Complex;
using algebra::Value;
using model::ControlFunction;
using model::MapFn;
using semigroup::Domain;
using semigroup::Element;
using semigroup::Window;

namespace {
const algebra::Spec kScalar(1, algebra::NormRule::modulus);
}

TEST_CASE("randomized exponential recovery instances") {
    Domain nat = Domain::naturals_add(4096);
    SplitMix64 rng(0xFEED);
    for (int trial = 0; trial < 12; ++trial) {
        const double base = 2.0 + static_cast<double>(rng.next() % 2); // 2 or 3
        // Base 2 is exact in floating point at any depth; base 3 accumulates
        // one ulp per division along the orbit, so its window stays where
        // that drift is far below the absolute 2*tol agreement budget.
        const std::int64_t hi = base == 2.0
                                    ? 8 + static_cast<std::int64_t>(rng.next() % 9)  // 8..16
                                    : 6 + static_cast<std::int64_t>(rng.next() % 4); // 6..9
        const std::uint64_t seed = rng.next();
        Window w = enumerate_window(nat, 0, hi);

        auto g = [&nat, base](const Element& y) {
            return Complex(std::pow(base, nat.value(y)), 0.0);
        };
        MapFn f = [&nat, base, seed](const Element& y) {
            Value v(Complex(std::pow(base, nat.value(y)), 0.0));
            v.comp[0] += model::perturbation_noise(seed, y, std::pow(base, -nat.value(y)));
            return v.check();
        };
        auto psi = ControlFunction::from_fn(2, [&nat, base](const Element& x, const Element* y) {
            return 2.0 * std::pow(base, nat.value(x)) * std::pow(base, -nat.value(*y));
        });

        expstab::StabilizeOptions opts;
        opts.tol = 1e-9;
        auto rep = expstab::stabilize_exponential(nat, kScalar, f, g, psi, w, opts);
        REQUIRE(rep.certified());
        CHECK(rep.pairwise_gap <= 2e-9);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double yv = nat.value(w.elements[k]);
            CHECK(std::abs(rep.T(w.elements[k]).comp[0] - std::pow(base, yv)) <= 1e-6);
        }
    }
}

TEST_CASE("randomized inhomogeneous linear recurrences") {
    Domain nat = Domain::naturals_add(512);
    SplitMix64 rng(0xBEEF);
    for (int trial = 0; trial < 12; ++trial) {
        const double p = 2.0 + static_cast<double>(rng.next() % 3); // 2..4
        const double q = -2.0 + 0.5 * static_cast<double>(rng.next() % 9);
        const double delta = 1e-4 * (1.0 + static_cast<double>(rng.next() % 10));
        const std::uint64_t seed = rng.next();
        Window w = enumerate_window(nat, 0, 10);

        // Exact solution T0(x) = p^x + q/(1-p) of T(x+1) = p T(x) + q. The
        // noise envelope scales with the multiplier so the defect
        // |eta(x+1) - p eta(x)| stays inside psi.
        const double offset = q / (1.0 - p);
        MapFn f = [&nat, p, offset, seed, delta](const Element& x) {
            Value v(Complex(std::pow(p, nat.value(x)) + offset, 0.0));
            v.comp[0] += model::perturbation_noise(
                seed, x, delta / (2.0 * (p + 1.0)) * std::pow(2.0, -nat.value(x)));
            return v.check();
        };
        linstab::EquationSpec spec;
        spec.rho = [&nat](const Element& x) { return nat.op(x, Element(1)); };
        spec.p = [p](const Element&) { return Complex(p, 0.0); };
        spec.q = [q](const Element&) { return Value(Complex(q, 0.0)); };
        auto psi = ControlFunction::from_fn(1, [delta](const Element&, const Element*) {
            return delta;
        });

        linstab::SolveOptions opts;
        opts.tol = 1e-9;
        auto rep = linstab::solve_linear_forward(nat, kScalar, spec, f, psi, w, opts);
        REQUIRE(rep.certified());
        CHECK(rep.residual_sup <= 1e-9);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double xv = nat.value(w.elements[k]);
            const double expected = std::pow(p, xv) + offset;
            CHECK(std::abs(rep.T(w.elements[k]).comp[0] - expected) <=
                  delta / ((1.0 - rep.lipschitz) * p) + 1e-6);
        }
    }
}

TEST_CASE("randomized dichotomy instances stay on the certified branches") {
    Domain nat = Domain::naturals_add(128);
    Window w = enumerate_window(nat, 0, 5);
    SplitMix64 rng(0xCAFE);
    for (int trial = 0; trial < 24; ++trial) {
        const bool bounded = (rng.next() & 1) != 0;
        if (bounded) {
            // f constant with |c - c^2| <= eps and |c| below the threshold.
            const double c = rng.next_in(-0.6, 1.2);
            const double eps = std::abs(c - c * c) + rng.next_in(0.01, 0.5);
            MapFn f = [c](const Element&) { return Value(Complex(c, 0.0)); };
            auto v = expstab::dichotomy_check(nat, kScalar, f, eps, w, 1e-9);
            CHECK(v.verdict == "superstable-bounded");
        } else {
            const double base = 2.0 + static_cast<double>(rng.next() % 3);
            MapFn f = [&nat, base](const Element& y) {
                return Value(Complex(std::pow(base, nat.value(y)), 0.0));
            };
            auto v = expstab::dichotomy_check(nat, kScalar, f, 1.0, w, 1e-9);
            CHECK(v.verdict == "superstable-exponential");
        }
    }
}

TEST_CASE("randomized hyperstability monotonicity in the control") {
    // If psi2 passes the limit conditions and psi1 <= psi2 pointwise on the
    // evaluated arguments, psi1 passes too.
    Domain nat = Domain::naturals_add(8192);
    std::vector<addstab::BaseTuple> bases = {
        addstab::BaseTuple{Element(1), Element(1), Element(2), Element(2)}};
    SplitMix64 rng(0xD00D);
    for (int trial = 0; trial < 8; ++trial) {
        const double a = rng.next_in(0.2, 3.0);
        const double p = -2.0 + rng.next_in(-1.0, 0.0); // in [-3, -2]
        auto psi2 = ControlFunction::from_fn(2, [a, p, &nat](const Element& x, const Element* y) {
            return a * std::pow(nat.magnitude(x), p) * nat.magnitude(*y);
        });
        auto psi1 = ControlFunction::from_fn(2, [a, p, &nat, &psi2](const Element& x,
                                                                    const Element* y) {
            return 0.5 * psi2(x, *y);
        });
        auto rep2 = addstab::check_hyperstability_conditions(nat, psi2, bases, 512, 1e-4);
        REQUIRE(rep2.met());
        auto rep1 = addstab::check_hyperstability_conditions(nat, psi1, bases, 512, 1e-4);
        CHECK(rep1.met());
    }
}
