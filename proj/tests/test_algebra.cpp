#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ulamlab/algebra.hpp"
#include "ulamlab/rng.hpp"
#include "ulamlab/semigroup.hpp"

using namespace ulamlab;
using namespace ulamlab::algebra;
using semigroup::Domain;
using semigroup::Element;
using semigroup::Window;

namespace {

Value random_value(SplitMix64& rng, int dim, double scale = 10.0) {
    std::vector<Complex> comps;
    for (int i = 0; i < dim; ++i)
        comps.emplace_back(rng.next_in(-scale, scale), rng.next_in(-scale, scale));
    return Value(std::move(comps));
}

} // namespace

TEST_CASE("norm rules") {
    Spec d1(1, NormRule::modulus);
    CHECK(norm(d1, Value(Complex(3, 4))) == Catch::Approx(5.0));

    Spec d2max(2, NormRule::max);
    CHECK(norm(d2max, Value({Complex(2, 0), Complex(-3, 0)})) == Catch::Approx(3.0));
    CHECK(norm(d2max, Value({Complex(1, 1), Complex(0, 0)})) == Catch::Approx(std::sqrt(2.0)));

    Spec d2euc(2, NormRule::euclidean);
    CHECK(norm(d2euc, Value({Complex(3, 0), Complex(4, 0)})) == Catch::Approx(5.0));

    CHECK_THROWS_AS(Spec(2, NormRule::modulus), config_error);
}

TEST_CASE("norm axioms on seeded samples") {
    for (Spec spec : {Spec(1, NormRule::modulus), Spec(2, NormRule::max), Spec(3, NormRule::euclidean)}) {
        SplitMix64 rng(42 + spec.dimension);
        for (int trial = 0; trial < 1000; ++trial) {
            Value x = random_value(rng, spec.dimension);
            Value y = random_value(rng, spec.dimension);
            const Complex c(rng.next_in(-5, 5), rng.next_in(-5, 5));

            const double nx = norm(spec, x);
            CHECK(nx >= 0.0);
            CHECK(norm(spec, Value::zero(spec.dimension)) == 0.0);
            // homogeneity
            const double lhs = norm(spec, c * x);
            CHECK(lhs == Catch::Approx(std::abs(c) * nx).margin(1e-12 * (1 + std::abs(c) * nx)));
            // triangle
            CHECK(norm(spec, x + y) <= nx + norm(spec, y) + 1e-12 * (1 + nx + norm(spec, y)));
            // submultiplicative
            CHECK(norm(spec, x * y) <= nx * norm(spec, y) + 1e-12 * (1 + nx * norm(spec, y)));
        }
    }
}

TEST_CASE("modulus norm is multiplicative in dimension 1") {
    Spec spec(1, NormRule::modulus);
    CHECK(spec.multiplicative_norm());
    SplitMix64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        Value x = random_value(rng, 1);
        Value y = random_value(rng, 1);
        const double lhs = norm(spec, x * y);
        const double rhs = norm(spec, x) * norm(spec, y);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("max norm on C^2 is submultiplicative but not multiplicative") {
    Spec spec(2, NormRule::max);
    CHECK_FALSE(spec.multiplicative_norm());
    // A strictly submultiplicative pair exists.
    Value x({Complex(1, 0), Complex(0.1, 0)});
    Value y({Complex(0.1, 0), Complex(1, 0)});
    CHECK(norm(spec, x * y) < norm(spec, x) * norm(spec, y));
}

TEST_CASE("hat lift") {
    // Scalar multiple of the unit.
    auto lifted = hat_lift(Value({Complex(3, 0), Complex(3, 0)}));
    CHECK(lifted.in_m_set);
    CHECK(lifted.value == Complex(3, 0));

    // Never in C x {1_B} when the components differ.
    auto outside = hat_lift(Value({Complex(std::exp(1.0), 0), Complex(0.3, 0)}));
    CHECK_FALSE(outside.in_m_set);
    CHECK(outside.value == Complex(1, 0));

    // Dimension 1: every value is c * 1_B.
    auto scalar = hat_lift(Value(Complex(5, -2)));
    CHECK(scalar.in_m_set);
    CHECK(scalar.value == Complex(5, -2));

    // lift(g,a) * 1_B == g(a) exactly on the member set.
    Value g_a({Complex(2.5, 1.5), Complex(2.5, 1.5)});
    auto l = hat_lift(g_a);
    REQUIRE(l.in_m_set);
    CHECK(l.value * Value::unit(2) == g_a);
}

TEST_CASE("generalized metric") {
    Domain nat = Domain::naturals_add(64);
    Window w = enumerate_window(nat, 0, 10);
    Spec spec(1, NormRule::modulus);

    auto u = [&](const Element& y) { return Value(Complex(static_cast<double>(y.coords[0]), 0)); };
    auto v = [&](const Element&) { return Value(Complex(0, 0)); };
    auto one = [](const Element&) { return 1.0; };

    CHECK(generalized_metric(spec, u, u, one, w) == 0.0);

    // Direct sup evaluation: max |y - 0| / 1 over y in [0,10] is 10.
    CHECK(generalized_metric(spec, u, v, one, w) == Catch::Approx(10.0));

    // u - v == c * weight pointwise gives exactly |c|.
    auto weight = [](const Element& y) { return 1.0 + static_cast<double>(y.coords[0]); };
    auto shifted = [&](const Element& y) {
        return Value(Complex(static_cast<double>(y.coords[0]) - 2.5 * weight(y), 0));
    };
    CHECK(generalized_metric(spec, u, shifted, weight, w) == Catch::Approx(2.5));

    // Zero weight demands exact equality, otherwise the distance is infinite.
    auto zero_w = [](const Element& y) { return y.coords[0] == 0 ? 0.0 : 1.0; };
    CHECK(std::isinf(generalized_metric(spec, u, shifted, zero_w, w)));
    auto v_eq_at0 = [&](const Element& y) {
        return y.coords[0] == 0 ? u(y) : Value(Complex(0, 0));
    };
    CHECK(std::isfinite(generalized_metric(spec, u, v_eq_at0, zero_w, w)));
}

TEST_CASE("generalized metric axioms with infinity arithmetic") {
    Domain nat = Domain::naturals_add(64);
    Window w = enumerate_window(nat, 0, 6);
    Spec spec(1, NormRule::modulus);
    auto weight = [](const Element&) { return 1.0; };

    SplitMix64 rng(3);
    std::vector<std::vector<Value>> maps;
    for (int m = 0; m < 6; ++m) {
        std::vector<Value> vals;
        for (std::size_t k = 0; k < w.size(); ++k) vals.push_back(random_value(rng, 1, 4.0));
        maps.push_back(std::move(vals));
    }
    auto fn = [&](int m) {
        return [&, m](const Element& y) { return maps[static_cast<std::size_t>(m)][static_cast<std::size_t>(y.coords[0])]; };
    };

    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
            const double dab = generalized_metric(spec, fn(a), fn(b), weight, w);
            CHECK(dab >= 0.0);
            CHECK(dab == generalized_metric(spec, fn(b), fn(a), weight, w));
            if (a == b) CHECK(dab == 0.0);
            for (int c = 0; c < 6; ++c) {
                const double dac = generalized_metric(spec, fn(a), fn(c), weight, w);
                const double dcb = generalized_metric(spec, fn(c), fn(b), weight, w);
                CHECK(dab <= dac + dcb + 1e-12 * (1 + dac + dcb));
            }
        }
}

TEST_CASE("overflow poisons suprema") {
    Value huge(Complex(1e301, 0));
    huge.check();
    CHECK(huge.overflowed);
    Spec spec(1, NormRule::modulus);
    CHECK(std::isinf(norm(spec, huge)));
    // Sticky through arithmetic.
    Value sum = huge + Value(Complex(1, 0));
    CHECK(sum.overflowed);
}

TEST_CASE("principal strip") {
    constexpr double pi = 3.14159265358979323846;
    CHECK(principal::in_strip(Complex(1.0, 3.0)));
    CHECK_FALSE(principal::in_strip(Complex(1.0, 4.0)));
    CHECK(principal::in_strip(Complex(0.0, pi)));
    CHECK_FALSE(principal::in_strip(Complex(0.0, -pi)));
    const Complex z = principal::normalize(Complex(2.0, 2.0 * pi + 0.5));
    CHECK(z.real() == 2.0);
    CHECK(z.imag() == Catch::Approx(0.5));
}
