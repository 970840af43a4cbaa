#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ulamlab/errors.hpp"
#include "ulamlab/rational.hpp"
#include "ulamlab/rng.hpp"

namespace ulamlab::semigroup {

/// The five commutative semigroup families every scenario is built on.
/// All of them are realized on exact integer grids: an element stores grid
/// indices and the domain maps indices to real values, so the semigroup
/// operation itself never rounds.
enum class Kind {
    naturals_add,       // (N, +)
    integers_mod,       // (Z_m, + mod m)
    reals_pos_mul_grid, // ({step^k}, *): geometric grid of positive reals
    vector_naturals,    // (N^k, componentwise +)
    reals_add_grid,     // ({k*step}, +): arithmetic grid of reals
};

inline std::string kind_name(Kind k) {
    switch (k) {
        case Kind::naturals_add: return "naturals-add";
        case Kind::integers_mod: return "integers-mod-m";
        case Kind::reals_pos_mul_grid: return "reals-positive-mul-grid";
        case Kind::vector_naturals: return "vector-naturals-k";
        case Kind::reals_add_grid: return "reals-add-grid";
    }
    return "?";
}

/// A domain element: exact integer coordinates (grid indices for the
/// real-valued kinds). Length is 1 except for vector domains.
struct Element {
    std::vector<std::int64_t> coords;

    Element() = default;
    explicit Element(std::int64_t c) : coords{c} {}
    explicit Element(std::vector<std::int64_t> cs) : coords(std::move(cs)) {}

    friend bool operator==(const Element& a, const Element& b) { return a.coords == b.coords; }
    friend bool operator!=(const Element& a, const Element& b) { return !(a == b); }
    friend bool operator<(const Element& a, const Element& b) { return a.coords < b.coords; }

    std::string str() const {
        if (coords.size() == 1) return std::to_string(coords[0]);
        std::string s = "(";
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(coords[i]);
        }
        return s + ")";
    }
};

class Domain {
public:
    static Domain naturals_add(std::int64_t extent_hi) {
        return Domain(Kind::naturals_add, 0, 1, Rational(1), 0, extent_hi);
    }
    static Domain integers_mod(std::int64_t m) {
        if (m < 1) throw config_error("modulus must be >= 1");
        return Domain(Kind::integers_mod, m, 1, Rational(1), 0, m - 1);
    }
    static Domain reals_add_grid(Rational step, std::int64_t extent_lo, std::int64_t extent_hi) {
        return Domain(Kind::reals_add_grid, 0, 1, step, extent_lo, extent_hi);
    }
    static Domain reals_pos_mul_grid(Rational step, std::int64_t extent_lo, std::int64_t extent_hi) {
        if (step.value() <= 0) throw config_error("multiplicative grid step must be positive");
        return Domain(Kind::reals_pos_mul_grid, 0, 1, step, extent_lo, extent_hi);
    }
    static Domain vector_naturals(int dimension, std::int64_t extent_hi) {
        if (dimension < 1 || dimension > 8) throw config_error("vector dimension must be in [1,8]");
        return Domain(Kind::vector_naturals, 0, dimension, Rational(1), 0, extent_hi);
    }

    Kind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    std::int64_t modulus() const { return modulus_; }
    const Rational& step() const { return step_; }
    std::int64_t extent_lo() const { return extent_lo_; }
    std::int64_t extent_hi() const { return extent_hi_; }

    bool contains(const Element& a) const {
        if (static_cast<int>(a.coords.size()) != dimension_) return false;
        for (std::int64_t c : a.coords)
            if (c < extent_lo_ || c > extent_hi_) return false;
        return true;
    }

    void require(const Element& a) const {
        if (!contains(a))
            throw range_error("element " + a.str() + " outside extent [" +
                              std::to_string(extent_lo_) + "," + std::to_string(extent_hi_) +
                              "] of " + kind_name(kind_));
    }

    /// The semigroup operation. Commutative and associative by construction
    /// (index addition); errors if the result escapes the declared extent.
    Element op(const Element& a, const Element& b) const {
        require(a);
        require(b);
        Element r;
        r.coords.resize(a.coords.size());
        for (std::size_t i = 0; i < a.coords.size(); ++i) {
            std::int64_t c = a.coords[i] + b.coords[i];
            if (kind_ == Kind::integers_mod) c = ((c % modulus_) + modulus_) % modulus_;
            r.coords[i] = c;
        }
        require(r);
        return r;
    }

    /// n-fold product a*a*...*a, n >= 1.
    Element pow(const Element& a, std::int64_t n) const {
        if (n < 1) throw precondition_error("pow requires n >= 1");
        require(a);
        Element r;
        r.coords.resize(a.coords.size());
        for (std::size_t i = 0; i < a.coords.size(); ++i) {
            std::int64_t c = a.coords[i] * n;
            if (kind_ == Kind::integers_mod) c = ((c % modulus_) + modulus_) % modulus_;
            r.coords[i] = c;
        }
        require(r);
        return r;
    }

    /// Neutral element when it lies inside the extent.
    std::optional<Element> identity() const {
        Element e(std::vector<std::int64_t>(dimension_, 0));
        if (contains(e)) return e;
        return std::nullopt;
    }

    /// Real value carried by a scalar element (the grid point it names).
    double value(const Element& a) const {
        if (dimension_ != 1)
            throw precondition_error("value() requires a scalar domain");
        return coordinate_value(a.coords[0]);
    }

    double coordinate_value(std::int64_t c) const {
        switch (kind_) {
            case Kind::naturals_add:
            case Kind::integers_mod:
            case Kind::vector_naturals:
                return static_cast<double>(c);
            case Kind::reals_add_grid:
                return static_cast<double>(c) * step_.value();
            case Kind::reals_pos_mul_grid:
                return std::pow(step_.value(), static_cast<double>(c));
        }
        return 0.0;
    }

    /// |x|-style magnitude used by control functions: |value| for scalar
    /// kinds, Euclidean norm of the coordinate values for vector kinds.
    double magnitude(const Element& a) const {
        if (dimension_ == 1) return std::abs(coordinate_value(a.coords[0]));
        double s = 0;
        for (std::int64_t c : a.coords) {
            double v = coordinate_value(c);
            s += v * v;
        }
        return std::sqrt(s);
    }

private:
    Domain(Kind kind, std::int64_t modulus, int dimension, Rational step,
           std::int64_t lo, std::int64_t hi)
        : kind_(kind), modulus_(modulus), dimension_(dimension), step_(step),
          extent_lo_(lo), extent_hi_(hi) {
        if (hi < lo) throw config_error("empty extent");
    }

    Kind kind_;
    std::int64_t modulus_;
    int dimension_;
    Rational step_;
    std::int64_t extent_lo_;
    std::int64_t extent_hi_;
};

/// How a window samples its element pairs.
struct PairPolicy {
    bool exhaustive = true;
    std::uint64_t seed = 0;
    std::size_t count = 0;

    static PairPolicy all() { return {}; }
    static PairPolicy seeded(std::uint64_t seed, std::size_t count) {
        return {false, seed, count};
    }
};

/// Finite ordered evaluation set. Suprema, limits, and verdicts are always
/// certified on a window, never on the full domain.
struct Window {
    std::vector<Element> elements;
    PairPolicy pairs = PairPolicy::all();

    std::size_t size() const { return elements.size(); }

    /// Visits sampled (a, b) pairs in a deterministic order.
    template <typename Fn>
    void for_each_pair(Fn&& fn) const {
        if (pairs.exhaustive) {
            for (const Element& a : elements)
                for (const Element& b : elements) fn(a, b);
            return;
        }
        for (std::size_t k = 0; k < pairs.count; ++k) {
            std::uint64_t h = CounterRng::mix(pairs.seed ^ (0xa5a5a5a5ULL + k));
            std::size_t i = static_cast<std::size_t>(h % elements.size());
            std::size_t j = static_cast<std::size_t>(CounterRng::mix(h) % elements.size());
            fn(elements[i], elements[j]);
        }
    }
};

/// Enumerates the box [lo, hi]^dim in row-major order. Deterministic: equal
/// specs yield identical element sequences.
inline Window enumerate_window(const Domain& domain, std::int64_t lo, std::int64_t hi,
                               PairPolicy pairs = PairPolicy::all()) {
    if (hi < lo) throw config_error("empty window extent");
    if (lo < domain.extent_lo() || hi > domain.extent_hi())
        throw config_error("window extent escapes the domain extent");
    Window w;
    w.pairs = pairs;
    const int dim = domain.dimension();
    std::vector<std::int64_t> cur(dim, lo);
    while (true) {
        w.elements.push_back(Element(cur));
        int i = dim - 1;
        while (i >= 0 && cur[i] == hi) { cur[i] = lo; --i; }
        if (i < 0) break;
        ++cur[i];
    }
    return w;
}

/// Full enumeration of Z_m.
inline Window enumerate_window(const Domain& domain) {
    return enumerate_window(domain, domain.extent_lo(), domain.extent_hi());
}

} // namespace ulamlab::semigroup
