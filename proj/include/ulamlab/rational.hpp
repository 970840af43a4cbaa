#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "ulamlab/errors.hpp"

namespace ulamlab {

/// Exact rational number on std::int64_t. Used for grid steps so that domain
/// arithmetic never rounds; only function values are floating-point.
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}

    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    /// Parses "p/q", a plain integer, or a decimal literal such as "0.25",
    /// all exactly.
    static Rational parse(const std::string& text) {
        if (text.empty()) throw config_error("empty rational literal");
        if (auto slash = text.find('/'); slash != std::string::npos) {
            return Rational(std::stoll(text.substr(0, slash)),
                            std::stoll(text.substr(slash + 1)));
        }
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(std::stoll(text));
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::int64_t den = 1;
        for (std::size_t i = dot + 1; i < text.size(); ++i) {
            if (text[i] < '0' || text[i] > '9')
                throw config_error("bad rational literal: " + text);
            den *= 10;
        }
        return Rational(std::stoll(digits), den);
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, std::int64_t k) {
        return Rational(a.num_ * k, a.den_);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    void normalize() {
        if (den_ == 0) throw config_error("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    std::int64_t num_;
    std::int64_t den_;
};

} // namespace ulamlab
