#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ulamlab/errors.hpp"

namespace ulamlab::expr {

using Complex = std::complex<double>;

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? power
//   power  := atom ('^' factor)?
//   atom   := number | 'i' | 'pi' | 'e' | ident
//           | ident '(' expr (',' expr)* ')' | '(' expr ')'
// '^' binds tightest and is right-associative; unary minus sits between
// '^' and '*', so "-2^2" is -(2^2).

struct Node;
using Ast = std::shared_ptr<const Node>;

struct Node {
    enum class Tag { number, const_pi, const_e, const_i, var, neg, bin, call };

    Tag tag;
    double num = 0;        // number
    std::string name;      // var, call
    char op = 0;           // bin: + - * / ^
    std::vector<Ast> kids; // neg: 1, bin: 2, call: arity
};

inline Ast make_number(double v) {
    auto n = std::make_shared<Node>();
    n->tag = Node::Tag::number;
    n->num = v;
    return n;
}
inline Ast make_const(Node::Tag t) {
    auto n = std::make_shared<Node>();
    n->tag = t;
    return n;
}
inline Ast make_var(std::string name) {
    auto n = std::make_shared<Node>();
    n->tag = Node::Tag::var;
    n->name = std::move(name);
    return n;
}
inline Ast make_neg(Ast k) {
    auto n = std::make_shared<Node>();
    n->tag = Node::Tag::neg;
    n->kids = {std::move(k)};
    return n;
}
inline Ast make_bin(char op, Ast l, Ast r) {
    auto n = std::make_shared<Node>();
    n->tag = Node::Tag::bin;
    n->op = op;
    n->kids = {std::move(l), std::move(r)};
    return n;
}
inline Ast make_call(std::string name, std::vector<Ast> args) {
    auto n = std::make_shared<Node>();
    n->tag = Node::Tag::call;
    n->name = std::move(name);
    n->kids = std::move(args);
    return n;
}

inline bool equal(const Ast& a, const Ast& b) {
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case Node::Tag::number: return a->num == b->num;
        case Node::Tag::var: return a->name == b->name;
        case Node::Tag::bin:
            if (a->op != b->op) return false;
            break;
        case Node::Tag::call:
            if (a->name != b->name) return false;
            break;
        default: break;
    }
    if (a->kids.size() != b->kids.size()) return false;
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!equal(a->kids[i], b->kids[i])) return false;
    return true;
}

struct FunctionInfo {
    int arity;
};

inline const std::map<std::string, FunctionInfo>& functions() {
    static const std::map<std::string, FunctionInfo> fns = {
        {"exp", {1}}, {"ln", {1}},  {"sin", {1}}, {"cos", {1}}, {"abs", {1}},
        {"sqrt", {1}}, {"pow", {2}}, {"min", {2}}, {"max", {2}},
    };
    return fns;
}

class Parser {
public:
    Parser(const std::string& src, const std::set<std::string>& idents)
        : src_(src), idents_(idents) {}

    Ast parse() {
        if (src_.empty()) throw parse_error("empty expression", 0);
        Ast e = parse_expr();
        skip_ws();
        if (at_ < src_.size())
            fail("expected end of input, operator, or ')'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& expected) {
        throw parse_error("syntax error at offset " + std::to_string(at_) + ": expected " +
                              expected,
                          at_);
    }

    void skip_ws() {
        while (at_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[at_]))) ++at_;
    }

    char peek() {
        skip_ws();
        return at_ < src_.size() ? src_[at_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++at_;
            return true;
        }
        return false;
    }

    Ast parse_expr() {
        Ast a = parse_term();
        while (true) {
            char c = peek();
            if (c != '+' && c != '-') break;
            ++at_;
            a = make_bin(c, a, parse_term());
        }
        return a;
    }

    Ast parse_term() {
        Ast a = parse_factor();
        while (true) {
            char c = peek();
            if (c != '*' && c != '/') break;
            ++at_;
            a = make_bin(c, a, parse_factor());
        }
        return a;
    }

    Ast parse_factor() {
        if (consume('-')) return make_neg(parse_power());
        return parse_power();
    }

    Ast parse_power() {
        Ast base = parse_atom();
        if (consume('^')) return make_bin('^', base, parse_factor());
        return base;
    }

    Ast parse_atom() {
        char c = peek();
        if (c == '(') {
            ++at_;
            Ast e = parse_expr();
            if (!consume(')')) fail("')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail("number, identifier, '(', or '-'");
    }

    Ast parse_number() {
        std::size_t start = at_;
        while (at_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[at_]))) ++at_;
        if (at_ < src_.size() && src_[at_] == '.') {
            ++at_;
            if (at_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[at_])))
                fail("digit after decimal point");
            while (at_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[at_]))) ++at_;
        }
        // Exponent part only when digits actually follow, so "2*e" stays
        // two tokens while "2e3" is one number.
        if (at_ < src_.size() && (src_[at_] == 'e' || src_[at_] == 'E')) {
            std::size_t mark = at_;
            ++at_;
            if (at_ < src_.size() && (src_[at_] == '+' || src_[at_] == '-')) ++at_;
            if (at_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[at_]))) {
                while (at_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[at_])))
                    ++at_;
            } else {
                at_ = mark;
            }
        }
        return make_number(std::stod(src_.substr(start, at_ - start)));
    }

    Ast parse_ident() {
        std::size_t start = at_;
        while (at_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[at_])) || src_[at_] == '_'))
            ++at_;
        std::string name = src_.substr(start, at_ - start);
        if (name == "pi") return make_const(Node::Tag::const_pi);
        if (name == "e") return make_const(Node::Tag::const_e);
        if (name == "i") return make_const(Node::Tag::const_i);
        if (auto it = functions().find(name); it != functions().end()) {
            if (!consume('(')) fail("'(' after function name '" + name + "'");
            std::vector<Ast> args;
            args.push_back(parse_expr());
            while (consume(',')) args.push_back(parse_expr());
            if (!consume(')')) fail("')' or ','");
            if (static_cast<int>(args.size()) != it->second.arity)
                throw parse_error("function '" + name + "' takes " +
                                      std::to_string(it->second.arity) + " argument(s), got " +
                                      std::to_string(args.size()),
                                  start);
            return make_call(name, std::move(args));
        }
        if (!idents_.count(name))
            throw parse_error("unknown identifier '" + name + "' at offset " +
                                  std::to_string(start),
                              start);
        return make_var(name);
    }

    const std::string& src_;
    const std::set<std::string>& idents_;
    std::size_t at_ = 0;
};

/// Variables legal in map expressions and control bodies, plus the named
/// control parameters bound at construction.
inline const std::set<std::string>& default_identifiers() {
    static const std::set<std::string> ids = {
        "x",  "y",  "n",  "x1", "x2", "x3", "x4",    "x5",
        "x6", "x7", "x8", "eps", "delta", "theta", "p", "q",
    };
    return ids;
}

inline Ast parse(const std::string& source,
                 const std::set<std::string>& idents = default_identifiers()) {
    return Parser(source, idents).parse();
}

// ---------------------------------------------------------------------------
// Printing. print(parse(s)) reparses to a structurally identical tree.

namespace detail {

inline int level(const Node& n) {
    switch (n.tag) {
        case Node::Tag::bin: return (n.op == '+' || n.op == '-') ? 1 : n.op == '^' ? 4 : 2;
        case Node::Tag::neg: return 3;
        default: return 5;
    }
}

inline std::string number_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    return s;
}

inline void print_node(const Ast& a, int min_level, std::string& out) {
    const bool parens = level(*a) < min_level;
    if (parens) out += '(';
    switch (a->tag) {
        case Node::Tag::number: out += number_str(a->num); break;
        case Node::Tag::const_pi: out += "pi"; break;
        case Node::Tag::const_e: out += "e"; break;
        case Node::Tag::const_i: out += "i"; break;
        case Node::Tag::var: out += a->name; break;
        case Node::Tag::neg:
            out += '-';
            print_node(a->kids[0], 4, out);
            break;
        case Node::Tag::bin:
            if (a->op == '^') {
                print_node(a->kids[0], 5, out);
                out += '^';
                print_node(a->kids[1], 3, out);
            } else {
                const int lv = level(*a);
                print_node(a->kids[0], lv, out);
                out += a->op;
                print_node(a->kids[1], lv + 1, out);
            }
            break;
        case Node::Tag::call:
            out += a->name;
            out += '(';
            for (std::size_t i = 0; i < a->kids.size(); ++i) {
                if (i) out += ',';
                print_node(a->kids[i], 1, out);
            }
            out += ')';
            break;
    }
    if (parens) out += ')';
}

} // namespace detail

inline std::string print(const Ast& a) {
    std::string out;
    detail::print_node(a, 1, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation.

struct Env {
    std::map<std::string, Complex> vars;

    Complex lookup(const std::string& name) const {
        auto it = vars.find(name);
        if (it == vars.end())
            throw precondition_error("variable '" + name + "' not bound in this context");
        return it->second;
    }
};

namespace detail {

/// Integer powers go through binary exponentiation so grid exponentials like
/// 2^x stay exact; everything else takes the principal branch of std::pow.
inline Complex power(Complex base, Complex ex) {
    if (ex.imag() == 0.0 && std::nearbyint(ex.real()) == ex.real() &&
        std::abs(ex.real()) <= 1024.0) {
        long long n = static_cast<long long>(ex.real());
        bool invert = n < 0;
        unsigned long long k = invert ? static_cast<unsigned long long>(-n)
                                      : static_cast<unsigned long long>(n);
        Complex acc(1.0, 0.0);
        Complex b = base;
        while (k) {
            if (k & 1ULL) acc *= b;
            k >>= 1;
            if (k) b *= b;
        }
        return invert ? Complex(1.0, 0.0) / acc : acc;
    }
    return std::pow(base, ex);
}

} // namespace detail

inline Complex eval(const Ast& a, const Env& env) {
    constexpr double pi = 3.14159265358979323846;
    switch (a->tag) {
        case Node::Tag::number: return Complex(a->num, 0.0);
        case Node::Tag::const_pi: return Complex(pi, 0.0);
        case Node::Tag::const_e: return Complex(std::exp(1.0), 0.0);
        case Node::Tag::const_i: return Complex(0.0, 1.0);
        case Node::Tag::var: return env.lookup(a->name);
        case Node::Tag::neg: return -eval(a->kids[0], env);
        case Node::Tag::bin: {
            Complex l = eval(a->kids[0], env);
            Complex r = eval(a->kids[1], env);
            switch (a->op) {
                case '+': return l + r;
                case '-': return l - r;
                case '*': return l * r;
                case '/': return l / r;
                case '^': return detail::power(l, r);
            }
            return {};
        }
        case Node::Tag::call: {
            Complex u = eval(a->kids[0], env);
            if (a->name == "exp") return std::exp(u);
            if (a->name == "ln") return std::log(u); // principal branch, Im in (-pi, pi]
            if (a->name == "sin") return std::sin(u);
            if (a->name == "cos") return std::cos(u);
            if (a->name == "abs") return Complex(std::abs(u), 0.0);
            if (a->name == "sqrt") return std::sqrt(u);
            Complex v = eval(a->kids[1], env);
            if (a->name == "pow") return detail::power(u, v);
            // min/max order by real part and return the chosen argument.
            if (a->name == "min") return u.real() <= v.real() ? u : v;
            if (a->name == "max") return u.real() >= v.real() ? u : v;
            return {};
        }
    }
    return {};
}

} // namespace ulamlab::expr
