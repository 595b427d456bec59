#ifndef LOOPVIRO_RATIONAL_HPP
#define LOOPVIRO_RATIONAL_HPP

#include "loopviro/core.hpp"

#include <cctype>
#include <string_view>

namespace loopviro {

/// Polynomial with ascending complex coefficients.
struct Polynomial {
    std::vector<cplx> c;

    Polynomial() = default;
    Polynomial(std::vector<cplx> coeffs) : c(std::move(coeffs)) { normalize(); }
    static Polynomial constant(cplx a) { return Polynomial({a}); }
    static Polynomial variable() { return Polynomial({0.0, 1.0}); }

    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool is_zero() const { return c.empty(); }

    cplx operator()(cplx z) const {
        cplx r = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
        return r;
    }

    Polynomial derivative() const {
        std::vector<cplx> d;
        for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
        return Polynomial(std::move(d));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<cplx> r(std::max(a.c.size(), b.c.size()), 0.0);
        for (std::size_t k = 0; k < a.c.size(); ++k) r[k] += a.c[k];
        for (std::size_t k = 0; k < b.c.size(); ++k) r[k] += b.c[k];
        return Polynomial(std::move(r));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }
    friend Polynomial operator*(cplx s, const Polynomial& a) {
        std::vector<cplx> r = a.c;
        for (auto& x : r) x *= s;
        return Polynomial(std::move(r));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<cplx> r(a.c.size() + b.c.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
        return Polynomial(std::move(r));
    }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c == b.c; }

private:
    void normalize() {
        while (!c.empty() && c.back() == cplx{0.0}) c.pop_back();
    }
};

/// Rational function num / den in one complex variable.
struct Rational {
    Polynomial num = Polynomial::constant(0.0);
    Polynomial den = Polynomial::constant(1.0);

    cplx operator()(cplx z) const {
        const cplx d = den(z);
        if (d == cplx{0.0}) throw InvalidArgument("rational function evaluated at a pole");
        return num(z) / d;
    }
    /// (n' d - n d') / d^2
    cplx derivative(cplx z) const {
        const cplx d = den(z);
        if (d == cplx{0.0}) throw InvalidArgument("rational function evaluated at a pole");
        return (num.derivative()(z) * d - num(z) * den.derivative()(z)) / (d * d);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (a.den == b.den) return {a.num + b.num, a.den};
        return {a.num * b.den + b.num * a.den, a.den * b.den};
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational{(-1.0) * b.num, b.den}; }
    friend Rational operator*(const Rational& a, const Rational& b) { return {a.num * b.num, a.den * b.den}; }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num.is_zero()) throw InvalidArgument("division by the zero function");
        return {a.num * b.den, a.den * b.num};
    }
};

namespace detail {

/// Recursive-descent parser for rational expressions in z:
///   expr := term (('+'|'-') term)*      term := unary (('*'|'/') unary)*
///   unary := ('-'|'+') unary | power    power := atom ('^' integer)?
///   atom := number | 'i' | 'z' | '(' expr ')'       (juxtaposition "2z" is a product)
class RationalParser {
public:
    explicit RationalParser(std::string_view s) : s_(s) {}

    Rational parse() {
        Rational r = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidArgument("cannot parse rational function '" + std::string(s_) + "': " + why + " at offset " +
                              std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek() {
        skip();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    Rational expr() {
        Rational r = term();
        for (char c = peek(); c == '+' || c == '-'; c = peek()) {
            ++pos_;
            r = c == '+' ? r + term() : r - term();
        }
        return r;
    }
    Rational term() {
        Rational r = unary();
        for (;;) {
            const char c = peek();
            if (c == '*' || c == '/') {
                ++pos_;
                r = c == '*' ? r * unary() : r / unary();
            } else if (c == '(' || c == 'z' || c == 'i' || std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                r = r * power();
            } else {
                return r;
            }
        }
    }
    Rational unary() {
        const char c = peek();
        if (c == '-') {
            ++pos_;
            const Rational u = unary();
            return {(-1.0) * u.num, u.den};
        }
        if (c == '+') {
            ++pos_;
            return unary();
        }
        return power();
    }
    Rational power() {
        Rational base = atom();
        if (peek() != '^') return base;
        ++pos_;
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a non-negative integer exponent");
        const int e = std::stoi(std::string(s_.substr(start, pos_ - start)));
        Rational r;
        r.num = Polynomial::constant(1.0);
        for (int k = 0; k < e; ++k) r = r * base;
        return r;
    }
    Rational atom() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            Rational r = expr();
            if (peek() != ')') fail("missing ')'");
            ++pos_;
            return r;
        }
        if (c == 'z') {
            ++pos_;
            return {Polynomial::variable(), Polynomial::constant(1.0)};
        }
        if (c == 'i') {
            ++pos_;
            return {Polynomial::constant(I_unit), Polynomial::constant(1.0)};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == 'e' ||
                    ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > start && s_[pos_ - 1] == 'e')))
                ++pos_;
            double v = 0.0;
            try {
                v = std::stod(std::string(s_.substr(start, pos_ - start)));
            } catch (const std::exception&) {
                fail("bad number");
            }
            return {Polynomial::constant(v), Polynomial::constant(1.0)};
        }
        fail("expected a number, 'z', 'i' or '('");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Rational parse_rational(std::string_view text) { return detail::RationalParser(text).parse(); }

}  // namespace loopviro

#endif  // LOOPVIRO_RATIONAL_HPP
