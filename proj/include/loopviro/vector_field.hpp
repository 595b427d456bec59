#ifndef LOOPVIRO_VECTOR_FIELD_HPP
#define LOOPVIRO_VECTOR_FIELD_HPP

#include "loopviro/core.hpp"

#include <map>

namespace loopviro {

/// v(lambda) d/dlambda with v a finite Laurent sum: coeff[p] multiplies lambda^p.
/// The generator L_j = lambda^{j+1} d/dlambda has a single entry at p = j + 1.
class VectorFieldLambda {
public:
    VectorFieldLambda() = default;

    static VectorFieldLambda generator(int j) {
        VectorFieldLambda v;
        v.set(j + 1, 1.0);
        return v;
    }
    /// sum_j c_j lambda^{j+1}, j = 0..J.
    static VectorFieldLambda from_coeffs(const std::vector<cplx>& c) {
        VectorFieldLambda v;
        for (std::size_t j = 0; j < c.size(); ++j) v.set(static_cast<int>(j) + 1, c[j]);
        return v;
    }

    /// Sets the coefficient of lambda^p; zero entries are not stored.
    void set(int p, cplx c) {
        if (c == cplx{0.0})
            terms_.erase(p);
        else
            terms_[p] = c;
    }
    cplx coeff(int p) const {
        const auto it = terms_.find(p);
        return it == terms_.end() ? cplx{0.0} : it->second;
    }
    const std::map<int, cplx>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int min_power() const { return terms_.empty() ? 0 : terms_.begin()->first; }
    int max_power() const { return terms_.empty() ? 0 : terms_.rbegin()->first; }

    /// Holomorphic at 0 and vanishing there (lowest power >= 1).
    bool vanishes_at_zero() const { return terms_.empty() || min_power() >= 1; }

    cplx operator()(cplx lambda) const {
        cplx s = 0.0;
        for (const auto& [p, c] : terms_) s += c * std::pow(lambda, p);
        return s;
    }
    cplx derivative(cplx lambda) const {
        cplx s = 0.0;
        for (const auto& [p, c] : terms_)
            if (p != 0) s += static_cast<double>(p) * c * std::pow(lambda, p - 1);
        return s;
    }

    friend VectorFieldLambda operator+(const VectorFieldLambda& a, const VectorFieldLambda& b) {
        VectorFieldLambda r = a;
        for (const auto& [p, c] : b.terms_) r.set(p, r.coeff(p) + c);
        return r;
    }
    friend VectorFieldLambda operator*(cplx s, const VectorFieldLambda& a) {
        VectorFieldLambda r;
        for (const auto& [p, c] : a.terms_) r.set(p, s * c);
        return r;
    }
    friend VectorFieldLambda operator-(const VectorFieldLambda& a, const VectorFieldLambda& b) {
        return a + cplx{-1.0} * b;
    }
    friend bool operator==(const VectorFieldLambda& a, const VectorFieldLambda& b) { return a.terms_ == b.terms_; }

private:
    std::map<int, cplx> terms_;
};

/// [V, W] = (v w' - w v') d/dlambda.  On monomials
/// [lambda^a, lambda^b] = (b - a) lambda^{a+b-1}, so [L_j, L_k] = (k - j) L_{j+k}.
inline VectorFieldLambda vira_bracket(const VectorFieldLambda& V, const VectorFieldLambda& W, int max_power = 256) {
    VectorFieldLambda r;
    std::map<int, cplx> acc;
    for (const auto& [a, ca] : V.terms())
        for (const auto& [b, cb] : W.terms()) {
            if (a == b) continue;
            const int p = a + b - 1;
            if (std::abs(p) > max_power) throw InvalidArgument("vira_bracket: degree exceeds the configured cap");
            acc[p] += static_cast<double>(b - a) * ca * cb;
        }
    for (const auto& [p, c] : acc) r.set(p, c);
    return r;
}

/// The field at infinity matching V under lambda -> conj(lambda)^{-1}:
/// sum c_p lambda^p  ->  -sum conj(c_p) lambda^{2-p}.
inline VectorFieldLambda reality_extend(const VectorFieldLambda& V) {
    VectorFieldLambda r;
    for (const auto& [p, c] : V.terms()) r.set(2 - p, -std::conj(c));
    return r;
}

/// A field with real coefficients at 0 and another at infinity; the two act
/// independently.
struct VirasoroPairR {
    VectorFieldLambda w;  // near 0
    VectorFieldLambda v;  // near infinity

    void validate() const {
        for (const auto* f : {&w, &v})
            for (const auto& [p, c] : f->terms())
                if (c.imag() != 0.0) throw InvalidArgument("VirasoroPairR fields must have real coefficients");
    }
};

}  // namespace loopviro

#endif  // LOOPVIRO_VECTOR_FIELD_HPP
