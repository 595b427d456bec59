#ifndef LOOPVIRO_RANDOM_HPP
#define LOOPVIRO_RANDOM_HPP

#include "loopviro/double_loop.hpp"

#include <cstdint>
#include <string_view>

namespace loopviro {

/// Small splittable generator (SplitMix64).  Streams are derived by name so
/// that adding a draw to one suite never shifts the numbers seen by another.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    Rng split(std::string_view name) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (unsigned char ch : name) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        Rng child(state_ ^ mix(h));
        child.next();
        return child;
    }

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        // Box-Muller; std::normal_distribution is not reproducible across standard libraries.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }
    cplx cnormal() { return {normal(), normal()}; }

    /// Integer in [lo, hi].
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

inline Mat random_matrix(Rng& rng, int n, double scale = 1.0) {
    Mat m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = scale * rng.cnormal();
    return m;
}

inline Mat random_traceless(Rng& rng, int n, double scale = 1.0) {
    Mat m = random_matrix(rng, n, scale);
    m -= (m.trace() / static_cast<double>(n)) * identity(n);
    return m;
}

/// Random unimodular matrix: Gaussian entries rescaled by det^{-1/n}.
inline Mat random_unimodular(Rng& rng, int n) {
    Mat g = random_matrix(rng, n);
    const cplx d = g.determinant();
    return g * std::pow(d, -1.0 / n);
}

/// Traceless Laurent polynomial whose modes have scaled norm about `scale`.
inline LaurentLoop random_laurent(Rng& rng, int n, int K, Annulus annulus, double scale) {
    LaurentLoop L(n, K, annulus);
    for (int k = -K; k <= K; ++k) L.coeff(k) = random_traceless(rng, n, scale / annulus.weight(k));
    return L;
}

/// Random field on the two circles satisfying W(l) = -W(conj(l)^{-1})^*.
inline DoubleLoop random_hmrc_field(Rng& rng, int n, int K, const AnnulusConfig& cfg, double scale) {
    const auto near0 = random_laurent(rng, n, K, cfg.inner(), scale);
    return {near0, hmrc_involution(near0, Level::algebra)};
}

/// Near-identity loop satisfying the group HMRC: exp of a random HMRC field.
inline DoubleLoop random_hmrc_loop(Rng& rng, int n, int K, const AnnulusConfig& cfg, double scale) {
    return exp_loop(random_hmrc_field(rng, n, K, cfg, scale), cfg);
}

}  // namespace loopviro

#endif  // LOOPVIRO_RANDOM_HPP
