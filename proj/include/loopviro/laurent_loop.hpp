#ifndef LOOPVIRO_LAURENT_LOOP_HPP
#define LOOPVIRO_LAURENT_LOOP_HPP

#include "loopviro/core.hpp"

#include <unsupported/Eigen/FFT>

#include <functional>
#include <span>

namespace loopviro {

/// Closed annulus r_in <= |lambda| <= r_out on which a loop is trusted.
struct Annulus {
    double r_in = 1.0;
    double r_out = 1.0;

    bool single_circle() const { return r_in == r_out; }
    bool contains(double r) const {
        constexpr double slack = 1e-9;
        return r >= r_in * (1.0 - slack) && r <= r_out * (1.0 + slack);
    }
    /// Largest modulus of lambda^k on the annulus.
    double weight(int k) const { return std::max(std::pow(r_in, k), std::pow(r_out, k)); }
    /// Image under lambda -> conj(lambda)^{-1}.
    Annulus reflected() const { return {1.0 / r_out, 1.0 / r_in}; }

    friend bool operator==(const Annulus&, const Annulus&) = default;
};

inline Annulus circle(double r) { return {r, r}; }

/// Truncated matrix Laurent series  sum_{k=-K}^{K} c_k lambda^k.
///
/// Coefficients are the source of truth; samples are always derived.  The
/// annulus records where evaluation is trusted: a single circle for loops
/// obtained from one contour, or a genuine annulus for loops holomorphic on
/// all of C^* (these are rebuilt from two contours, negative modes from the
/// inner circle and non-negative modes from the outer one, so that no
/// coefficient is recovered from a circle on which it is exponentially small).
class LaurentLoop {
public:
    LaurentLoop() = default;

    LaurentLoop(int n, int K, Annulus annulus)
        : n_(n), K_(K), annulus_(annulus), c_(static_cast<std::size_t>(2 * std::max(K, 0) + 1), zeros(std::max(n, 1))) {
        if (n <= 0) throw InvalidArgument("loop dimension must be positive");
        if (K < 0) throw InvalidArgument("truncation order must be non-negative");
        if (!(annulus.r_in > 0.0) || annulus.r_in > annulus.r_out)
            throw InvalidArgument("annulus must satisfy 0 < r_in <= r_out");
    }

    static LaurentLoop constant(const Mat& value, Annulus annulus, int K = 0) {
        LaurentLoop l(static_cast<int>(value.rows()), K, annulus);
        l.coeff(0) = value;
        return l;
    }
    static LaurentLoop identity(int n, Annulus annulus, int K = 0) {
        return constant(loopviro::identity(n), annulus, K);
    }
    /// value * lambda^k
    static LaurentLoop monomial(const Mat& value, int k, Annulus annulus) {
        LaurentLoop l(static_cast<int>(value.rows()), std::abs(k), annulus);
        l.coeff(k) = value;
        return l;
    }

    int dim() const { return n_; }
    int order() const { return K_; }
    const Annulus& annulus() const { return annulus_; }
    bool unimodular() const { return unimodular_; }

    const Mat& coeff(int k) const { return c_.at(static_cast<std::size_t>(k + K_)); }
    Mat& coeff(int k) { return c_.at(static_cast<std::size_t>(k + K_)); }
    /// Coefficient or zero when k lies outside [-K, K].
    Mat coeff_or_zero(int k) const { return (k < -K_ || k > K_) ? zeros(n_) : coeff(k); }

    /// Largest entry of c_k lambda^k over the trusted annulus.
    double scaled_norm(int k) const { return max_abs(coeff(k)) * annulus_.weight(k); }

    /// Sum of scaled norms of the outermost modes |k| > K - 2.
    double tail_norm() const {
        double t = 0.0;
        for (int k = -K_; k <= K_; ++k)
            if (std::abs(k) > K_ - 2) t += scaled_norm(k);
        return t;
    }

    /// Scaled norm of everything discarded by truncations that produced this loop.
    double truncation_error() const { return truncation_error_; }
    void note_truncation(double dropped) { truncation_error_ += dropped; }

    Mat eval_unchecked(cplx lambda) const {
        if (lambda == cplx{0.0}) throw InvalidArgument("cannot evaluate a Laurent loop at lambda = 0");
        Mat pos = coeff(K_);
        for (int k = K_ - 1; k >= 0; --k) pos = pos * lambda + coeff(k);
        if (K_ == 0) return pos;
        const cplx mu = 1.0 / lambda;
        Mat neg = coeff(-K_);
        for (int k = K_ - 1; k >= 1; --k) neg = neg * mu + coeff(-k);
        return pos + neg * mu;
    }

    /// Evaluation restricted to the trusted annulus.
    Mat eval(cplx lambda) const {
        if (lambda == cplx{0.0}) throw InvalidArgument("cannot evaluate a Laurent loop at lambda = 0");
        if (!annulus_.contains(std::abs(lambda)))
            throw OutsideTrust("|lambda| = " + std::to_string(std::abs(lambda)) +
                               " outside trusted annulus");
        return eval_unchecked(lambda);
    }
    Mat operator()(cplx lambda) const { return eval(lambda); }

    LaurentLoop with_annulus(Annulus a) const {
        LaurentLoop l = *this;
        l.annulus_ = a;
        return l;
    }

    /// Pads with zeros or truncates to order K, accumulating the dropped tail.
    LaurentLoop resized(int K) const {
        LaurentLoop l(n_, K, annulus_);
        l.truncation_error_ = truncation_error_;
        for (int k = -K_; k <= K_; ++k) {
            if (std::abs(k) <= K)
                l.coeff(k) = coeff(k);
            else
                l.truncation_error_ += scaled_norm(k);
        }
        l.unimodular_ = unimodular_ && l.truncation_error_ == truncation_error_;
        return l;
    }

    /// Drops outer modes whose scaled norm is below `rel` times the largest one.
    LaurentLoop trimmed(double rel = 1e-16) const {
        double biggest = 0.0;
        for (int k = -K_; k <= K_; ++k) biggest = std::max(biggest, scaled_norm(k));
        const double cut = rel * std::max(biggest, 1e-300);
        int keep = K_;
        while (keep > 0 && scaled_norm(keep) <= cut && scaled_norm(-keep) <= cut) --keep;
        return resized(keep);
    }

    /// Verifies |det - 1| <= tol at the given sample points and sets the flag.
    LaurentLoop& mark_unimodular(std::span<const cplx> points, double tol = 1e-8) {
        for (cplx p : points)
            if (std::abs(eval_unchecked(p).determinant() - 1.0) > tol)
                throw InvalidArgument("loop is not unimodular at sample points");
        unimodular_ = true;
        return *this;
    }

    LaurentLoop& operator+=(const LaurentLoop& o) { return accumulate(o, 1.0); }
    LaurentLoop& operator-=(const LaurentLoop& o) { return accumulate(o, -1.0); }
    LaurentLoop& operator*=(cplx s) {
        for (auto& m : c_) m *= s;
        unimodular_ = false;
        return *this;
    }
    friend LaurentLoop operator+(LaurentLoop a, const LaurentLoop& b) { return a += b; }
    friend LaurentLoop operator-(LaurentLoop a, const LaurentLoop& b) { return a -= b; }
    friend LaurentLoop operator*(cplx s, LaurentLoop a) { return a *= s; }
    friend LaurentLoop operator*(LaurentLoop a, cplx s) { return a *= s; }
    LaurentLoop operator-() const { return cplx{-1.0} * *this; }

    /// Left/right multiplication by a constant matrix.
    friend LaurentLoop operator*(const Mat& m, LaurentLoop a) {
        for (auto& c : a.c_) c = m * c;
        a.unimodular_ = false;
        return a;
    }
    friend LaurentLoop operator*(LaurentLoop a, const Mat& m) {
        for (auto& c : a.c_) c = c * m;
        a.unimodular_ = false;
        return a;
    }

    /// Largest coefficient-wise difference (unscaled); used by exactness tests.
    friend double coeff_distance(const LaurentLoop& a, const LaurentLoop& b) {
        const int K = std::max(a.K_, b.K_);
        double d = 0.0;
        for (int k = -K; k <= K; ++k) d = std::max(d, max_abs(a.coeff_or_zero(k) - b.coeff_or_zero(k)));
        return d;
    }

private:
    LaurentLoop& accumulate(const LaurentLoop& o, double sign) {
        if (o.n_ != n_) throw InvalidArgument("dimension mismatch in loop sum");
        if (o.K_ > K_) *this = resized(o.K_);
        for (int k = -o.K_; k <= o.K_; ++k) coeff(k) += sign * o.coeff(k);
        truncation_error_ += o.truncation_error_;
        unimodular_ = false;
        return *this;
    }

    int n_ = 1;
    int K_ = 0;
    Annulus annulus_{};
    std::vector<Mat> c_{zeros(1)};
    bool unimodular_ = false;
    double truncation_error_ = 0.0;
};

// ---------------------------------------------------------------------------
// Sampling and transforms
// ---------------------------------------------------------------------------

namespace detail {

/// Entry-wise forward DFT of matrix samples: returns hat[m] = (1/N) sum_j S_j e^{-2 pi i m j / N}.
inline std::vector<Mat> dft(std::span<const Mat> samples) {
    const std::size_t N = samples.size();
    const auto rows = samples[0].rows();
    const auto cols = samples[0].cols();
    std::vector<Mat> out(N, Mat::Zero(rows, cols));
    Eigen::FFT<double> fft;
    std::vector<cplx> in(N), spec(N);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (std::size_t m = 0; m < N; ++m) in[m] = samples[m](i, j);
            fft.fwd(spec, in);
            for (std::size_t m = 0; m < N; ++m) out[m](i, j) = spec[m] / static_cast<double>(N);
        }
    return out;
}

/// Inverse of dft(): S_j = sum_m hat[m] e^{2 pi i m j / N}.
inline std::vector<Mat> idft(std::span<const Mat> hat) {
    const std::size_t N = hat.size();
    const auto rows = hat[0].rows();
    const auto cols = hat[0].cols();
    std::vector<Mat> out(N, Mat::Zero(rows, cols));
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> in(N), vals(N);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (std::size_t m = 0; m < N; ++m) in[m] = hat[m](i, j);
            fft.inv(vals, in);
            for (std::size_t m = 0; m < N; ++m) out[m](i, j) = vals[m];
        }
    return out;
}

inline std::size_t wrap(int k, std::size_t N) {
    const auto n = static_cast<long>(N);
    return static_cast<std::size_t>(((k % n) + n) % n);
}

inline void check_sample_count(std::size_t N) {
    if (!is_power_of_two(N)) throw InvalidArgument("sample count must be a power of two");
}

}  // namespace detail

/// Samples of L at N equally spaced points of |lambda| = r (angle 0 first).
inline std::vector<Mat> sample_circle(const LaurentLoop& L, double r, std::size_t N) {
    detail::check_sample_count(N);
    if (2 * static_cast<std::size_t>(L.order()) + 1 > N)
        throw InvalidArgument("too few samples for the loop order");
    std::vector<Mat> hat(N, zeros(L.dim()));
    for (int k = -L.order(); k <= L.order(); ++k)
        hat[detail::wrap(k, N)] += L.coeff(k) * std::pow(r, k);
    return detail::idft(hat);
}

/// Laurent coefficients from samples on |lambda| = r: discrete Fourier modes
/// scaled by r^{-k}, centred on [-N/2, N/2 - 1] and truncated to [-K, K].
inline LaurentLoop laurent_from_samples(std::span<const Mat> samples, double r, int K) {
    detail::check_sample_count(samples.size());
    if (!(r > 0.0)) throw InvalidArgument("sampling radius must be positive");
    const std::size_t N = samples.size();
    const int half = static_cast<int>(N / 2);
    if (K > half - 1) throw InvalidArgument("truncation order exceeds N/2 - 1");
    const auto hat = detail::dft(samples);
    LaurentLoop out(static_cast<int>(samples[0].rows()), K, circle(r));
    double dropped = 0.0;
    for (int k = -half; k < half; ++k) {
        const Mat& h = hat[detail::wrap(k, N)];
        if (std::abs(k) <= K)
            out.coeff(k) = h * std::pow(r, -k);
        else
            dropped += max_abs(h);
    }
    out.note_truncation(dropped);
    return out;
}

/// Rebuilds a loop trusted on the whole annulus from samples on both boundary
/// circles: modes k < 0 come from the inner circle, k >= 0 from the outer one.
inline LaurentLoop laurent_from_two_circles(std::span<const Mat> inner, std::span<const Mat> outer,
                                            Annulus annulus, int K) {
    if (annulus.single_circle()) return laurent_from_samples(inner, annulus.r_in, K).with_annulus(annulus);
    if (inner.size() != outer.size()) throw InvalidArgument("sample counts differ between circles");
    const auto lo = laurent_from_samples(inner, annulus.r_in, K);
    const auto hi = laurent_from_samples(outer, annulus.r_out, K);
    LaurentLoop out(lo.dim(), K, annulus);
    for (int k = -K; k < 0; ++k) out.coeff(k) = lo.coeff(k);
    for (int k = 0; k <= K; ++k) out.coeff(k) = hi.coeff(k);
    out.note_truncation(lo.truncation_error() + hi.truncation_error());
    return out;
}

/// Radii on which a loop is sampled for sample-space operations.
inline std::vector<double> trust_circles(const Annulus& a) {
    if (a.single_circle()) return {a.r_in};
    return {a.r_in, a.r_out};
}

/// Applies `fn` pointwise on the trust circles of L and re-transforms.
/// `fn` receives (lambda, value) and returns the new value.
template <class Fn>
LaurentLoop pointwise_map(const LaurentLoop& L, Fn&& fn, std::size_t N, int K_out) {
    const auto radii = trust_circles(L.annulus());
    std::vector<std::vector<Mat>> vals;
    for (double r : radii) {
        auto s = sample_circle(L, r, N);
        const auto pts = circle_points(r, N);
        for (std::size_t m = 0; m < N; ++m) s[m] = fn(pts[m], s[m]);
        vals.push_back(std::move(s));
    }
    if (radii.size() == 1) return laurent_from_samples(vals[0], radii[0], K_out);
    return laurent_from_two_circles(vals[0], vals[1], L.annulus(), K_out);
}

/// Horner evaluation; throws for lambda = 0 and outside the trust annulus.
inline Mat loop_eval(const LaurentLoop& L, cplx lambda) { return L.eval(lambda); }

/// Cauchy product of coefficient sequences, truncated to order `K_cap`.
inline LaurentLoop loop_mul(const LaurentLoop& a, const LaurentLoop& b, int K_cap = 64) {
    if (a.dim() != b.dim()) throw InvalidArgument("dimension mismatch in loop product");
    const int K_full = a.order() + b.order();
    const Annulus ann{std::max(a.annulus().r_in, b.annulus().r_in),
                      std::min(a.annulus().r_out, b.annulus().r_out)};
    if (ann.r_in > ann.r_out) throw InvalidArgument("loops have disjoint trust annuli");
    LaurentLoop full(a.dim(), K_full, ann);
    for (int j = -a.order(); j <= a.order(); ++j) {
        const Mat& cj = a.coeff(j);
        if (cj.isZero(0.0)) continue;
        for (int k = -b.order(); k <= b.order(); ++k) full.coeff(j + k).noalias() += cj * b.coeff(k);
    }
    LaurentLoop out = K_full > K_cap ? full.resized(K_cap) : full;
    if (a.unimodular() && b.unimodular() && out.truncation_error() == 0.0) {
        const auto pts = circle_points(ann.r_in, 16);
        out.mark_unimodular(pts);
    }
    return out;
}

/// Pointwise inverse on the trust circles followed by re-transform.
inline LaurentLoop loop_inverse(const LaurentLoop& L, std::size_t N = 256, int K_out = -1) {
    if (K_out < 0) K_out = L.order();
    return pointwise_map(L, [](cplx, const Mat& v) { return checked_inverse(v); }, N, K_out);
}

/// d/dlambda: coefficient rule c_k -> (k+1) c_{k+1}.
inline LaurentLoop loop_dlambda(const LaurentLoop& L) {
    const int K = L.order() + 1;
    LaurentLoop out(L.dim(), K, L.annulus());
    for (int k = -L.order(); k <= L.order(); ++k)
        if (k != 0) out.coeff(k - 1) = static_cast<double>(k) * L.coeff(k);
    return out.trimmed(0.0);
}

/// Largest |fn(L(lambda))| over the samples of the trust circles.
template <class Fn>
double max_over_samples(const LaurentLoop& L, Fn&& fn, std::size_t N = 256) {
    double worst = 0.0;
    for (double r : trust_circles(L.annulus())) {
        const auto s = sample_circle(L, r, N);
        const auto pts = circle_points(r, N);
        for (std::size_t m = 0; m < N; ++m) worst = std::max(worst, fn(pts[m], s[m]));
    }
    return worst;
}

}  // namespace loopviro

#endif  // LOOPVIRO_LAURENT_LOOP_HPP
