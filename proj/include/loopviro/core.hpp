#ifndef LOOPVIRO_CORE_HPP
#define LOOPVIRO_CORE_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopviro {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline constexpr cplx I_unit{0.0, 1.0};
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: shape mismatch, bad sample counts, out-of-range parameters.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Evaluation requested outside the trusted annulus of a loop.
class OutsideTrust : public Error {
public:
    using Error::Error;
};

/// A loop whose sample values are singular (or too ill-conditioned) on its contour.
class NotInvertible : public Error {
public:
    using Error::Error;
};

/// Factorization iteration left the big cell or failed to converge.
class OutsideBigCell : public Error {
public:
    OutsideBigCell(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// A reality condition (HMRC, unitarity, R-reality) is violated beyond tolerance.
class RealityViolation : public Error {
public:
    using Error::Error;
};

/// A closed-form or ODE construction could not produce a valid extended solution.
class ConstructionError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Matrix helpers
// ---------------------------------------------------------------------------

/// Max absolute entry; the default matrix norm throughout the library.
inline double max_abs(const Mat& m) {
    double r = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) r = std::max(r, std::abs(m(i, j)));
    return r;
}

inline Mat identity(int n) { return Mat::Identity(n, n); }
inline Mat zeros(int n) { return Mat::Zero(n, n); }

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

/// 2-norm condition number via singular values.
inline double condition_number(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
}

/// Inverse guarded by a condition-number bound.
inline Mat checked_inverse(const Mat& m, double max_cond = 1e12) {
    if (condition_number(m) > max_cond) throw NotInvertible("loop not invertible on contour");
    return m.inverse();
}

inline Mat mat_exp(const Mat& m) { return m.exp(); }

/// Matrix logarithm by the Mercator series log(I+X) = sum (-1)^{k+1} X^k / k.
/// Requires max_abs(D - I) < 1; terms are capped at `max_terms`.
inline Mat mat_log_series(const Mat& d, int max_terms = 60) {
    const auto n = d.rows();
    const Mat x = d - Mat::Identity(n, n);
    const double xn = max_abs(x);
    if (!(xn < 1.0)) throw OutsideBigCell("log divergence: |D - I| >= 1", xn);
    Mat result = Mat::Zero(n, n);
    Mat power = x;
    for (int k = 1; k <= max_terms; ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        result += (sign / k) * power;
        if (max_abs(power) / k < 1e-18 * std::max(1.0, max_abs(result))) return result;
        power = power * x;
    }
    if (max_abs(power) / max_terms > 1e-14)
        throw OutsideBigCell("log series did not converge", xn);
    return result;
}

/// Unitary polar factor u of m = u p.
inline Mat polar_unitary(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Equally spaced points on |lambda| = r, starting at angle 0.
inline std::vector<cplx> circle_points(double r, std::size_t count) {
    std::vector<cplx> pts(count);
    for (std::size_t m = 0; m < count; ++m)
        pts[m] = std::polar(r, two_pi * static_cast<double>(m) / static_cast<double>(count));
    return pts;
}

}  // namespace loopviro

#endif  // LOOPVIRO_CORE_HPP
