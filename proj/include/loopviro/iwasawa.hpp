#ifndef LOOPVIRO_IWASAWA_HPP
#define LOOPVIRO_IWASAWA_HPP

#include "loopviro/core.hpp"

namespace loopviro {

struct IwasawaFactors {
    Mat u;  // unitary
    Mat r;  // upper triangular, positive real diagonal
};

/// g = u r by Gram-Schmidt on the columns of g, with one re-orthogonalization
/// pass per column to keep u unitary to working precision.
inline IwasawaFactors iwasawa_gram_schmidt(const Mat& g, double det_tol = 1e-10) {
    if (g.rows() != g.cols()) throw InvalidArgument("iwasawa_gram_schmidt: matrix must be square");
    if (std::abs(g.determinant() - 1.0) > det_tol) throw InvalidArgument("iwasawa_gram_schmidt: det g != 1");
    const auto n = g.rows();
    Mat u = Mat::Zero(n, n);
    Mat r = Mat::Zero(n, n);
    const double scale = g.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXcd v = g.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) {
                const cplx c = u.col(i).dot(v);  // conj(u_i) . v
                r(i, j) += c;
                v -= c * u.col(i);
            }
        const double norm = v.norm();
        if (norm <= 1e-14 * scale) throw InvalidArgument("iwasawa_gram_schmidt: rank-deficient matrix");
        r(j, j) = norm;
        u.col(j) = v / norm;
    }
    return {u, r};
}

}  // namespace loopviro

#endif  // LOOPVIRO_IWASAWA_HPP
