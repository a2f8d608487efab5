#include "clarklab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace clarklab {

HermMatrix::HermMatrix(const CMatrix& a, double hermitian_tol) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "Hermitian matrix must be square");
    const double scale = std::max(1.0, a.norm());
    if ((a - a.adjoint()).norm() > hermitian_tol * scale)
        throw Error(ErrorKind::NotHermitian, "symmetry residual above tolerance");
    a_ = 0.5 * (a + a.adjoint());
}

namespace {

Eigen::SelfAdjointEigenSolver<CMatrix> eig(const HermMatrix& a) {
    return Eigen::SelfAdjointEigenSolver<CMatrix>(a.matrix());
}

}  // namespace

CMatrix herm_sqrt(const HermMatrix& a, double tol, double zero_below) {
    if (a.matrix().size() == 0) return a.matrix();
    auto es = eig(a);
    Eigen::VectorXd ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -tol * scale) throw Error(ErrorKind::NotPSD, "eigenvalue " + std::to_string(ev(i)));
        ev(i) = ev(i) <= zero_below * scale ? 0.0 : std::sqrt(ev(i));
    }
    const CMatrix& v = es.eigenvectors();
    return v * ev.cast<cplx>().asDiagonal() * v.adjoint();
}

CMatrix herm_power(const HermMatrix& a, double alpha, double tol) {
    if (alpha == 0.5) return herm_sqrt(a, tol);
    auto es = eig(a);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (alpha < 0 && ev(i) <= tol) throw Error(ErrorKind::NotPSD, "negative power of a singular matrix");
        if (ev(i) < -tol) throw Error(ErrorKind::NotPSD, "eigenvalue " + std::to_string(ev(i)));
        ev(i) = std::pow(std::max(ev(i), 0.0), alpha);
    }
    const CMatrix& v = es.eigenvectors();
    return v * ev.cast<cplx>().asDiagonal() * v.adjoint();
}

CMatrix pinv(const CMatrix& a, double rank_tol) {
    if (a.size() == 0) return CMatrix::Zero(a.cols(), a.rows());
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cut = rank_tol * (s.size() ? s(0) : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut && s(i) > 0) inv(i) = 1.0 / s(i);
    return svd.matrixV() * inv.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
}

double condition_number(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double smin = s(s.size() - 1);
    return smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

CMatrix solve_checked(const CMatrix& a, const CMatrix& b, double cond_cap) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw Error(ErrorKind::DimensionMismatch, "solve_checked shapes");
    const double kappa = condition_number(a);
    if (!(kappa <= cond_cap)) throw Error(ErrorKind::SingularCore, "condition number " + std::to_string(kappa));
    return a.partialPivLu().solve(b);
}

CMatrix inverse_checked(const CMatrix& a, double cond_cap) {
    return solve_checked(a, CMatrix::Identity(a.rows(), a.cols()), cond_cap);
}

CMatrix woodbury_inverse(const CMatrix& c, const CMatrix& d, const CMatrix& bstar, double cond_cap) {
    const auto n = c.rows();
    const auto k = d.rows();
    if (c.cols() != k || d.cols() != k || bstar.rows() != k || bstar.cols() != n)
        throw Error(ErrorKind::DimensionMismatch, "woodbury_inverse shapes");
    const CMatrix db = d * bstar;
    const CMatrix core = CMatrix::Identity(k, k) - db * c;
    return CMatrix::Identity(n, n) + c * solve_checked(core, db, cond_cap);
}

double op_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

int numerical_rank(const CMatrix& a, double tol) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& s = svd.singularValues();
    const double cut = tol * s(0);
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut) ++r;
    return r;
}

CMatrix range_basis(const CMatrix& a, double tol) {
    if (a.size() == 0) return CMatrix(a.rows(), 0);
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU);
    const int r = numerical_rank(a, tol);
    return svd.matrixU().leftCols(r);
}

CMatrix null_basis(const CMatrix& a, double tol) {
    if (a.rows() == 0) return CMatrix::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(s(0), 1.0);
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut) ++r;
    return svd.matrixV().rightCols(a.cols() - r);
}

}  // namespace clarklab
