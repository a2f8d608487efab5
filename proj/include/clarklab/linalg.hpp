#pragma once

#include <complex>

#include <Eigen/Dense>

#include "clarklab/errors.hpp"

namespace clarklab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct Tolerances {
    double hermitian = 1e-10;
    double rank = 1e-9;
    double psd_clamp = 1e-10;
    double cond_cap = 1e12;
};

// Matrix wrapper whose Hermitian symmetry has been checked once.
class HermMatrix {
public:
    explicit HermMatrix(const CMatrix& a, double hermitian_tol = Tolerances{}.hermitian);
    const CMatrix& matrix() const { return a_; }

private:
    CMatrix a_;
};

// zero_below: eigenvalues under zero_below x (largest eigenvalue) are treated as exact zeros, which
// keeps round-off in a rank-deficient A from turning into sqrt(eps) noise.
CMatrix herm_sqrt(const HermMatrix& a, double tol = Tolerances{}.psd_clamp, double zero_below = 0.0);
// Real power of a positive definite Hermitian matrix (negative powers need strict positivity).
CMatrix herm_power(const HermMatrix& a, double alpha, double tol = Tolerances{}.psd_clamp);

CMatrix pinv(const CMatrix& a, double rank_tol = Tolerances{}.rank);

// (I_n - C D B*)^{-1} through the d x d core (I_d - D B* C).
CMatrix woodbury_inverse(const CMatrix& c, const CMatrix& d, const CMatrix& bstar,
                         double cond_cap = Tolerances{}.cond_cap);

// Solves A X = B, raising SingularCore when cond(A) exceeds the cap.
CMatrix solve_checked(const CMatrix& a, const CMatrix& b, double cond_cap = Tolerances{}.cond_cap);
CMatrix inverse_checked(const CMatrix& a, double cond_cap = Tolerances{}.cond_cap);
double condition_number(const CMatrix& a);

double op_norm(const CMatrix& a);
int numerical_rank(const CMatrix& a, double tol = Tolerances{}.rank);

// Orthonormal basis of the range, columns beyond the numerical rank dropped.
CMatrix range_basis(const CMatrix& a, double tol = Tolerances{}.rank);
// Orthonormal basis of the kernel.
CMatrix null_basis(const CMatrix& a, double tol = Tolerances{}.rank);

}  // namespace clarklab
