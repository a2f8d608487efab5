#pragma once

#include <functional>
#include <vector>

#include "clarklab/measure.hpp"

namespace clarklab {

enum class CauchyKind { C, C1, C2 };

class MatrixMeasure {
public:
    explicit MatrixMeasure(SpectralMeasure m);

    const SpectralMeasure& measure() const { return m_; }
    int d() const { return m_.d; }
    const std::vector<CMatrix>& densities() const { return dens_; }  // M_j = B_j^* B_j
    // Fourier coefficients of the a.c. density (empty for atomic measures).
    const std::vector<std::pair<int, CMatrix>>& ac_coeffs() const { return ac_; }
    double distance_to_atoms(cplx z) const;

private:
    SpectralMeasure m_;
    std::vector<CMatrix> dens_;
    std::vector<std::pair<int, CMatrix>> ac_;
};

constexpr double kEvalGuard = 1e-8;

// Sum of kernel(xi_j, z) mu_j M_j, plus the a.c. contribution (boundary value from inside on |z| = 1).
CMatrix cauchy_eval(CauchyKind kind, const MatrixMeasure& mm, cplx z, double guard = kEvalGuard);
CMatrix poisson_eval(const MatrixMeasure& mm, cplx z, double guard = kEvalGuard);

// Scalar transform sum mu_j / (1 - conj(xi_j) z) of the atomic part.
cplx cauchy_scalar(const MatrixMeasure& mm, cplx z, double guard = kEvalGuard);
// C[B^* f mu](z) for fiber values f stacked atom by atom (atomic part only).
CVector cauchy_vector(const MatrixMeasure& mm, const CVector& f, cplx z, double guard = kEvalGuard);
// Same with kernel 1/(1 - r conj(xi) z).
CVector cauchy_vector_r(const MatrixMeasure& mm, const CVector& f, double r, cplx z);
// Moments sum mu_j xi_j^{-k} B_j^* f_j.
CVector moment(const MatrixMeasure& mm, const CVector& f, int k);

struct RegularizedMode {
    enum class Kind { Tr, Pn } kind;
    double r = 0.0;
    int n = 0;
    static RegularizedMode Tr(double r) { return {Kind::Tr, r, 0}; }
    static RegularizedMode Pn(int n) { return {Kind::Pn, 0.0, n}; }
};

// Columns are the sampled C^d values at each grid point.
CMatrix regularized_apply(const RegularizedMode& mode, const MatrixMeasure& mm, const CVector& f,
                          const std::vector<cplx>& z_grid);

enum class Side { Inside, Outside };

struct BoundaryApproach {
    Side side = Side::Inside;
    int k_min = 4;
    int k_max = 20;
    double tol = 1e-7;
    int order = 1;  // Richardson levels
};

struct BoundaryResult {
    CMatrix value;
    bool converged = false;
    double est_error = 0.0;
};

// Radial limit of g(r xi), r = 1 - 2^-k (or its reciprocal), with Richardson extrapolation in 1 - r.
BoundaryResult boundary_limit(const std::function<CMatrix(cplx)>& g, cplx xi, const BoundaryApproach& approach = {});

BoundaryResult boundary_value(const MatrixMeasure& mm, const CVector& f, cplx xi, const BoundaryApproach& approach = {});

// Limit of C[f mu] / C[mu] for scalar data f (one value per atom, scalar fibers).
BoundaryResult normalized_cauchy_limit(const MatrixMeasure& mm, const CVector& f, cplx xi,
                                       const BoundaryApproach& approach = {});

// N equispaced boundary points, rotated to stay away from the atoms.
std::vector<cplx> offset_grid(const SpectralMeasure& m, int N);
// Trapezoid L2 norm of grid samples (columns).
double grid_l2_norm(const CMatrix& samples);
// L2(mu) norm of fiber values.
double fiber_l2_norm(const SpectralMeasure& m, const CVector& f);

}  // namespace clarklab
