#pragma once

#include <map>
#include <vector>

#include "clarklab/nf_model.hpp"

namespace clarklab {

// Values of the parametrizing functions at a point: 2d x d, top block first.
struct PsiValues {
    CMatrix C_star;
    CMatrix C1;
    double psi1_residual = 0.0;  // top-entry identity, interior points only
};

PsiValues c1_cstar_eval(const CharFnEvaluator& ev, cplx z);

// Phi^* f for fiber values f, as the analytic function (I + theta G^*) D_{G*}^{-1} F^{-1} C[B^* f mu]
// extracted on the boundary grid. K is the truncation degree of the result.
TaylorRep phi_star_nf(const CharFnEvaluator& ev, const CVector& fiber_values, int K);
// Columns for every standard basis vector of the embedded space, flattened: (K+1) d x n.
CMatrix phi_star_nf_columns(const CharFnEvaluator& ev, int K);

// Trigonometric polynomial h(xi) = sum_m h_m xi^m.
using TrigPoly = std::map<int, cplx>;

struct UniversalResult {
    TaylorRep value;
    double negative_part = 0.0;  // size of the z^{-k} coefficients, zero in exact arithmetic
};

UniversalResult phi_star_universal(const CharFnEvaluator& ev, const ModelSpaceBasis& basis, const TrigPoly& h,
                                   const CVector& a, int max_degree = 16);
// Embedded vector of h * (B a).
CVector trig_times_b(const SpectralMeasure& m, const TrigPoly& h, const CVector& a);

struct Psi2Forms {
    CMatrix tilde;      // Delta D_G^{-1} (G^* + (I - G^*) F)
    CMatrix tilde_alt;  // Delta D_G^{-1} (I - G^* theta_0) F
    double form_gap = 0.0;
};

Psi2Forms psi2_tilde(const CharFnEvaluator& ev, cplx z);
// Psi_2 = tilde Psi_2 R for a chosen right inverse R of B at the point.
CMatrix psi2_eval(const CharFnEvaluator& ev, cplx z, const CMatrix& right_inverse);

struct ClarkPair {
    CMatrix phi_star;        // n x n, embedded standard basis -> model basis
    CMatrix phi;             // adjoint
    CMatrix columns;         // raw TaylorRep columns, flattened
    double unitarity = 0.0;
    double intertwining = 0.0;
    double agreement_C = 0.0;
    double agreement_Cs = 0.0;
    double membership = 0.0;  // columns outside the model space
};

ClarkPair assemble_clark(const CharFnEvaluator& ev, const ModelSpaceBasis& basis);

struct DirectResult {
    CVector fiber_values;
    double max_est_error = 0.0;
};

DirectResult phi_direct(const CharFnEvaluator& ev, const TaylorRep& h, const BoundaryApproach& approach = {});

struct PsiSplit {
    CMatrix singular;           // 2d x npts, C1 T_pm f
    CMatrix multiplication;     // 2d x npts, Psi_pm f (zero off atoms for atomic measures)
    double total_vs_nf = 0.0;   // deviation of the total from phi_star_nf on the grid
    double psi_columns = 0.0;   // max |C_* e_k - C1 F e_k|, i.e. Psi b_k
};

PsiSplit psi_pm_split(const CharFnEvaluator& ev, const TaylorRep& phi_star_f, const CVector& fiber_values, Side side,
                      const std::vector<cplx>& grid);

struct SioBounds {
    double max_ratio_Pn = 0.0;   // max ||C1 P_n f|| / ||f||
    double max_ratio_Tr = 0.0;   // max ||C1 T_r f|| / ||f||
    std::vector<double> radial_errors;  // max |C1 T_r f - C1 T_+ f| on the grid for r -> 1-
};

SioBounds sio_bounds(const CharFnEvaluator& ev, int n_max, int n_funcs, const std::vector<double>& radii,
                     std::uint64_t seed, int N_grid = 2048);

}  // namespace clarklab
