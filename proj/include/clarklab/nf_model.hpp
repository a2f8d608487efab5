#pragma once

#include <memory>
#include <vector>

#include "clarklab/charfn.hpp"

namespace clarklab {

// Truncated power series of a C^d-valued function; column k of coeffs is the k-th coefficient.
struct TaylorRep {
    CMatrix coeffs;
    double tail_bound = 0.0;

    int K() const { return static_cast<int>(coeffs.cols()) - 1; }
    int d() const { return static_cast<int>(coeffs.rows()); }
    CVector eval(cplx z) const;
    // H^2 pairing sum_k <c_k, c'_k>, linear in the second slot.
    cplx inner(const TaylorRep& other) const;
    double norm() const { return coeffs.norm(); }
    static TaylorRep zero(int d, int K) { return {CMatrix::Zero(d, K + 1), 0.0}; }
    static TaylorRep monomial(int d, int K, int k, int l);
};

struct NfTolerances {
    double inner = 1e-8;       // boundary unitarity of theta
    double tail_budget = 1e-20;  // on the squared l2 tail, i.e. 1e-10 in amplitude
    double drop = 1e-9;        // Gram-Schmidt drop threshold
    int K_max = 32768;
};

class FftConvolver;

struct InnerFunctionRep {
    std::vector<CMatrix> coeffs;  // theta_0 .. theta_K
    CMatrix theta0;
    double tail_bound = 0.0;
    double boundary_unitarity = 0.0;
    double negative_leak = 0.0;  // size of negative-frequency content (analyticity evidence)
    int N_fft = 0;
    std::shared_ptr<const FftConvolver> conv;

    int K() const { return static_cast<int>(coeffs.size()) - 1; }
    int d() const { return static_cast<int>(theta0.rows()); }
    CMatrix eval(cplx z) const;
};

// Coefficients of theta by discrete Fourier analysis on the offset boundary grid. K <= 0 selects 8n + 32;
// K is doubled until the geometric tail estimate falls below the budget.
InnerFunctionRep theta_coefficients(const CharFnEvaluator& ev, int N_fft = 0, int K = 0, const NfTolerances& tol = {});

TaylorRep project_K(const TaylorRep& h, const InnerFunctionRep& theta);
// theta * g for a TaylorRep g, truncated at K.
TaylorRep theta_times(const InnerFunctionRep& theta, const TaylorRep& g);
TaylorRep shift_up(const TaylorRep& h);  // z h, truncated

// Flattening helpers: index k * d + i.
CVector flatten(const TaylorRep& h);
TaylorRep unflatten(const CVector& v, int d);

struct ModelSpaceBasis {
    InnerFunctionRep theta;
    CMatrix V;        // (K+1) d x n, orthonormal columns
    CMatrix M;        // model operator in the basis
    CMatrix C_fun;    // (K+1) d x d, columns C e_l
    CMatrix Cs_fun;   // columns C_* e_l
    CMatrix C;        // n x d coordinates
    CMatrix Cs;
    double gram_residual = 0.0;
    double membership_residual = 0.0;  // C, C_* columns outside span(V)
    int n = 0;
    int d = 0;

    TaylorRep element(int j) const { return unflatten(V.col(j), d); }
    CVector coords(const TaylorRep& h) const { return V.adjoint() * flatten(h); }
    TaylorRep model_apply(const TaylorRep& h) const { return project_K(shift_up(h), theta); }
};

ModelSpaceBasis build_model_space(const CharFnEvaluator& ev, const NfTolerances& tol = {});

struct ModelChecks {
    double gram = 0.0;
    double model_norm_excess = 0.0;   // max(0, ||M|| - 1)
    double C_isometry = 0.0;
    double Cs_isometry = 0.0;
    double range_C = 0.0;             // projector gap Ran C vs Ran D_M
    double range_Cs = 0.0;            // projector gap Ran C_* vs Ran D_{M*}
    double intertwine = 0.0;          // M C - C_* Gamma
    double intertwine_adj = 0.0;      // M^* C_* - C Gamma^*
    double resolution = 0.0;
    double resolution_adj = 0.0;
    double projection_constant = 0.0; // P_K e - (I - theta theta(0)^*) e
    double defect_commutation = 0.0;  // (I - M M^*) f - (I - theta theta(0)^*) f(0)
    double shift_on_kernel = 0.0;     // M acts as z on the complement of Ran D_M
    double sup_C = 0.0;               // sup over grid of ||C(xi)||
    double orthogonality = 0.0;       // max |<P h, theta z^k e>| over a random h sweep
};

double model_resolution_check(const ModelSpaceBasis& b, const CMatrix& gamma, double* adjoint_residual = nullptr);
ModelChecks model_checks(const ModelSpaceBasis& b, const CMatrix& gamma, std::uint64_t seed = 7);

}  // namespace clarklab
