#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "clarklab/cauchy.hpp"
#include "clarklab/perturbation.hpp"

namespace clarklab {

enum class ThetaMethod { Resolvent, Cauchy };

class CharFnEvaluator {
public:
    CharFnEvaluator(SpectralMeasure m, ContractionParam gamma);

    const MatrixMeasure& mm() const { return mm_; }
    const SpectralMeasure& measure() const { return mm_.measure(); }
    const CMatrix& gamma() const { return gamma_.gamma; }
    const ContractionParam& gamma_param() const { return gamma_; }
    int d() const { return mm_.d(); }
    const CMatrix& D_G() const { return dg_; }
    const CMatrix& D_Gstar() const { return dgs_; }
    const CMatrix& D_G_inv() const { return dg_inv_; }
    const CMatrix& D_Gstar_inv() const { return dgs_inv_; }
    // Embedded perturbation (atomic measures only).
    const PerturbedOperator& op() const;

    CMatrix F(cplx z) const { return cauchy_eval(CauchyKind::C, mm_, z); }
    CMatrix F1(cplx z) const { return cauchy_eval(CauchyKind::C1, mm_, z); }
    CMatrix F2(cplx z) const { return cauchy_eval(CauchyKind::C2, mm_, z); }

    CMatrix theta(cplx z, ThetaMethod method = ThetaMethod::Cauchy) const;
    // Characteristic function for Gamma = 0 of the same measure.
    CMatrix theta0(cplx z) const;
    // Boundary value on the circle, by radial limit when close to an atom.
    CMatrix theta_boundary(cplx xi) const;

    CMatrix delta(cplx z) const;
    CMatrix delta_sq(cplx z) const;

private:
    MatrixMeasure mm_;
    ContractionParam gamma_;
    CMatrix dg_, dgs_, dg_inv_, dgs_inv_;
    struct LazyOp {
        std::once_flag once;
        std::optional<PerturbedOperator> value;
    };
    std::shared_ptr<LazyOp> lazy_op_ = std::make_shared<LazyOp>();  // shared by copies
};

struct ThetaZeroForms {
    CMatrix via_F1_right;  // F1 (I + F1)^{-1}
    CMatrix via_F1_left;   // (I + F1)^{-1} F1
    CMatrix via_F2_right;  // (F2 - I)(F2 + I)^{-1}
    CMatrix via_F2_left;   // (F2 + I)^{-1}(F2 - I)
    double spread = 0.0;   // max pairwise deviation
};

ThetaZeroForms theta_zero_formulas(const CharFnEvaluator& ev, cplx z);

enum class LftDirection { ZeroToGamma, GammaToZero };

struct LftResult {
    CMatrix value;        // first factored bracketing
    CMatrix alt;          // second factored bracketing
    CMatrix additive;     // additive form (ZeroToGamma only)
    CMatrix additive_alt;
    double bracket_gap = 0.0;
    double additive_gap = 0.0;
};

LftResult lft_apply(LftDirection dir, const CMatrix& theta_in, const CMatrix& gamma);

double delta_relation_check(const CharFnEvaluator& ev, cplx z);

struct AcReport {
    double max_identity_residual = 0.0;
    double min_abs_det = 0.0;               // min |det(I - theta_0)| over the grid
    std::vector<double> radial_decay;       // max ||Delta_0(r xi)||^2 over samples, per radius
    std::vector<double> radii;
    double boundary_delta_sq = 0.0;         // max ||Delta_0(xi)^2|| at boundary samples (atomic case)
};

AcReport ac_diagnose(const CharFnEvaluator& ev, const std::vector<cplx>& z_grid,
                     const std::vector<cplx>& boundary_samples = {});

// Numerical rank of Delta_0(z).
int ac_rank(const CharFnEvaluator& ev, cplx z, double tol);

}  // namespace clarklab
