#include "clarklab/charfn.hpp"

#include <algorithm>
#include <cmath>

namespace clarklab {

CharFnEvaluator::CharFnEvaluator(SpectralMeasure m, ContractionParam gamma)
    : mm_(std::move(m)), gamma_(std::move(gamma)) {
    if (gamma_.cls != GammaClass::Strict) throw Error(ErrorKind::GammaNotStrict, "evaluator needs a strict Gamma");
    if (gamma_.d() != mm_.d()) throw Error(ErrorKind::DimensionMismatch, "Gamma size differs from d");
    dg_ = defect_power(gamma_.gamma, 1.0, false);
    dgs_ = defect_power(gamma_.gamma, 1.0, true);
    dg_inv_ = defect_power(gamma_.gamma, -1.0, false);
    dgs_inv_ = defect_power(gamma_.gamma, -1.0, true);
}

const PerturbedOperator& CharFnEvaluator::op() const {
    if (!mm_.measure().purely_atomic()) throw Error(ErrorKind::NotInner, "embedded operator needs a purely atomic measure");
    // built on first use: quadrature stand-ins have thousands of atoms and rarely need it
    std::call_once(lazy_op_->once, [this] { lazy_op_->value.emplace(build_T(embed(mm_.measure()), gamma_)); });
    return *lazy_op_->value;
}

CMatrix CharFnEvaluator::theta(cplx z, ThetaMethod method) const {
    const auto d = this->d();
    const CMatrix I = CMatrix::Identity(d, d);
    if (method == ThetaMethod::Resolvent) {
        if (std::abs(z) >= 1.0) throw Error(ErrorKind::OutsideDisk, "resolvent formula is used inside the disk");
        const auto& p = op();
        const auto n = p.T.rows();
        const CMatrix res = solve_checked(CMatrix::Identity(n, n) - z * p.T.adjoint(), p.D_T);
        const CMatrix& U = p.parent.U;
        const CMatrix& B = p.parent.B;
        return B.adjoint() * (-p.T + z * p.D_Tstar * res) * U.adjoint() * B;
    }
    const CMatrix f1 = F1(z);
    const CMatrix core = I - (gamma().adjoint() - I) * f1;
    return -gamma() + dgs_ * f1 * solve_checked(core, dg_);
}

CMatrix CharFnEvaluator::theta0(cplx z) const {
    const CMatrix f1 = F1(z);
    return solve_checked((CMatrix::Identity(d(), d()) + f1).transpose(), f1.transpose()).transpose();
}

CMatrix CharFnEvaluator::theta_boundary(cplx xi) const {
    if (mm_.distance_to_atoms(xi) > 1e-6) return theta(xi);
    auto res = boundary_limit([&](cplx z) -> CMatrix { return theta(z); }, xi);
    if (!res.converged) throw Error(ErrorKind::NoConvergence, "radial limit of theta");
    return res.value;
}

CMatrix CharFnEvaluator::delta_sq(cplx z) const {
    const CMatrix th = std::abs(std::abs(z) - 1.0) < 1e-14 ? theta_boundary(z) : theta(z);
    return CMatrix::Identity(d(), d()) - th.adjoint() * th;
}

CMatrix CharFnEvaluator::delta(cplx z) const { return herm_sqrt(HermMatrix(delta_sq(z)), 1e-9, 1e-13); }

ThetaZeroForms theta_zero_formulas(const CharFnEvaluator& ev, cplx z) {
    const auto d = ev.d();
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix f1 = ev.F1(z);
    const CMatrix f2 = ev.F2(z);
    ThetaZeroForms t;
    t.via_F1_right = f1 * inverse_checked(I + f1);
    t.via_F1_left = solve_checked(I + f1, f1);
    t.via_F2_right = (f2 - I) * inverse_checked(f2 + I);
    t.via_F2_left = solve_checked(f2 + I, f2 - I);
    const CMatrix* all[] = {&t.via_F1_right, &t.via_F1_left, &t.via_F2_right, &t.via_F2_left};
    for (auto* a : all)
        for (auto* b : all) t.spread = std::max(t.spread, op_norm(*a - *b));
    return t;
}

LftResult lft_apply(LftDirection dir, const CMatrix& th, const CMatrix& g) {
    const auto d = g.rows();
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix dg = defect_power(g, 1.0, false);
    const CMatrix dgs = defect_power(g, 1.0, true);
    const CMatrix dg_inv = defect_power(g, -1.0, false);
    const CMatrix dgs_inv = defect_power(g, -1.0, true);
    const CMatrix gs = g.adjoint();
    LftResult r;
    if (dir == LftDirection::ZeroToGamma) {
        r.value = dgs_inv * (th - g) * inverse_checked(I - gs * th) * dg;
        r.alt = dgs * inverse_checked(I - th * gs) * (th - g) * dg_inv;
        r.additive = -g + dgs * th * inverse_checked(I - gs * th) * dg;
        r.additive_alt = -g + dgs * inverse_checked(I - th * gs) * th * dg;
        r.additive_gap = std::max(op_norm(r.additive - r.value), op_norm(r.additive_alt - r.value));
    } else {
        r.value = dgs * inverse_checked(I + th * gs) * (th + g) * dg_inv;
        r.alt = dgs_inv * (th + g) * inverse_checked(I + gs * th) * dg;
        r.additive = r.value;
        r.additive_alt = r.alt;
    }
    r.bracket_gap = op_norm(r.value - r.alt);
    return r;
}

double delta_relation_check(const CharFnEvaluator& ev, cplx z) {
    const auto d = ev.d();
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix& g = ev.gamma();
    const CMatrix th0 = ev.theta0(z);
    const CMatrix d0sq = I - th0.adjoint() * th0;
    const CMatrix left = solve_checked((I - th0.adjoint() * g).adjoint(), ev.D_G()).adjoint();  // D_G (I - th0* G)^{-1}
    const CMatrix right = solve_checked(I - g.adjoint() * th0, ev.D_G());
    return op_norm(ev.delta_sq(z) - left * d0sq * right);
}

AcReport ac_diagnose(const CharFnEvaluator& ev, const std::vector<cplx>& z_grid,
                     const std::vector<cplx>& boundary_samples) {
    const auto d = ev.d();
    const CMatrix I = CMatrix::Identity(d, d);
    AcReport r;
    r.min_abs_det = std::numeric_limits<double>::infinity();
    for (cplx z : z_grid) {
        const CMatrix th0 = ev.theta0(z);
        const CMatrix P = poisson_eval(ev.mm(), z);
        const CMatrix lhs = (I - th0.adjoint()) * P * (I - th0);
        r.max_identity_residual = std::max(r.max_identity_residual, op_norm(lhs - (I - th0.adjoint() * th0)));
        r.min_abs_det = std::min(r.min_abs_det, std::abs((I - th0).determinant()));
    }
    if (!boundary_samples.empty()) {
        for (int k = 2; k <= 20; k += 3) {
            const double rad = 1.0 - std::ldexp(1.0, -k);
            double worst = 0.0;
            for (cplx xi : boundary_samples) {
                const CMatrix th0 = ev.theta0(rad * xi);
                worst = std::max(worst, op_norm(I - th0.adjoint() * th0));
            }
            r.radii.push_back(rad);
            r.radial_decay.push_back(worst);
        }
        for (cplx xi : boundary_samples) {
            const CMatrix th0 = ev.theta0(xi);
            r.boundary_delta_sq = std::max(r.boundary_delta_sq, op_norm(I - th0.adjoint() * th0));
        }
    }
    return r;
}

int ac_rank(const CharFnEvaluator& ev, cplx z, double tol) {
    const CMatrix th0 = ev.theta0(z);
    const CMatrix dsq = CMatrix::Identity(ev.d(), ev.d()) - th0.adjoint() * th0;
    const CMatrix delta = herm_sqrt(HermMatrix(dsq), 1e-9);
    // Absolute threshold: Delta_0 is a contraction, so its scale is fixed.
    Eigen::JacobiSVD<CMatrix> svd(delta);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    return r;
}

}  // namespace clarklab
