#include "clarklab/perturbation.hpp"

#include <algorithm>
#include <Eigen/Eigenvalues>

namespace clarklab {

ContractionParam::ContractionParam(CMatrix g, double strict_margin) : gamma(std::move(g)) {
    if (gamma.rows() != gamma.cols()) throw Error(ErrorKind::DimensionMismatch, "Gamma must be square");
    const auto d = gamma.rows();
    if (op_norm(gamma) < 1.0 - strict_margin)
        cls = GammaClass::Strict;
    else if ((gamma.adjoint() * gamma - CMatrix::Identity(d, d)).norm() <= 1e-10)
        cls = GammaClass::Unitary;
    else
        cls = GammaClass::General;
}

CMatrix defect_power(const CMatrix& gamma, double alpha, bool star) {
    const auto d = gamma.rows();
    const CMatrix g = star ? CMatrix(gamma * gamma.adjoint()) : CMatrix(gamma.adjoint() * gamma);
    return herm_power(HermMatrix(CMatrix::Identity(d, d) - g), 0.5 * alpha);
}

PerturbedOperator build_T(const EmbeddedOperators& emb, const ContractionParam& gamma) {
    if (gamma.d() != emb.d) throw Error(ErrorKind::DimensionMismatch, "Gamma size differs from d");
    const auto n = emb.n;
    const auto d = emb.d;
    const CMatrix I_d = CMatrix::Identity(d, d);
    const CMatrix I_n = CMatrix::Identity(n, n);
    PerturbedOperator op{emb.U + emb.B * (gamma.gamma - I_d) * emb.B.adjoint() * emb.U, gamma, emb, {}, {}, {}, {}};
    // Clamp tiny negative eigenvalues of I - G*G for unitary or boundary Gamma.
    op.D_G = herm_sqrt(HermMatrix(I_d - gamma.gamma.adjoint() * gamma.gamma), 1e-9);
    op.D_Gstar = herm_sqrt(HermMatrix(I_d - gamma.gamma * gamma.gamma.adjoint()), 1e-9);
    op.D_T = emb.U.adjoint() * emb.B * op.D_G * emb.B.adjoint() * emb.U;
    op.D_Tstar = emb.B * op.D_Gstar * emb.B.adjoint();
    const CMatrix spec_DT = herm_sqrt(HermMatrix(I_n - op.T.adjoint() * op.T), 1e-9, 1e-13);
    const CMatrix spec_DTs = herm_sqrt(HermMatrix(I_n - op.T * op.T.adjoint()), 1e-9, 1e-13);
    op.defect_agreement = std::max(op_norm(spec_DT - op.D_T), op_norm(spec_DTs - op.D_Tstar));
    return op;
}

namespace {

// Norm of the component of Ran(A) orthogonal to the subspace spanned by the orthonormal columns Q.
double leak(const CMatrix& a, const CMatrix& q) {
    if (a.size() == 0) return 0.0;
    const CMatrix rest = a - q * (q.adjoint() * a);
    return op_norm(rest);
}

}  // namespace

DefectReport defect_report(const PerturbedOperator& op, double rank_tol) {
    DefectReport r;
    r.rank_D_T = numerical_rank(op.D_T, rank_tol);
    r.rank_D_Tstar = numerical_rank(op.D_Tstar, rank_tol);
    r.rank_D_G = numerical_rank(op.D_G, rank_tol);
    r.basis_D_T = range_basis(op.D_T, rank_tol);
    r.basis_D_Tstar = range_basis(op.D_Tstar, rank_tol);
    r.inclusion_T = leak(op.T * r.basis_D_T, r.basis_D_Tstar);
    r.inclusion_Tstar = leak(op.T.adjoint() * r.basis_D_Tstar, r.basis_D_T);
    return r;
}

CnuCertificate cnu_certificate(const PerturbedOperator& op, const SpectralMeasure& parent, double tol) {
    if (op.gamma.cls != GammaClass::Strict) throw Error(ErrorKind::GammaNotStrict, "c.n.u. certificate needs a strict Gamma");
    CnuCertificate c;
    c.cnu = star_cyclic_check(parent).cyclic;
    const auto n = op.T.rows();
    const CMatrix I = CMatrix::Identity(n, n);
    CMatrix stacked(2 * n * n, n);
    CMatrix Tk = I;
    for (Eigen::Index k = 1; k <= n; ++k) {
        Tk = op.T * Tk;
        stacked.middleRows(2 * (k - 1) * n, n) = I - Tk.adjoint() * Tk;
        stacked.middleRows((2 * k - 1) * n, n) = I - Tk * Tk.adjoint();
    }
    c.witness = null_basis(stacked, tol);
    c.direct_cnu = c.witness.cols() == 0;
    c.consistent = c.cnu == c.direct_cnu;
    return c;
}

}  // namespace clarklab

namespace clarklab {

RandomScenario random_scenario(std::uint64_t seed, const RandomScenarioSpec& spec, double max_gamma_norm, double max_rho) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        const std::uint64_t s = seed * 1000003ULL + attempt;
        RandomScenario r;
        r.seed = seed;
        r.measure = random_measure(s, spec);
        r.gamma = random_contraction(s ^ 0x9e3779b97f4a7c15ULL, r.measure.d, max_gamma_norm);
        const auto op = build_T(embed(r.measure), ContractionParam(r.gamma));
        r.spectral_radius = Eigen::ComplexEigenSolver<CMatrix>(op.T).eigenvalues().cwiseAbs().maxCoeff();
        if (r.spectral_radius <= max_rho || attempt > 1000) return r;
    }
}

}  // namespace clarklab
