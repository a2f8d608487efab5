#include "clarklab/clark.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>

namespace clarklab {

namespace {

bool on_circle(cplx z) { return std::abs(std::abs(z) - 1.0) < 1e-12; }

CMatrix theta_at(const CharFnEvaluator& ev, cplx z) { return on_circle(z) ? ev.theta_boundary(z) : ev.theta(z); }

int next_pow2(int x) {
    int p = 1;
    while (p < x) p *= 2;
    return p;
}

}  // namespace

PsiValues c1_cstar_eval(const CharFnEvaluator& ev, cplx z) {
    const auto d = ev.d();
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix& g = ev.gamma();
    const CMatrix th = theta_at(ev, z);
    const CMatrix delta = ev.delta(z);
    PsiValues p;
    p.C_star.resize(2 * d, d);
    p.C_star.topRows(d) = (I + th * g.adjoint()) * ev.D_Gstar_inv();
    p.C_star.bottomRows(d) = delta * g.adjoint() * ev.D_Gstar_inv();
    p.C1.resize(2 * d, d);
    p.C1.topRows(d) = ev.D_Gstar_inv() * (I - g) + th * ev.D_G_inv() * (g.adjoint() - I);
    p.C1.bottomRows(d) = delta * ev.D_G_inv() * (g.adjoint() - I);
    if (std::abs(z) < 1.0) p.psi1_residual = op_norm(p.C_star.topRows(d) - p.C1.topRows(d) * ev.F(z));
    return p;
}

CMatrix phi_star_nf_columns(const CharFnEvaluator& ev, int K) {
    const SpectralMeasure& m = ev.measure();
    if (!m.purely_atomic() || m.tag == "ac-approximation")
        throw Error(ErrorKind::NotInner, "the adjoint Clark operator is realized for purely singular measures only");
    const auto d = ev.d();
    const auto& emb = ev.op().parent;
    const int n = emb.n;
    const int N = next_pow2(4 * (K + 1));
    const auto grid = offset_grid(m, N);
    const double phi = std::arg(grid[0]);
    std::vector<int> atom_of(n);
    for (std::size_t j = 0; j < m.atoms.size(); ++j)
        for (int i = 0; i < m.atoms[j].fiber_dim; ++i) atom_of[emb.offsets[j] + i] = static_cast<int>(j);

    // samples[c * d + i][k]: component i of column c at grid point k
    std::vector<std::vector<cplx>> samples(static_cast<std::size_t>(n * d), std::vector<cplx>(N));
    const CMatrix I = CMatrix::Identity(d, d);
    for (int k = 0; k < N; ++k) {
        const cplx xi = grid[k];
        const CMatrix th = ev.theta_boundary(xi);
        const CMatrix G = (I + th * ev.gamma().adjoint()) * ev.D_Gstar_inv() * inverse_checked(ev.F(xi));
        for (int c = 0; c < n; ++c) {
            const cplx ker = 1.0 / (1.0 - std::conj(m.atoms[atom_of[c]].point) * xi);
            const CVector col = ker * (G * emb.B.row(c).adjoint());
            for (int i = 0; i < d; ++i) samples[c * d + i][k] = col(i);
        }
    }
    Eigen::FFT<double> fft;
    CMatrix out(static_cast<Eigen::Index>(d) * (K + 1), n);
    std::vector<cplx> spec;
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < d; ++i) {
            fft.fwd(spec, samples[c * d + i]);
            for (int q = 0; q <= K; ++q) out(static_cast<Eigen::Index>(q) * d + i, c) = std::polar(1.0 / N, -phi * q) * spec[q];
        }
    return out;
}

TaylorRep phi_star_nf(const CharFnEvaluator& ev, const CVector& fiber_values, int K) {
    const CVector x = fiber_to_embedded(ev.measure(), fiber_values);
    return unflatten(phi_star_nf_columns(ev, K) * x, ev.d());
}

CVector trig_times_b(const SpectralMeasure& m, const TrigPoly& h, const CVector& a) {
    CVector out(m.total_dim());
    Eigen::Index off = 0;
    for (const auto& at : m.atoms) {
        cplx hv = 0.0;
        for (const auto& [deg, c] : h) hv += c * std::pow(at.point, deg);
        out.segment(off, at.fiber_dim) = hv * std::sqrt(at.weight) * (at.b_block * a);
        off += at.fiber_dim;
    }
    return out;
}

UniversalResult phi_star_universal(const CharFnEvaluator& ev, const ModelSpaceBasis& basis, const TrigPoly& h,
                                   const CVector& a, int max_degree) {
    const int d = ev.d();
    const int K = basis.theta.K();
    const int L = max_degree;
    for (const auto& t : h)
        if (std::abs(t.first) > L) throw Error(ErrorKind::UnsupportedTestFunction, "degree beyond the supported range");
    const auto& atoms = ev.measure().atoms;
    const auto& dens = ev.mm().densities();
    auto mom = [&](int q) {
        CVector v = CVector::Zero(d);
        for (std::size_t j = 0; j < atoms.size(); ++j) v += atoms[j].weight * std::pow(atoms[j].point, q) * (dens[j] * a);
        return v;
    };
    // Difference-quotient integral as a Laurent polynomial, index t + L.
    std::vector<CVector> G(2 * L, CVector::Zero(d));
    for (const auto& [m, hm] : h) {
        if (m > 0)
            for (int k = 0; k < m; ++k) G[k + L] += hm * mom(m - k);
        else if (m < 0)
            for (int j = 1; j <= -m; ++j) G[-j + L] -= hm * mom(-(-m - j));
    }
    auto Cs_k = [&](int k) -> CMatrix { return basis.Cs_fun.middleRows(static_cast<Eigen::Index>(k) * d, d); };
    auto C1_k = [&](int k) -> CMatrix {
        CMatrix c = Cs_k(k);
        if (k >= 1) c -= basis.C_fun.middleRows(static_cast<Eigen::Index>(k - 1) * d, d);
        return c;
    };
    const int lo = -L, hi = K + L;
    std::vector<CVector> acc(static_cast<std::size_t>(hi - lo + 1), CVector::Zero(d));
    for (int k = 0; k <= K; ++k) {
        const CVector csa = Cs_k(k) * a;
        for (const auto& [m, hm] : h) acc[m + k - lo] += hm * csa;
        const CMatrix c1 = C1_k(k);
        for (int t = -L; t < L; ++t)
            if (G[t + L].squaredNorm() > 0) acc[t + k - lo] += c1 * G[t + L];
    }
    UniversalResult r;
    r.value = TaylorRep::zero(d, K);
    for (int k = 0; k <= K; ++k) r.value.coeffs.col(k) = acc[k - lo];
    for (int k = lo; k < 0; ++k) r.negative_part = std::max(r.negative_part, acc[k - lo].norm());
    return r;
}

Psi2Forms psi2_tilde(const CharFnEvaluator& ev, cplx z) {
    const auto d = ev.d();
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix gs = ev.gamma().adjoint();
    const CMatrix F = ev.F(z);
    const CMatrix th0 = ev.theta0(z);
    const CMatrix pre = ev.delta(z) * ev.D_G_inv();
    Psi2Forms p;
    p.tilde = pre * (gs + (I - gs) * F);
    p.tilde_alt = pre * (I - gs * th0) * F;
    p.form_gap = op_norm(p.tilde - p.tilde_alt);
    return p;
}

CMatrix psi2_eval(const CharFnEvaluator& ev, cplx z, const CMatrix& right_inverse) {
    return psi2_tilde(ev, z).tilde * right_inverse;
}

ClarkPair assemble_clark(const CharFnEvaluator& ev, const ModelSpaceBasis& basis) {
    ClarkPair c;
    const auto& p = ev.op();
    const int n = basis.n;
    c.columns = phi_star_nf_columns(ev, basis.theta.K());
    c.phi_star = basis.V.adjoint() * c.columns;
    c.phi = c.phi_star.adjoint();
    c.membership = op_norm(c.columns - basis.V * c.phi_star);
    c.unitarity = op_norm(c.phi_star.adjoint() * c.phi_star - CMatrix::Identity(n, n));
    c.intertwining = op_norm(c.phi_star * p.T - basis.M * c.phi_star);
    c.agreement_C = op_norm(c.phi_star * p.parent.U.adjoint() * p.parent.B - basis.C);
    c.agreement_Cs = op_norm(c.phi_star * p.parent.B - basis.Cs);
    return c;
}

DirectResult phi_direct(const CharFnEvaluator& ev, const TaylorRep& h, const BoundaryApproach& approach) {
    const SpectralMeasure& m = ev.measure();
    const auto& emb = ev.op().parent;
    const auto d = ev.d();
    const CMatrix I = CMatrix::Identity(d, d);
    DirectResult r;
    r.fiber_values = CVector::Zero(emb.n);
    for (std::size_t j = 0; j < m.atoms.size(); ++j) {
        const CMatrix Rstar = emb.R[j].adjoint();
        auto g = [&](cplx z) -> CMatrix {
            const CMatrix th = ev.theta(z);
            const CVector v = ev.D_Gstar() * solve_checked(I + th * ev.gamma().adjoint(), h.eval(z));
            return Rstar * (ev.F(z) * v) / cauchy_scalar(ev.mm(), z);
        };
        const auto lim = boundary_limit(g, m.atoms[j].point, approach);
        if (!lim.converged) throw Error(ErrorKind::NoConvergence, "radial limit at atom " + std::to_string(j));
        r.fiber_values.segment(emb.offsets[j], m.atoms[j].fiber_dim) = lim.value.col(0);
        r.max_est_error = std::max(r.max_est_error, lim.est_error);
    }
    return r;
}

PsiSplit psi_pm_split(const CharFnEvaluator& ev, const TaylorRep& phi_star_f, const CVector& fiber_values, Side side,
                      const std::vector<cplx>& grid) {
    const auto d = ev.d();
    const auto npts = static_cast<Eigen::Index>(grid.size());
    PsiSplit s;
    s.singular.resize(2 * d, npts);
    s.multiplication = CMatrix::Zero(2 * d, npts);
    BoundaryApproach ap;
    ap.side = side;
    ap.tol = 1e-10;  // grid points sit away from the atoms, so a tighter stop is reachable
    ap.order = 2;
    for (Eigen::Index k = 0; k < npts; ++k) {
        const cplx xi = grid[k];
        const PsiValues pv = c1_cstar_eval(ev, xi);
        const CVector tf = boundary_value(ev.mm(), fiber_values, xi, ap).value.col(0);
        s.singular.col(k) = pv.C1 * tf;
        CVector expected = CVector::Zero(2 * d);
        expected.head(d) = phi_star_f.eval(xi);
        s.total_vs_nf = std::max(s.total_vs_nf, (s.singular.col(k) + s.multiplication.col(k) - expected).norm());
        auto Fside = boundary_limit([&](cplx z) -> CMatrix { return ev.F(z); }, xi, ap);
        if (!Fside.converged) throw Error(ErrorKind::NoConvergence, "radial limit of F");
        s.psi_columns = std::max(s.psi_columns, op_norm(pv.C_star - pv.C1 * Fside.value));
    }
    return s;
}

SioBounds sio_bounds(const CharFnEvaluator& ev, int n_max, int n_funcs, const std::vector<double>& radii,
                     std::uint64_t seed, int N_grid) {
    const SpectralMeasure& m = ev.measure();
    const auto d = ev.d();
    const int n = m.total_dim();
    const auto grid = offset_grid(m, N_grid);
    std::vector<CMatrix> C1(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) C1[k] = c1_cstar_eval(ev, grid[k]).C1;
    const MatrixMeasure& mm = ev.mm();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    SioBounds out;
    const std::vector<int> radial_k = {4, 8, 12, 16, 20};
    out.radial_errors.assign(radial_k.size(), 0.0);
    for (int t = 0; t < n_funcs; ++t) {
        CVector f(n);
        for (int i = 0; i < n; ++i) f(i) = cplx(g(rng), g(rng));
        const double fn = fiber_l2_norm(m, f);
        for (int sign : {1, -1}) {
            std::vector<CVector> S(grid.size(), CVector::Zero(d));
            const int start = sign > 0 ? 0 : -1;
            for (int nn = start; std::abs(nn) <= n_max; nn += sign) {
                const CVector mo = moment(mm, f, nn);
                double sq = 0.0;
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    S[k] += std::pow(grid[k], nn) * mo;
                    sq += (C1[k] * S[k]).squaredNorm();
                }
                out.max_ratio_Pn = std::max(out.max_ratio_Pn, std::sqrt(sq / grid.size()) / fn);
            }
        }
        for (double r : radii) {
            double sq = 0.0;
            for (std::size_t k = 0; k < grid.size(); ++k) sq += (C1[k] * cauchy_vector_r(mm, f, r, grid[k])).squaredNorm();
            out.max_ratio_Tr = std::max(out.max_ratio_Tr, std::sqrt(sq / grid.size()) / fn);
        }
        if (t < 5) {
            for (std::size_t q = 0; q < radial_k.size(); ++q) {
                const double r = 1.0 - std::ldexp(1.0, -radial_k[q]);
                for (std::size_t k = 0; k < grid.size(); k += 8) {
                    const CVector diff = cauchy_vector_r(mm, f, r, grid[k]) - cauchy_vector(mm, f, grid[k]);
                    out.radial_errors[q] = std::max(out.radial_errors[q], (C1[k] * diff).norm() / fn);
                }
            }
        }
    }
    return out;
}

}  // namespace clarklab
