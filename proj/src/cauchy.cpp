#include "clarklab/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace clarklab {

MatrixMeasure::MatrixMeasure(SpectralMeasure m) : m_(std::move(m)) {
    for (const auto& a : m_.atoms) dens_.push_back(a.b_block.adjoint() * a.b_block);
    if (m_.ac) ac_ = m_.ac->density_coeffs();
}

double MatrixMeasure::distance_to_atoms(cplx z) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : m_.atoms) best = std::min(best, std::abs(z - a.point));
    return best;
}

namespace {

void guard_check(const MatrixMeasure& mm, cplx z, double guard) {
    if (mm.distance_to_atoms(z) <= guard)
        throw Error(ErrorKind::TooCloseToAtom, "evaluation point within the atom guard");
}

cplx kernel(CauchyKind kind, cplx xi, cplx z) {
    const cplx w = std::conj(xi) * z;
    switch (kind) {
        case CauchyKind::C: return 1.0 / (1.0 - w);
        case CauchyKind::C1: return w / (1.0 - w);
        case CauchyKind::C2: return (1.0 + w) / (1.0 - w);
    }
    return 0.0;
}

// Cauchy-type transform of a trigonometric polynomial density against Lebesgue measure.
CMatrix ac_transform(CauchyKind kind, const std::vector<std::pair<int, CMatrix>>& coeffs, int d, cplx z) {
    CMatrix c = CMatrix::Zero(d, d);
    CMatrix a0 = CMatrix::Zero(d, d);
    const bool inside = std::abs(z) <= 1.0 + 1e-12;
    for (const auto& [q, aq] : coeffs) {
        if (q == 0) a0 = aq;
        if (inside && q >= 1) c += std::pow(z, q) * aq;
        if (!inside && q <= -1) c -= std::pow(z, q) * aq;
    }
    // c now holds C - A_0 inside and C outside.
    const CMatrix C = inside ? CMatrix(c + a0) : c;
    switch (kind) {
        case CauchyKind::C: return C;
        case CauchyKind::C1: return C - a0;
        case CauchyKind::C2: return 2.0 * C - a0;
    }
    return C;
}

}  // namespace

CMatrix cauchy_eval(CauchyKind kind, const MatrixMeasure& mm, cplx z, double guard) {
    guard_check(mm, z, guard);
    const auto& atoms = mm.measure().atoms;
    CMatrix out = CMatrix::Zero(mm.d(), mm.d());
    for (std::size_t j = 0; j < atoms.size(); ++j)
        out += (kernel(kind, atoms[j].point, z) * atoms[j].weight) * mm.densities()[j];
    if (!mm.ac_coeffs().empty()) out += ac_transform(kind, mm.ac_coeffs(), mm.d(), z);
    return out;
}

CMatrix poisson_eval(const MatrixMeasure& mm, cplx z, double guard) {
    if (std::abs(z) >= 1.0 - guard) throw Error(ErrorKind::OutsideDisk, "Poisson extension needs |z| < 1");
    const CMatrix c2 = cauchy_eval(CauchyKind::C2, mm, z, guard);
    return 0.5 * (c2 + c2.adjoint());
}

cplx cauchy_scalar(const MatrixMeasure& mm, cplx z, double guard) {
    guard_check(mm, z, guard);
    cplx s = 0.0;
    for (const auto& a : mm.measure().atoms) s += a.weight / (1.0 - std::conj(a.point) * z);
    return s;
}

CVector cauchy_vector(const MatrixMeasure& mm, const CVector& f, cplx z, double guard) {
    guard_check(mm, z, guard);
    return cauchy_vector_r(mm, f, 1.0, z);
}

CVector cauchy_vector_r(const MatrixMeasure& mm, const CVector& f, double r, cplx z) {
    CVector out = CVector::Zero(mm.d());
    Eigen::Index off = 0;
    for (const auto& a : mm.measure().atoms) {
        out += (a.weight / (1.0 - r * std::conj(a.point) * z)) * (a.b_block.adjoint() * f.segment(off, a.fiber_dim));
        off += a.fiber_dim;
    }
    return out;
}

CVector moment(const MatrixMeasure& mm, const CVector& f, int k) {
    CVector out = CVector::Zero(mm.d());
    Eigen::Index off = 0;
    for (const auto& a : mm.measure().atoms) {
        out += (a.weight * std::pow(a.point, -k)) * (a.b_block.adjoint() * f.segment(off, a.fiber_dim));
        off += a.fiber_dim;
    }
    return out;
}

CMatrix regularized_apply(const RegularizedMode& mode, const MatrixMeasure& mm, const CVector& f,
                          const std::vector<cplx>& z_grid) {
    const auto npts = static_cast<Eigen::Index>(z_grid.size());
    CMatrix out(mm.d(), npts);
    if (mode.kind == RegularizedMode::Kind::Tr) {
        if (mode.r == 1.0 || !(mode.r >= 0.0)) throw Error(ErrorKind::BadRadius, "T_r needs r in (0, inf) minus {1}");
        for (Eigen::Index i = 0; i < npts; ++i) out.col(i) = cauchy_vector_r(mm, f, mode.r, z_grid[i]);
        return out;
    }
    const int lo = mode.n >= 0 ? 0 : mode.n;
    const int hi = mode.n >= 0 ? mode.n : -1;
    std::vector<CVector> moments;
    for (int k = lo; k <= hi; ++k) moments.push_back(moment(mm, f, k));
    for (Eigen::Index i = 0; i < npts; ++i) {
        CVector s = CVector::Zero(mm.d());
        for (int k = lo; k <= hi; ++k) s += std::pow(z_grid[i], k) * moments[k - lo];
        out.col(i) = s;
    }
    return out;
}

BoundaryResult boundary_limit(const std::function<CMatrix(cplx)>& g, cplx xi, const BoundaryApproach& ap) {
    BoundaryResult res;
    // table[l] holds the latest level-l extrapolant; level l removes the (1 - r)^l error term
    std::vector<CMatrix> table;
    int filled = 0;
    for (int k = ap.k_min; k <= ap.k_max; ++k) {
        const double r_in = 1.0 - std::ldexp(1.0, -k);
        const double r = ap.side == Side::Inside ? r_in : 1.0 / r_in;
        CMatrix cur = g(r * xi);
        const int levels = std::min(filled, ap.order);
        std::vector<CMatrix> next{cur};
        for (int l = 1; l <= levels; ++l) {
            const double w = std::ldexp(1.0, l);
            next.push_back((w * next[l - 1] - table[l - 1]) / (w - 1.0));
        }
        if (levels == ap.order && filled > ap.order) {
            const double diff = (next[ap.order] - table[ap.order]).norm();
            res.value = next[ap.order];
            res.est_error = diff;
            if (diff <= ap.tol * std::max(1.0, res.value.norm())) {
                res.converged = true;
                return res;
            }
        }
        table = std::move(next);
        ++filled;
    }
    return res;
}

BoundaryResult boundary_value(const MatrixMeasure& mm, const CVector& f, cplx xi, const BoundaryApproach& ap) {
    auto res = boundary_limit([&](cplx z) -> CMatrix { return cauchy_vector(mm, f, z); }, xi, ap);
    if (!res.converged) throw Error(ErrorKind::NoConvergence, "radial limit of the Cauchy transform");
    return res;
}

BoundaryResult normalized_cauchy_limit(const MatrixMeasure& mm, const CVector& f, cplx xi, const BoundaryApproach& ap) {
    const auto& atoms = mm.measure().atoms;
    auto g = [&](cplx z) -> CMatrix {
        cplx num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < atoms.size(); ++j) {
            const cplx k = atoms[j].weight / (1.0 - std::conj(atoms[j].point) * z);
            num += k * f(static_cast<Eigen::Index>(j));
            den += k;
        }
        CMatrix out(1, 1);
        out(0, 0) = num / den;
        return out;
    };
    auto res = boundary_limit(g, xi, ap);
    if (!res.converged) throw Error(ErrorKind::NoConvergence, "radial limit of the normalized Cauchy transform");
    return res;
}

std::vector<cplx> offset_grid(const SpectralMeasure& m, int N) {
    const double h = 2 * std::numbers::pi / N;
    auto min_dist = [&](double phi) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : m.atoms) {
            double t = std::fmod(std::arg(a.point) - phi, h);
            if (t < 0) t += h;
            best = std::min(best, std::min(t, h - t));
        }
        return best;
    };
    double phi = 0.5 * h;
    if (min_dist(phi) < 0.25 * h) {
        double best = min_dist(phi);
        for (int s = 0; s < 64; ++s) {
            const double cand = h * s / 64.0;
            const double dist = min_dist(cand);
            if (dist > best) {
                best = dist;
                phi = cand;
            }
        }
    }
    std::vector<cplx> pts(N);
    for (int k = 0; k < N; ++k) pts[k] = std::polar(1.0, phi + h * k);
    return pts;
}

double grid_l2_norm(const CMatrix& samples) {
    if (samples.cols() == 0) return 0.0;
    return std::sqrt(samples.squaredNorm() / static_cast<double>(samples.cols()));
}

double fiber_l2_norm(const SpectralMeasure& m, const CVector& f) {
    return fiber_to_embedded(m, f).norm();
}

}  // namespace clarklab
