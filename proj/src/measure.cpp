#include "clarklab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace clarklab {

CMatrix AcDensity::eval(cplx xi) const {
    CMatrix out = CMatrix::Zero(fiber_dim, d);
    for (const auto& [k, beta] : terms) out += std::pow(xi, k) * beta;
    return out;
}

int AcDensity::degree_span() const {
    int lo = 0, hi = 0;
    for (const auto& t : terms) {
        lo = std::min(lo, t.first);
        hi = std::max(hi, t.first);
    }
    return hi - lo;
}

std::vector<std::pair<int, CMatrix>> AcDensity::density_coeffs() const {
    std::map<int, CMatrix> acc;
    for (const auto& [k, bk] : terms)
        for (const auto& [l, bl] : terms) {
            auto [it, inserted] = acc.try_emplace(l - k, CMatrix::Zero(d, d));
            it->second += bk.adjoint() * bl;
        }
    return {acc.begin(), acc.end()};
}

int SpectralMeasure::total_dim() const {
    int n = 0;
    for (const auto& a : atoms) n += a.fiber_dim;
    return n;
}

ValidationReport validate(const SpectralMeasure& m, const MeasureTolerances& tol) {
    ValidationReport r;
    CMatrix gram = CMatrix::Zero(m.d, m.d);
    for (std::size_t j = 0; j < m.atoms.size(); ++j) {
        const Atom& a = m.atoms[j];
        if (std::abs(std::abs(a.point) - 1.0) > tol.unit) {
            r.unit_modulus = false;
            r.messages.push_back("atom " + std::to_string(j) + " is off the unit circle");
        }
        if (!(a.weight > 0)) {
            r.positive = false;
            r.messages.push_back("atom " + std::to_string(j) + " has non-positive weight");
        }
        if (a.fiber_dim < 1 || a.b_block.rows() != a.fiber_dim || a.b_block.cols() != m.d) {
            r.shapes = false;
            r.messages.push_back("atom " + std::to_string(j) + " has an inconsistent b_block");
            continue;
        }
        gram += a.weight * a.b_block.adjoint() * a.b_block;
        r.mass += a.weight;
    }
    if (m.ac) {
        if (m.ac->d != m.d) {
            r.shapes = false;
            r.messages.push_back("a.c. density has the wrong column count");
        } else {
            for (const auto& [q, aq] : m.ac->density_coeffs())
                if (q == 0) gram += aq;
        }
    }
    r.isometry_residual = op_norm(gram - CMatrix::Identity(m.d, m.d));
    if (r.isometry_residual > tol.iso) r.messages.push_back("isometry residual above tolerance");

    r.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.atoms.size(); ++i)
        for (std::size_t j = i + 1; j < m.atoms.size(); ++j)
            r.min_separation = std::min(r.min_separation, std::abs(m.atoms[i].point - m.atoms[j].point));
    if (r.min_separation <= tol.distinct) {
        r.distinct = false;
        r.messages.push_back("atoms are not pairwise distinct");
    }
    const bool mass_ok = m.ac ? true : r.mass <= 1.0 + tol.mass;
    if (!mass_ok) r.messages.push_back("total atomic mass exceeds one");
    r.pass = r.unit_modulus && r.positive && r.shapes && r.distinct && mass_ok && r.isometry_residual <= tol.iso;
    return r;
}

StarCyclicResult star_cyclic_check(const SpectralMeasure& m, double rank_tol) {
    StarCyclicResult r;
    for (std::size_t j = 0; j < m.atoms.size(); ++j) {
        const Atom& a = m.atoms[j];
        if (numerical_rank(a.b_block, rank_tol) != a.fiber_dim) {
            r.cyclic = false;
            r.failing_atoms.push_back(static_cast<int>(j));
        }
    }
    return r;
}

bool is_cyclic_vector(const SpectralMeasure& m, const CVector& alpha, double tol) {
    for (const auto& a : m.atoms) {
        const double scale = std::max(op_norm(a.b_block) * alpha.norm(), 1e-300);
        if ((a.b_block * alpha).norm() <= tol * scale) return false;
    }
    return true;
}

namespace {

CVector gaussian_vector(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> g;
    CVector v(d);
    for (int i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
    return v;
}

CMatrix gaussian_matrix(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g;
    CMatrix a(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) a(i, j) = cplx(g(rng), g(rng));
    return a;
}

}  // namespace

CVector random_cyclic_vector(const SpectralMeasure& m, std::uint64_t seed, int max_retries) {
    for (const auto& a : m.atoms)
        if (a.fiber_dim != 1) throw Error(ErrorKind::NotScalarFibers, "cyclic vectors need one-dimensional fibers");
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        CVector alpha = gaussian_vector(rng, m.d);
        if (is_cyclic_vector(m, alpha)) return alpha;
    }
    throw Error(ErrorKind::ExhaustedRetries, "no cyclic vector found");
}

EmbeddedOperators embed(const SpectralMeasure& m) {
    EmbeddedOperators e;
    e.d = m.d;
    e.n = m.total_dim();
    e.U = CMatrix::Zero(e.n, e.n);
    e.B = CMatrix::Zero(e.n, e.d);
    int off = 0;
    for (const auto& a : m.atoms) {
        e.offsets.push_back(off);
        for (int i = 0; i < a.fiber_dim; ++i) e.U(off + i, off + i) = a.point;
        e.B.block(off, 0, a.fiber_dim, e.d) = std::sqrt(a.weight) * a.b_block;
        e.R.push_back(pinv(a.b_block));
        off += a.fiber_dim;
    }
    return e;
}

int orbit_span_rank(const CMatrix& U, const CMatrix& B, double tol) {
    const auto n = U.rows();
    const auto d = B.cols();
    CMatrix stacked(n, (2 * n + 1) * d);
    CMatrix fwd = B, bwd = B;
    stacked.leftCols(d) = B;
    for (Eigen::Index k = 1; k <= n; ++k) {
        fwd = U * fwd;
        bwd = U.adjoint() * bwd;
        stacked.middleCols((2 * k - 1) * d, d) = fwd;
        stacked.middleCols(2 * k * d, d) = bwd;
    }
    return numerical_rank(stacked, tol);
}

CVector fiber_to_embedded(const SpectralMeasure& m, const CVector& f) {
    CVector out(f.size());
    Eigen::Index off = 0;
    for (const auto& a : m.atoms) {
        out.segment(off, a.fiber_dim) = std::sqrt(a.weight) * f.segment(off, a.fiber_dim);
        off += a.fiber_dim;
    }
    return out;
}

CVector embedded_to_fiber(const SpectralMeasure& m, const CVector& x) {
    CVector out(x.size());
    Eigen::Index off = 0;
    for (const auto& a : m.atoms) {
        out.segment(off, a.fiber_dim) = x.segment(off, a.fiber_dim) / std::sqrt(a.weight);
        off += a.fiber_dim;
    }
    return out;
}

namespace {

Atom scalar_atom(cplx point, double weight, std::initializer_list<cplx> row) {
    CMatrix b(1, static_cast<Eigen::Index>(row.size()));
    Eigen::Index k = 0;
    for (cplx v : row) b(0, k++) = v;
    return Atom{point, weight, 1, b};
}

}  // namespace

SpectralMeasure scenario_s1() {
    SpectralMeasure m;
    m.d = 1;
    m.atoms = {scalar_atom(1.0, 1.0, {1.0})};
    return m;
}

SpectralMeasure scenario_s2() {
    SpectralMeasure m;
    m.d = 1;
    m.atoms = {scalar_atom(1.0, 0.5, {1.0}), scalar_atom(-1.0, 0.5, {1.0})};
    return m;
}

SpectralMeasure scenario_s3() {
    const double r2 = std::sqrt(2.0);
    SpectralMeasure m;
    m.d = 2;
    m.atoms = {scalar_atom(1.0, 0.5, {r2, 0.0}), scalar_atom(cplx(0, 1), 0.25, {0.0, r2}),
               scalar_atom(-1.0, 0.25, {0.0, r2})};
    return m;
}

SpectralMeasure random_measure(std::uint64_t seed, const RandomScenarioSpec& spec) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_n(spec.n_min, spec.n_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = pick_n(rng);
    std::uniform_int_distribution<int> pick_d(1, std::min(spec.d_max, n));
    const int d = pick_d(rng);
    const double phase = unit(rng);
    for (;;) {
        SpectralMeasure m;
        m.d = d;
        std::vector<double> w(n);
        double total = 0;
        for (int j = 0; j < n; ++j) total += (w[j] = spec.min_weight_ratio + (1 - spec.min_weight_ratio) * unit(rng));
        CMatrix gram = CMatrix::Zero(d, d);
        std::vector<CMatrix> raw;
        for (int j = 0; j < n; ++j) {
            raw.push_back(gaussian_matrix(rng, 1, d));
            gram += (w[j] / total) * raw.back().adjoint() * raw.back();
        }
        if (condition_number(gram) > 1e3) continue;
        const CMatrix s = herm_power(HermMatrix(gram), -0.5);
        for (int j = 0; j < n; ++j) {
            const double angle = 2 * std::numbers::pi * (j + phase + 0.6 * unit(rng)) / n;
            m.atoms.push_back(Atom{std::polar(1.0, angle), w[j] / total, 1, raw[j] * s});
        }
        return m;
    }
}

CMatrix random_contraction(std::uint64_t seed, int d, double max_norm) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CMatrix g = gaussian_matrix(rng, d, d);
    return g * (max_norm * unit(rng) / op_norm(g));
}

SpectralMeasure ac_approximation(const AcDensity& density, int N, double phase) {
    SpectralMeasure m;
    m.d = density.d;
    m.tag = "ac-approximation";
    for (int j = 0; j < N; ++j) {
        const cplx xi = std::polar(1.0, 2 * std::numbers::pi * (j + phase) / N);
        m.atoms.push_back(Atom{xi, 1.0 / N, density.fiber_dim, density.eval(xi)});
    }
    return m;
}

}  // namespace clarklab
