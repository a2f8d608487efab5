#include "clarklab/nf_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>

namespace clarklab {

CVector TaylorRep::eval(cplx z) const {
    CVector acc = CVector::Zero(coeffs.rows());
    for (Eigen::Index k = coeffs.cols() - 1; k >= 0; --k) acc = acc * z + coeffs.col(k);
    return acc;
}

cplx TaylorRep::inner(const TaylorRep& other) const {
    const auto m = std::min(coeffs.cols(), other.coeffs.cols());
    return (coeffs.leftCols(m).conjugate().cwiseProduct(other.coeffs.leftCols(m))).sum();
}

TaylorRep TaylorRep::monomial(int d, int K, int k, int l) {
    TaylorRep t = zero(d, K);
    t.coeffs(l, k) = 1.0;
    return t;
}

CMatrix InnerFunctionRep::eval(cplx z) const {
    CMatrix acc = CMatrix::Zero(d(), d());
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

CVector flatten(const TaylorRep& h) {
    return Eigen::Map<const CVector>(h.coeffs.data(), h.coeffs.size());
}

TaylorRep unflatten(const CVector& v, int d) {
    TaylorRep t;
    t.coeffs = Eigen::Map<const CMatrix>(v.data(), d, v.size() / d);
    return t;
}

TaylorRep shift_up(const TaylorRep& h) {
    TaylorRep out = TaylorRep::zero(h.d(), h.K());
    out.coeffs.rightCols(h.K()) = h.coeffs.leftCols(h.K());
    return out;
}

// Linear convolutions against the coefficient sequence of theta, done in the frequency domain.
class FftConvolver {
public:
    FftConvolver(const std::vector<CMatrix>& coeffs) : d_(static_cast<int>(coeffs[0].rows())), K_(static_cast<int>(coeffs.size()) - 1) {
        L_ = 1;
        while (L_ < 2 * (K_ + 1)) L_ *= 2;
        spec_.resize(static_cast<std::size_t>(d_ * d_));
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) {
                std::vector<cplx> seq(L_, 0.0);
                for (int k = 0; k <= K_; ++k) seq[k] = coeffs[k](i, j);
                fft_.fwd(spec_[i * d_ + j], seq);
            }
    }

    // P_+(theta^sharp h): g_m = sum_k theta_k^* h_{m+k}.
    CMatrix correlate(const CMatrix& h) const {
        auto hs = forward(h);
        CMatrix g(d_, K_ + 1);
        std::vector<cplx> acc(L_), out;
        for (int i = 0; i < d_; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int j = 0; j < d_; ++j) {
                const auto& t = spec_[j * d_ + i];
                for (int w = 0; w < L_; ++w) acc[w] += std::conj(t[w]) * hs[j][w];
            }
            fft_.inv(out, acc);
            for (int m = 0; m <= K_; ++m) g(i, m) = out[m];
        }
        return g;
    }

    // theta g truncated at K.
    CMatrix multiply(const CMatrix& g) const {
        auto gs = forward(g);
        CMatrix r(d_, K_ + 1);
        std::vector<cplx> acc(L_), out;
        for (int i = 0; i < d_; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int j = 0; j < d_; ++j) {
                const auto& t = spec_[i * d_ + j];
                for (int w = 0; w < L_; ++w) acc[w] += t[w] * gs[j][w];
            }
            fft_.inv(out, acc);
            for (int m = 0; m <= K_; ++m) r(i, m) = out[m];
        }
        return r;
    }

private:
    std::vector<std::vector<cplx>> forward(const CMatrix& h) const {
        std::vector<std::vector<cplx>> hs(d_);
        std::vector<cplx> seq(L_);
        for (int j = 0; j < d_; ++j) {
            std::fill(seq.begin(), seq.end(), 0.0);
            for (int k = 0; k <= K_ && k < h.cols(); ++k) seq[k] = h(j, k);
            fft_.fwd(hs[j], seq);
        }
        return hs;
    }

    int d_, K_, L_;
    std::vector<std::vector<cplx>> spec_;
    mutable Eigen::FFT<double> fft_;
};

namespace {

// Geometric extrapolation of sum_{k>K} a_k^2 from the last eight coefficient norms.
double tail_estimate(const std::vector<double>& a_k) {
    const int K = static_cast<int>(a_k.size()) - 1;
    const int w = std::min(8, K + 1);
    const double top = *std::max_element(a_k.begin(), a_k.end());
    const double last_max = *std::max_element(a_k.end() - w, a_k.end());
    // Coefficients at round-off level: the sequence has already collapsed.
    if (last_max <= 1e-13 * std::max(1.0, top)) return w * last_max * last_max;
    const double a = a_k[K];
    const double b = a_k[K - w + 1];
    if (b == 0.0 || w < 2) return std::numeric_limits<double>::infinity();
    const double q = std::pow(a / b, 1.0 / (w - 1));
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    return a * a * q * q / (1.0 - q * q);
}

int next_pow2(int x) {
    int p = 1;
    while (p < x) p *= 2;
    return p;
}

}  // namespace

InnerFunctionRep theta_coefficients(const CharFnEvaluator& ev, int N_fft, int K, const NfTolerances& tol) {
    const SpectralMeasure& m = ev.measure();
    if (!m.purely_atomic() || m.tag == "ac-approximation")
        throw Error(ErrorKind::NotInner, "model-space numerics need a purely singular measure");
    const int n = m.total_dim();
    const int d = ev.d();
    int Kc = K > 0 ? K : 8 * n + 32;
    for (;;) {
        const int N = next_pow2(std::max(N_fft, 4 * Kc));
        const auto grid = offset_grid(m, N);
        const double phi = std::arg(grid[0]);
        InnerFunctionRep rep;
        rep.N_fft = N;
        std::vector<std::vector<cplx>> samples(static_cast<std::size_t>(d * d), std::vector<cplx>(N));
        for (int k = 0; k < N; ++k) {
            const CMatrix th = ev.theta_boundary(grid[k]);
            rep.boundary_unitarity = std::max(rep.boundary_unitarity, op_norm(th.adjoint() * th - CMatrix::Identity(d, d)));
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) samples[i * d + j][k] = th(i, j);
        }
        if (rep.boundary_unitarity > tol.inner)
            throw Error(ErrorKind::NotInner, "boundary unitarity residual " + std::to_string(rep.boundary_unitarity));
        Eigen::FFT<double> fft;
        std::vector<std::vector<cplx>> spec(samples.size());
        for (std::size_t e = 0; e < samples.size(); ++e) fft.fwd(spec[e], samples[e]);
        auto coeff = [&](int idx) {
            // idx in [0, N): phase correction for the rotated grid.
            const int freq = idx <= N / 2 ? idx : idx - N;
            const cplx ph = std::polar(1.0 / N, -phi * freq);
            CMatrix c(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) c(i, j) = ph * spec[i * d + j][idx];
            return c;
        };
        for (int k = 0; k <= Kc; ++k) rep.coeffs.push_back(coeff(k));
        for (int k = 1; k <= Kc; ++k) rep.negative_leak = std::max(rep.negative_leak, coeff(N - k).norm());
        rep.theta0 = rep.coeffs[0];
        std::vector<double> norms;
        for (const auto& c : rep.coeffs) norms.push_back(c.norm());
        rep.tail_bound = tail_estimate(norms);
        if (rep.tail_bound <= tol.tail_budget) {
            rep.conv = std::make_shared<FftConvolver>(rep.coeffs);
            return rep;
        }
        Kc *= 2;
        if (Kc > tol.K_max)
            throw Error(ErrorKind::TruncationOverflow, "theta coefficients do not decay within the budget");
    }
}

TaylorRep theta_times(const InnerFunctionRep& theta, const TaylorRep& g) {
    return {theta.conv->multiply(g.coeffs), g.tail_bound};
}

TaylorRep project_K(const TaylorRep& h, const InnerFunctionRep& theta) {
    if (h.K() > theta.K()) throw Error(ErrorKind::TruncationOverflow, "element longer than the theta budget");
    TaylorRep hh = h;
    if (h.K() < theta.K()) {
        hh = TaylorRep::zero(h.d(), theta.K());
        hh.coeffs.leftCols(h.K() + 1) = h.coeffs;
    }
    const CMatrix g = theta.conv->correlate(hh.coeffs);
    TaylorRep out{hh.coeffs - theta.conv->multiply(g), std::max(h.tail_bound, theta.tail_bound)};
    return out;
}

namespace {

CMatrix C_columns(const InnerFunctionRep& th, bool star) {
    const int d = th.d();
    const int K = th.K();
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix& t0 = th.theta0;
    CMatrix cols = CMatrix::Zero(static_cast<Eigen::Index>(d) * (K + 1), d);
    if (star) {
        const CMatrix s = herm_power(HermMatrix(I - t0 * t0.adjoint()), -0.5);
        cols.topRows(d) = (I - t0 * t0.adjoint()) * s;
        for (int k = 1; k <= K; ++k) cols.middleRows(static_cast<Eigen::Index>(k) * d, d) = -th.coeffs[k] * t0.adjoint() * s;
    } else {
        const CMatrix s = herm_power(HermMatrix(I - t0.adjoint() * t0), -0.5);
        for (int k = 0; k < K; ++k) cols.middleRows(static_cast<Eigen::Index>(k) * d, d) = th.coeffs[k + 1] * s;
    }
    return cols;
}

// Coefficient-space shift by one (z h), dropping the overflow cell.
CMatrix shift_rows(const CMatrix& a, int d) {
    CMatrix out = CMatrix::Zero(a.rows(), a.cols());
    out.bottomRows(a.rows() - d) = a.topRows(a.rows() - d);
    return out;
}

CMatrix projector(const CMatrix& q) { return q * q.adjoint(); }

}  // namespace

namespace {

// Largest coefficient-block norm per degree across all columns of a flattened family.
std::vector<double> block_norms(const CMatrix& flat, int d) {
    const Eigen::Index K1 = flat.rows() / d;
    std::vector<double> out(static_cast<std::size_t>(K1), 0.0);
    for (Eigen::Index k = 0; k < K1; ++k)
        for (Eigen::Index j = 0; j < flat.cols(); ++j)
            out[k] = std::max(out[k], flat.block(k * d, j, d, 1).norm());
    return out;
}

bool try_build(ModelSpaceBasis& b, const CharFnEvaluator& ev, int K_req, const NfTolerances& tol, double& tail) {
    b.theta = theta_coefficients(ev, 0, K_req, tol);
    b.n = ev.measure().total_dim();
    b.d = ev.d();
    const int K = b.theta.K();
    const Eigen::Index len = static_cast<Eigen::Index>(b.d) * (K + 1);
    std::vector<CVector> basis;
    const int k_limit = std::min(K, 4 * b.n + 8);
    for (int k = 0; k <= k_limit && static_cast<int>(basis.size()) < b.n; ++k) {
        for (int l = 0; l < b.d && static_cast<int>(basis.size()) < b.n; ++l) {
            CVector v = flatten(project_K(TaylorRep::monomial(b.d, K, k, l), b.theta));
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) v -= q.dot(v) * q;
            const double nv = v.norm();
            if (nv > tol.drop) basis.push_back(v / nv);
        }
    }
    if (static_cast<int>(basis.size()) != b.n)
        throw Error(ErrorKind::TruncationOverflow, "model space dimension " + std::to_string(basis.size()) +
                                                       " differs from n = " + std::to_string(b.n));
    b.V.resize(len, b.n);
    for (int j = 0; j < b.n; ++j) b.V.col(j) = basis[j];
    tail = tail_estimate(block_norms(b.V, b.d));
    return tail <= tol.tail_budget;
}

}  // namespace

ModelSpaceBasis build_model_space(const CharFnEvaluator& ev, const NfTolerances& tol) {
    ModelSpaceBasis b;
    int K = 8 * ev.measure().total_dim() + 32;
    double tail = 0.0;
    while (!try_build(b, ev, K, tol, tail)) {
        K = 2 * b.theta.K();
        if (K > tol.K_max)
            throw Error(ErrorKind::TruncationOverflow, "model space elements do not decay within the budget");
    }
    b.theta.tail_bound = std::max(b.theta.tail_bound, tail);
    b.gram_residual = op_norm(b.V.adjoint() * b.V - CMatrix::Identity(b.n, b.n));
    b.M = b.V.adjoint() * shift_rows(b.V, b.d);
    b.C_fun = C_columns(b.theta, false);
    b.Cs_fun = C_columns(b.theta, true);
    b.C = b.V.adjoint() * b.C_fun;
    b.Cs = b.V.adjoint() * b.Cs_fun;
    b.membership_residual = std::max(op_norm(b.C_fun - b.V * b.C), op_norm(b.Cs_fun - b.V * b.Cs));
    return b;
}

double model_resolution_check(const ModelSpaceBasis& b, const CMatrix& gamma, double* adjoint_residual) {
    const int d = b.d;
    // M_theta = M_z + (C_* Gamma - M_z C) C^*, tested on the basis as functions.
    const CMatrix lhs = b.V * b.M;
    const CMatrix rhs = shift_rows(b.V, d) + (b.Cs_fun * gamma - shift_rows(b.C_fun, d)) * b.C.adjoint();
    const double r1 = op_norm(lhs - rhs);
    // Adjoint version lives in coefficients -1..K because of the conj(z) shift.
    const Eigen::Index len = b.V.rows();
    auto down = [&](const CMatrix& a) {
        CMatrix out = CMatrix::Zero(len + d, a.cols());
        out.topRows(len) = a;  // row block 0 is coefficient -1
        return out;
    };
    auto pad = [&](const CMatrix& a) {
        CMatrix out = CMatrix::Zero(len + d, a.cols());
        out.bottomRows(len) = a;
        return out;
    };
    const CMatrix lhs2 = pad(b.V * b.M.adjoint());
    const CMatrix rhs2 = down(b.V) + (pad(b.C_fun) * gamma.adjoint() - down(b.Cs_fun)) * b.Cs.adjoint();
    const double r2 = op_norm(lhs2 - rhs2);
    if (adjoint_residual) *adjoint_residual = r2;
    return std::max(r1, r2);
}

ModelChecks model_checks(const ModelSpaceBasis& b, const CMatrix& gamma, std::uint64_t seed) {
    ModelChecks c;
    const int d = b.d, n = b.n, K = b.theta.K();
    const CMatrix I_d = CMatrix::Identity(d, d);
    const CMatrix I_n = CMatrix::Identity(n, n);
    c.gram = b.gram_residual;
    c.model_norm_excess = std::max(0.0, op_norm(b.M) - 1.0);
    c.C_isometry = op_norm(b.C.adjoint() * b.C - I_d);
    c.Cs_isometry = op_norm(b.Cs.adjoint() * b.Cs - I_d);
    const CMatrix dm = I_n - b.M.adjoint() * b.M;
    const CMatrix dms = I_n - b.M * b.M.adjoint();
    c.range_C = op_norm(projector(b.C) - projector(range_basis(dm, 1e-7)));
    c.range_Cs = op_norm(projector(b.Cs) - projector(range_basis(dms, 1e-7)));
    c.intertwine = op_norm(b.M * b.C - b.Cs * gamma);
    c.intertwine_adj = op_norm(b.M.adjoint() * b.Cs - b.C * gamma.adjoint());
    double adj = 0.0;
    const double res = model_resolution_check(b, gamma, &adj);
    c.resolution = res;
    c.resolution_adj = adj;

    // P_K of a constant e equals (I - theta theta(0)^*) e.
    const CMatrix& t0 = b.theta.theta0;
    CMatrix expected(b.V.rows(), d);
    expected.topRows(d) = I_d - t0 * t0.adjoint();
    for (int k = 1; k <= K; ++k) expected.middleRows(static_cast<Eigen::Index>(k) * d, d) = -b.theta.coeffs[k] * t0.adjoint();
    for (int l = 0; l < d; ++l) {
        const TaylorRep p = project_K(TaylorRep::monomial(d, K, 0, l), b.theta);
        c.projection_constant = std::max(c.projection_constant, (flatten(p) - expected.col(l)).norm());
    }

    // (I - M M^*) f = (I - theta theta(0)^*) f(0) for f in the model space.
    const CMatrix lhs = b.V * dms;
    CMatrix rhs(b.V.rows(), n);
    for (int j = 0; j < n; ++j) {
        const CVector f0 = b.V.col(j).head(d);
        rhs.col(j).head(d) = (I_d - t0 * t0.adjoint()) * f0;
        for (int k = 1; k <= K; ++k) rhs.col(j).segment(static_cast<Eigen::Index>(k) * d, d) = -b.theta.coeffs[k] * (t0.adjoint() * f0);
    }
    c.defect_commutation = op_norm(lhs - rhs);

    const CMatrix ker = null_basis(dm, 1e-7);
    if (ker.cols() > 0) c.shift_on_kernel = op_norm(b.V * b.M * ker - shift_rows(b.V * ker, d));

    const auto grid = offset_grid(SpectralMeasure{}, 256);
    for (cplx xi : grid) {
        CMatrix cv(d, d);
        for (int l = 0; l < d; ++l) cv.col(l) = unflatten(b.C_fun.col(l), d).eval(xi);
        c.sup_C = std::max(c.sup_C, op_norm(cv));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 4; ++trial) {
        TaylorRep h = TaylorRep::zero(d, K);
        for (int k = 0; k <= std::min(K, 16); ++k)
            for (int l = 0; l < d; ++l) h.coeffs(l, k) = cplx(g(rng), g(rng));
        const TaylorRep p = project_K(h, b.theta);
        const CMatrix inner = b.theta.conv->correlate(p.coeffs);
        c.orthogonality = std::max(c.orthogonality, inner.leftCols(std::max(1, K - n + 1)).cwiseAbs().maxCoeff());
    }
    return c;
}

}  // namespace clarklab
