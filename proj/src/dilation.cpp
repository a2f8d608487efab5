#include "clarklab/dilation.hpp"

#include <algorithm>

namespace clarklab {

TruncatedDilation build_dilation(const PerturbedOperator& op, int N) {
    if (N < 1) throw Error(ErrorKind::HorizonTooLarge, "buffer length must be positive");
    TruncatedDilation dil;
    dil.N = N;
    dil.n = static_cast<int>(op.T.rows());
    dil.d = static_cast<int>(op.parent.B.cols());
    const auto d = dil.d;
    const auto n = dil.n;
    const CMatrix& B = op.parent.B;
    const CMatrix& Uemb = op.parent.U;
    dil.U = CMatrix::Zero(dil.size(), dil.size());
    const Eigen::Index h = dil.h_offset(), g = dil.g_offset();
    // Backward shift on G_*: cell k+1 moves to cell k, the last cell receives nothing.
    for (int k = 0; k + 1 < N; ++k)
        dil.U.block(static_cast<Eigen::Index>(k) * d, static_cast<Eigen::Index>(k + 1) * d, d, d).setIdentity();
    dil.U.block(h, h, n, n) = op.T;
    dil.U.block(h, 0, n, d) = op.D_Tstar * B;
    dil.U.block(g, 0, d, d) = -B.adjoint() * Uemb * op.T.adjoint() * B;
    dil.U.block(g, h, d, n) = B.adjoint() * Uemb * op.D_T;
    // Forward shift on G, dropping the overflow of the last cell.
    for (int k = 0; k + 1 < N; ++k)
        dil.U.block(g + static_cast<Eigen::Index>(k + 1) * d, g + static_cast<Eigen::Index>(k) * d, d, d).setIdentity();
    return dil;
}

DilationResiduals dilation_property_check(const TruncatedDilation& dil, const PerturbedOperator& op, int n_max) {
    if (n_max > dil.N - 1) throw Error(ErrorKind::HorizonTooLarge, "horizon exceeds N - 1");
    DilationResiduals r;
    const auto h = dil.h_offset();
    const auto n = dil.n;
    const auto sz = dil.size();
    CMatrix fwd = CMatrix::Identity(sz, sz).middleCols(h, n);
    CMatrix bwd = fwd;
    CMatrix Tn = CMatrix::Identity(n, n), Tsn = Tn;
    for (int k = 1; k <= n_max; ++k) {
        fwd = dil.U * fwd;
        bwd = dil.U.adjoint() * bwd;
        Tn = op.T * Tn;
        Tsn = op.T.adjoint() * Tsn;
        r.forward = std::max(r.forward, op_norm(fwd.middleRows(h, n) - Tn));
        r.backward = std::max(r.backward, op_norm(bwd.middleRows(h, n) - Tsn));
    }
    const Eigen::Index keep = sz - dil.d;  // drop the last G cell, whose image is truncated
    const CMatrix cols = dil.U.leftCols(keep);
    r.isometry = op_norm(cols.adjoint() * cols - CMatrix::Identity(keep, keep));
    r.defect_block = op_norm(dil.U.block(h, 0, n, dil.d) - op.D_Tstar * op.parent.B);
    return r;
}

}  // namespace clarklab
