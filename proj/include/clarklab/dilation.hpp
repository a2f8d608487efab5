#pragma once

#include "clarklab/perturbation.hpp"

namespace clarklab {

// Layout: N cells of C^d for G_* (cell 0 next to H), then H, then N cells of C^d for G.
struct TruncatedDilation {
    int N = 0;
    int n = 0;
    int d = 0;
    CMatrix U;

    Eigen::Index h_offset() const { return static_cast<Eigen::Index>(N) * d; }
    Eigen::Index g_offset() const { return h_offset() + n; }
    Eigen::Index size() const { return 2 * static_cast<Eigen::Index>(N) * d + n; }
};

TruncatedDilation build_dilation(const PerturbedOperator& op, int N);

struct DilationResiduals {
    double forward = 0.0;    // max_n ||P_H U^n|_H - T^n||
    double backward = 0.0;   // max_n ||P_H (U^*)^n|_H - (T^*)^n||
    double isometry = 0.0;   // Gram defect of the columns away from the truncation edge
    double defect_block = 0.0;
};

DilationResiduals dilation_property_check(const TruncatedDilation& dil, const PerturbedOperator& op, int n_max);

}  // namespace clarklab
