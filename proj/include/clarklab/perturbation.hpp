#pragma once

#include "clarklab/measure.hpp"

namespace clarklab {

enum class GammaClass { Strict, Unitary, General };

struct ContractionParam {
    CMatrix gamma;
    GammaClass cls = GammaClass::General;

    explicit ContractionParam(CMatrix g, double strict_margin = 1e-6);
    int d() const { return static_cast<int>(gamma.rows()); }
};

struct PerturbedOperator {
    CMatrix T;
    ContractionParam gamma;
    EmbeddedOperators parent;
    CMatrix D_T, D_Tstar, D_G, D_Gstar;  // closed forms
    double defect_agreement = 0.0;       // max deviation from the spectral-calculus defects
};

PerturbedOperator build_T(const EmbeddedOperators& emb, const ContractionParam& gamma);

struct DefectReport {
    int rank_D_T = 0;
    int rank_D_Tstar = 0;
    int rank_D_G = 0;
    CMatrix basis_D_T;
    CMatrix basis_D_Tstar;
    double inclusion_T = 0.0;      // distance of T D_T-range from the D_T* range
    double inclusion_Tstar = 0.0;  // distance of T^* D_T*-range from the D_T range
};

DefectReport defect_report(const PerturbedOperator& op, double rank_tol = Tolerances{}.rank);

struct CnuCertificate {
    bool cnu = false;            // from star-cyclicity of the parent measure
    bool direct_cnu = false;     // from the kernel-intersection test
    bool consistent = false;
    CMatrix witness;             // orthonormal basis of the unitary part (n x k)
};

CnuCertificate cnu_certificate(const PerturbedOperator& op, const SpectralMeasure& parent, double tol = 1e-9);

// Powers D^alpha of the defect of a strict contraction.
CMatrix defect_power(const CMatrix& gamma, double alpha, bool star);

}  // namespace clarklab

namespace clarklab {

struct RandomScenario {
    SpectralMeasure measure;
    CMatrix gamma;
    double spectral_radius = 0.0;
    std::uint64_t seed = 0;
};

// Seeded measure plus strict Gamma; draws are repeated until the spectral radius of T stays below max_rho,
// which keeps the model-space series short.
RandomScenario random_scenario(std::uint64_t seed, const RandomScenarioSpec& spec = {}, double max_gamma_norm = 0.8,
                               double max_rho = 0.99);

}  // namespace clarklab
