#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clarklab/linalg.hpp"

namespace clarklab {

struct Atom {
    cplx point;       // unit-modulus location
    double weight;    // mu_j > 0
    int fiber_dim;    // m_j
    CMatrix b_block;  // m_j x d, k-th column is b_k at this atom
};

// Absolutely continuous component with respect to normalized Lebesgue measure:
// B(xi) = sum_k beta_k xi^k with beta_k of size m x d, density B(xi)^* B(xi).
struct AcDensity {
    int fiber_dim = 1;
    int d = 1;
    std::vector<std::pair<int, CMatrix>> terms;

    CMatrix eval(cplx xi) const;
    // Fourier coefficients A_q of xi -> B(xi)^* B(xi), indexed q = -span..span.
    std::vector<std::pair<int, CMatrix>> density_coeffs() const;
    int degree_span() const;
};

struct SpectralMeasure {
    int d = 1;
    std::vector<Atom> atoms;
    std::optional<AcDensity> ac;
    std::string tag;  // "ac-approximation" for quadrature stand-ins of a.c. measures

    bool purely_atomic() const { return !ac.has_value(); }
    int total_dim() const;
};

struct ValidationReport {
    double isometry_residual = 0.0;
    double mass = 0.0;
    double min_separation = 0.0;
    bool unit_modulus = true;
    bool positive = true;
    bool distinct = true;
    bool shapes = true;
    bool pass = false;
    std::vector<std::string> messages;
};

struct MeasureTolerances {
    double iso = 1e-10;
    double distinct = 1e-9;
    double unit = 1e-12;
    double mass = 1e-10;
};

ValidationReport validate(const SpectralMeasure& m, const MeasureTolerances& tol = {});

struct StarCyclicResult {
    bool cyclic = true;
    std::vector<int> failing_atoms;
};

StarCyclicResult star_cyclic_check(const SpectralMeasure& m, double rank_tol = Tolerances{}.rank);

bool is_cyclic_vector(const SpectralMeasure& m, const CVector& alpha, double tol = 1e-9);
CVector random_cyclic_vector(const SpectralMeasure& m, std::uint64_t seed, int max_retries = 64);

struct EmbeddedOperators {
    int n = 0;
    int d = 0;
    CMatrix U;
    CMatrix B;                     // n x d, block j is sqrt(mu_j) B_j
    std::vector<int> offsets;      // first row of each atom block
    std::vector<CMatrix> R;        // per-atom right inverses, d x m_j
};

EmbeddedOperators embed(const SpectralMeasure& m);

// Rank of [U^k B : |k| <= n], which equals n exactly for star-cyclic data.
int orbit_span_rank(const CMatrix& U, const CMatrix& B, double tol = Tolerances{}.rank);

// Embedded coordinates <-> fiber values at atoms.
CVector fiber_to_embedded(const SpectralMeasure& m, const CVector& fiber_values);
CVector embedded_to_fiber(const SpectralMeasure& m, const CVector& embedded);

// Reference scenarios used throughout the tests.
SpectralMeasure scenario_s1();
SpectralMeasure scenario_s2();
SpectralMeasure scenario_s3();

struct RandomScenarioSpec {
    int n_min = 2;
    int n_max = 12;
    int d_max = 3;
    double min_weight_ratio = 0.25;  // each weight >= ratio / n
};

// Seeded random isometric data with scalar fibers and well separated atoms.
SpectralMeasure random_measure(std::uint64_t seed, const RandomScenarioSpec& spec = {});
// Seeded strict contraction with norm at most max_norm.
CMatrix random_contraction(std::uint64_t seed, int d, double max_norm);

// Equispaced quadrature stand-in for an a.c. density (exact for trigonometric polynomials
// once N exceeds twice the degree span).
SpectralMeasure ac_approximation(const AcDensity& density, int N, double phase = 0.0);

}  // namespace clarklab
