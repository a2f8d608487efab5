#include <doctest.h>

#include "clarklab/charfn.hpp"
#include "oracles.hpp"

using namespace clarklab;

namespace {

CMatrix scalar(cplx g) { return CMatrix::Constant(1, 1, g); }

oracle::Dense dense_of(const SpectralMeasure& m, const CMatrix& g) {
    std::vector<oracle::Atom> atoms;
    for (const auto& a : m.atoms) atoms.push_back({a.point, a.weight, a.b_block});
    return oracle::dense_model(atoms, g);
}

}  // namespace

TEST_SUITE("charfn") {
    TEST_CASE("value at zero is -Gamma") {
        const CMatrix g = random_contraction(2, 2, 0.7);
        CharFnEvaluator ev(scenario_s3(), ContractionParam(g));
        CHECK(oracle::norm2(ev.theta(0.0) + g) < 1e-14);
        CHECK(oracle::norm2(ev.theta(0.0, ThetaMethod::Resolvent) + g) < 1e-12);
    }

    TEST_CASE("closed forms theta_0 = z and theta_0 = z^2") {
        CharFnEvaluator e1(scenario_s1(), ContractionParam(scalar(0.0)));
        CharFnEvaluator e2(scenario_s2(), ContractionParam(scalar(0.0)));
        CHECK(std::abs(e1.theta(0.3)(0, 0) - 0.3) < 1e-15);
        CHECK(std::abs(e2.theta(0.5)(0, 0) - 0.25) < 1e-15);
        for (cplx z : oracle::disk_points(1, 20, 0.99)) {
            CHECK(std::abs(e1.theta(z)(0, 0) - z) < 1e-12);
            CHECK(std::abs(e2.theta(z)(0, 0) - z * z) < 1e-12);
            CHECK(std::abs(e2.theta0(z)(0, 0) - z * z) < 1e-12);
        }
    }

    TEST_CASE("resolvent and Cauchy forms agree with the dense oracle") {
        std::vector<std::pair<SpectralMeasure, CMatrix>> cases = {
            {scenario_s1(), scalar(0.3)},
            {scenario_s2(), scalar(cplx(0.2, -0.4))},
            {scenario_s3(), random_contraction(9, 2, 0.8)}};
        for (std::uint64_t s = 1; s <= 4; ++s) {
            const auto r = random_scenario(s);
            cases.emplace_back(r.measure, r.gamma);
        }
        for (const auto& [m, g] : cases) {
            CharFnEvaluator ev(m, ContractionParam(g));
            const auto dense = dense_of(m, g);
            for (cplx z : oracle::disk_points(7, 25, 0.95)) {
                const CMatrix want = oracle::theta_resolvent(dense, z);
                CHECK(oracle::norm2(ev.theta(z, ThetaMethod::Cauchy) - want) < 1e-9);
                CHECK(oracle::norm2(ev.theta(z, ThetaMethod::Resolvent) - want) < 1e-9);
            }
        }
    }

    TEST_CASE("theta_0 formulas agree and F (I - theta_0) = I") {
        CharFnEvaluator e2(scenario_s2(), ContractionParam(scalar(0.0)));
        const auto f0 = theta_zero_formulas(e2, 0.0);
        CHECK(oracle::norm2(f0.via_F1_right) < 1e-15);
        const auto f = theta_zero_formulas(e2, 0.5);
        CHECK(std::abs(f.via_F1_right(0, 0) - 0.25) < 1e-15);
        CHECK(std::abs(f.via_F2_left(0, 0) - 0.25) < 1e-15);
        CharFnEvaluator e3(scenario_s3(), ContractionParam(CMatrix::Zero(2, 2)));
        for (cplx z : oracle::disk_points(3, 10, 0.95)) {
            CHECK(theta_zero_formulas(e3, z).spread < 1e-11);
            CHECK(oracle::norm2(e3.F(z) * (CMatrix::Identity(2, 2) - e3.theta0(z)) - CMatrix::Identity(2, 2)) < 1e-11);
            CHECK(std::abs((CMatrix::Identity(2, 2) - e3.theta0(z)).determinant()) > 1e-8);
        }
    }

    TEST_CASE("linear fractional maps") {
        const CMatrix t = random_contraction(4, 2, 0.9);
        const auto id = lft_apply(LftDirection::ZeroToGamma, t, CMatrix::Zero(2, 2));
        CHECK(oracle::norm2(id.value - t) < 1e-15);
        // theta_0 = z, gamma = 1/2, z = 1/2: (0.5 - 0.5) / (1 - 0.25) = 0
        CHECK(std::abs(lft_apply(LftDirection::ZeroToGamma, scalar(0.5), scalar(0.5)).value(0, 0)) < 1e-15);
        CHECK(std::abs(lft_apply(LftDirection::ZeroToGamma, scalar(0.0), scalar(0.3)).value(0, 0) + 0.3) < 1e-15);
        const CMatrix g = random_contraction(5, 2, 0.8);
        const auto up = lft_apply(LftDirection::ZeroToGamma, t, g);
        const auto down = lft_apply(LftDirection::GammaToZero, up.value, g);
        CHECK(oracle::norm2(down.value - t) < 1e-10);
        CHECK(up.bracket_gap < 1e-11);
        CHECK(up.additive_gap < 1e-11);
        CHECK(down.bracket_gap < 1e-11);
    }

    TEST_CASE("theta_Gamma is the image of theta_0") {
        const CMatrix g = random_contraction(6, 2, 0.8);
        CharFnEvaluator ev(scenario_s3(), ContractionParam(g));
        for (cplx z : oracle::disk_points(8, 20, 0.95))
            CHECK(oracle::norm2(lft_apply(LftDirection::ZeroToGamma, ev.theta0(z), g).value - ev.theta(z)) < 1e-9);
    }

    TEST_CASE("contractive inside the disk") {
        const auto r = random_scenario(7);
        CharFnEvaluator ev(r.measure, ContractionParam(r.gamma));
        for (cplx z : oracle::disk_points(2, 50, 1.0 - 1e-6)) CHECK(op_norm(ev.theta(z)) <= 1.0 + 1e-10);
    }

    TEST_CASE("defect relation and defect values") {
        CharFnEvaluator e0(scenario_s3(), ContractionParam(CMatrix::Zero(2, 2)));
        CHECK(oracle::norm2(e0.delta_sq(0.0) - CMatrix::Identity(2, 2)) < 1e-15);
        CharFnEvaluator ev(scenario_s3(), ContractionParam(random_contraction(12, 2, 0.8)));
        for (cplx z : oracle::disk_points(4, 20, 0.95)) {
            CHECK(delta_relation_check(ev, z) < 1e-9);
            const CMatrix d = ev.delta(z);
            CHECK(oracle::norm2(d * d - ev.delta_sq(z)) < 1e-12);
        }
        // inner case: Delta_0 vanishes on the circle off the atoms
        for (double t : {0.1, 0.3, 0.6, 0.9}) CHECK(oracle::norm2(e0.delta_sq(std::polar(1.0, 2 * M_PI * t))) < 1e-12);
    }

    TEST_CASE("interior a.c. identity") {
        CharFnEvaluator e2(scenario_s2(), ContractionParam(scalar(0.0)));
        const auto r2 = ac_diagnose(e2, {0.0, 0.5});
        CHECK(r2.max_identity_residual < 1e-12);
        const auto rs = random_scenario(3);
        CharFnEvaluator ev(rs.measure, ContractionParam(rs.gamma));
        const auto r = ac_diagnose(ev, oracle::disk_points(6, 20, 0.95), {std::polar(1.0, 0.123)});
        CHECK(r.max_identity_residual < 1e-10);
        CHECK(r.min_abs_det > 0.0);
        CHECK(r.boundary_delta_sq < 1e-12);
        for (std::size_t k = 1; k < r.radial_decay.size(); ++k) CHECK(r.radial_decay[k] <= r.radial_decay[k - 1] + 1e-14);
    }

    TEST_CASE("a.c. multiplicity on a trigonometric density") {
        AcDensity a;
        a.fiber_dim = 1;
        a.d = 2;
        CMatrix b0(1, 2), b1(1, 2);
        b0 << 1, 0;
        b1 << 0, 1;
        a.terms = {{0, b0}, {1, b1}};
        SpectralMeasure m;
        m.d = 2;
        m.ac = a;
        CharFnEvaluator ev(m, ContractionParam(CMatrix::Zero(2, 2)));
        for (double t : {0.05, 0.4, 0.77}) CHECK(ac_rank(ev, std::polar(1.0, 2 * M_PI * t), 1e-7) == 1);
        CHECK(ac_diagnose(ev, oracle::disk_points(3, 10, 0.9)).max_identity_residual < 1e-10);

        // Quadrature stand-in just inside the circle: the spurious singular value of Delta_0 is about
        // sqrt(2 (1 - r)), roughly 0.02 here, against 1 for the genuine one.
        const auto q = ac_approximation(a, 65536);
        CharFnEvaluator eq(q, ContractionParam(CMatrix::Zero(2, 2)));
        const double r = 1.0 - 12.0 / 65536;
        for (double t : {0.11, 0.52}) CHECK(ac_rank(eq, r * std::polar(1.0, 2 * M_PI * t), 0.1) == 1);
    }

    TEST_CASE("strictness and shapes are enforced") {
        CHECK_THROWS_AS(CharFnEvaluator(scenario_s1(), ContractionParam(scalar(1.0))), Error);
        CHECK_THROWS_AS(CharFnEvaluator(scenario_s3(), ContractionParam(scalar(0.2))), Error);
    }
}
