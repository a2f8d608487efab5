#include <doctest.h>

#include "clarklab/measure.hpp"
#include "clarklab/perturbation.hpp"
#include "oracles.hpp"

using namespace clarklab;

namespace {

SpectralMeasure two_atoms(double w1, double w2, cplx b2) {
    SpectralMeasure m = scenario_s2();
    m.atoms[0].weight = w1;
    m.atoms[1].weight = w2;
    m.atoms[1].b_block(0, 0) = b2;
    return m;
}

}  // namespace

TEST_SUITE("measure") {
    TEST_CASE("validate on the reference scenarios") {
        const auto r1 = validate(scenario_s1());
        CHECK(r1.pass);
        CHECK(r1.isometry_residual == 0.0);
        CHECK(validate(scenario_s2()).pass);
        CHECK(validate(scenario_s3()).pass);
    }

    TEST_CASE("S2 with weights 0.6 fails with residual 0.2") {
        const auto r = validate(two_atoms(0.6, 0.6, 1.0));
        CHECK_FALSE(r.pass);
        CHECK(r.isometry_residual == doctest::Approx(0.2).epsilon(1e-12));
    }

    TEST_CASE("validate flags distinctness, modulus and positivity") {
        SpectralMeasure m = scenario_s2();
        m.atoms[1].point = m.atoms[0].point;
        CHECK_FALSE(validate(m).distinct);
        m = scenario_s2();
        m.atoms[1].point = 1.01 * m.atoms[1].point;
        CHECK_FALSE(validate(m).unit_modulus);
        m = scenario_s2();
        m.atoms[1].weight = -0.5;
        CHECK_FALSE(validate(m).positive);
    }

    TEST_CASE("star-cyclicity is a per-atom rank test") {
        CHECK(star_cyclic_check(scenario_s2()).cyclic);
        const auto r = star_cyclic_check(two_atoms(0.5, 0.5, 0.0));
        CHECK_FALSE(r.cyclic);
        REQUIRE(r.failing_atoms.size() == 1);
        CHECK(r.failing_atoms[0] == 1);
        CHECK(star_cyclic_check(scenario_s3()).cyclic);
    }

    TEST_CASE("random cyclic vectors") {
        const CVector a1 = random_cyclic_vector(scenario_s1(), 3);
        CHECK(std::abs(a1(0)) > 0.0);
        const auto s3 = scenario_s3();
        const CVector a3 = random_cyclic_vector(s3, 11);
        for (const auto& at : s3.atoms) CHECK((at.b_block * a3).norm() > 1e-9);
        CHECK(is_cyclic_vector(s3, a3));

        // every row equal to (1, 0): alpha = (0, 1) is rejected, alpha_1 != 0 accepted
        SpectralMeasure m;
        m.d = 2;
        for (double t : {0.0, 0.25, 0.5}) {
            CMatrix b(1, 2);
            b << 1.0, 0.0;
            m.atoms.push_back({std::polar(1.0, 2 * M_PI * t), 1.0 / 3, 1, b});
        }
        CVector bad(2), good(2);
        bad << 0.0, 1.0;
        good << 0.7, -2.0;
        CHECK_FALSE(is_cyclic_vector(m, bad));
        CHECK(is_cyclic_vector(m, good));

        SpectralMeasure wide;
        wide.d = 2;
        wide.atoms.push_back({1.0, 1.0, 2, CMatrix::Identity(2, 2)});
        try {
            random_cyclic_vector(wide, 1);
            FAIL("expected NotScalarFibers");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotScalarFibers);
        }
    }

    TEST_CASE("embedding of S1, S2, S3") {
        const auto e1 = embed(scenario_s1());
        CHECK(e1.U(0, 0) == cplx(1.0));
        CHECK(e1.B(0, 0) == cplx(1.0));
        const auto e2 = embed(scenario_s2());
        CHECK(std::abs(e2.U(0, 0) - 1.0) < 1e-15);
        CHECK(std::abs(e2.U(1, 1) + 1.0) < 1e-15);
        CHECK(std::abs(e2.B(0, 0) - std::sqrt(0.5)) < 1e-15);
        CHECK(std::abs(e2.B(1, 0) - std::sqrt(0.5)) < 1e-15);
        const auto e3 = embed(scenario_s3());
        CHECK(e3.U.rows() == 3);
        CHECK(e3.B.cols() == 2);
        CHECK(oracle::norm2(e3.B.adjoint() * e3.B - CMatrix::Identity(2, 2)) < 1e-14);
        for (std::size_t j = 0; j < e3.R.size(); ++j)
            CHECK(oracle::norm2(scenario_s3().atoms[j].b_block * e3.R[j] - CMatrix::Identity(1, 1)) < 1e-14);
    }

    TEST_CASE("random measures are isometric and star-cyclic") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto m = random_measure(seed);
            CHECK(validate(m).pass);
            const auto e = embed(m);
            CHECK(oracle::norm2(e.B.adjoint() * e.B - CMatrix::Identity(m.d, m.d)) < 1e-12);
            CHECK(orbit_span_rank(e.U, e.B) == e.n);
        }
    }

    TEST_CASE("unitary Gamma keeps Ran B star-cyclic") {
        const auto m = scenario_s3();
        const auto e = embed(m);
        CMatrix g(2, 2);
        g << 0, 1, cplx(0, 1), 0;  // unitary
        const auto op = build_T(e, ContractionParam(g));
        CHECK(op.gamma.cls == GammaClass::Unitary);
        CHECK(orbit_span_rank(op.T, e.B) == e.n);
    }

    TEST_CASE("fiber and embedded coordinates are inverse") {
        const auto m = scenario_s3();
        CVector f(3);
        f << 1.0, cplx(0, 2), -3.0;
        CHECK((embedded_to_fiber(m, fiber_to_embedded(m, f)) - f).norm() < 1e-14);
    }

    TEST_CASE("trigonometric density coefficients") {
        AcDensity a;
        a.fiber_dim = 1;
        a.d = 2;
        CMatrix b0(1, 2), b1(1, 2);
        b0 << 1, 0;
        b1 << 0, 1;
        a.terms = {{0, b0}, {1, b1}};
        // B(xi)^* B(xi) sampled against its Fourier series
        const cplx xi = std::polar(1.0, 0.7);
        CMatrix series = CMatrix::Zero(2, 2);
        for (const auto& [q, A] : a.density_coeffs()) series += A * std::pow(xi, q);
        const CMatrix Bx = a.eval(xi);
        CHECK(oracle::norm2(series - Bx.adjoint() * Bx) < 1e-14);
        SpectralMeasure m;
        m.d = 2;
        m.ac = a;
        CHECK(validate(m).pass);
        const auto q = ac_approximation(a, 64);
        CHECK(q.tag == "ac-approximation");
        CHECK(validate(q).isometry_residual < 1e-12);
    }
}
