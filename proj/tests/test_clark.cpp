#include <doctest.h>

#include "clarklab/clark.hpp"
#include "oracles.hpp"

using namespace clarklab;

namespace {

CMatrix scalar(cplx g) { return CMatrix::Constant(1, 1, g); }

CVector vec(std::initializer_list<cplx> v) {
    CVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (cplx x : v) out(k++) = x;
    return out;
}

}  // namespace

TEST_SUITE("clark") {
    TEST_CASE("S2: indicator of the atom at 1 maps to (1 + z)/2") {
        CharFnEvaluator ev(scenario_s2(), ContractionParam(scalar(0.0)));
        const auto h = phi_star_nf(ev, vec({1.0, 0.0}), 16);
        CHECK(std::abs(h.coeffs(0, 0) - 0.5) < 1e-12);
        CHECK(std::abs(h.coeffs(0, 1) - 0.5) < 1e-12);
        CHECK(h.coeffs.rightCols(15).norm() < 1e-12);
        const auto cols = phi_star_nf_columns(ev, 8);
        CMatrix want(2, 2);
        want << 1, 1, 1, -1;
        want /= std::sqrt(2.0);
        CHECK(oracle::norm2(cols.topRows(2) - want) < 1e-12);
        CHECK(cols.bottomRows(7).norm() < 1e-12);
    }

    TEST_CASE("S2: the universal formula sends h = xi to z") {
        CharFnEvaluator ev(scenario_s2(), ContractionParam(scalar(0.0)));
        const auto b = build_model_space(ev);
        const auto u = phi_star_universal(ev, b, TrigPoly{{1, 1.0}}, vec({1.0}));
        CHECK(std::abs(u.value.coeffs(0, 1) - 1.0) < 1e-10);
        CHECK(std::abs(u.value.coeffs(0, 0)) < 1e-10);
        CHECK(u.negative_part < 1e-10);
        CHECK_THROWS_AS(phi_star_universal(ev, b, TrigPoly{{40, 1.0}}, vec({1.0})), Error);
    }

    TEST_CASE("universal formula against the normalized Cauchy columns") {
        const auto r = random_scenario(4);
        CharFnEvaluator ev(r.measure, ContractionParam(r.gamma));
        const auto b = build_model_space(ev);
        const auto c = assemble_clark(ev, b);
        CHECK(c.unitarity < 1e-8);
        CHECK(c.intertwining < 1e-8);
        std::mt19937 rng(5);
        std::uniform_int_distribution<int> deg(-6, 6);
        std::normal_distribution<double> g;
        for (int t = 0; t < 20; ++t) {
            TrigPoly h;
            for (int k = 0; k < 3; ++k) h[deg(rng)] += cplx(g(rng), g(rng));
            CVector a(r.measure.d);
            for (auto& x : a) x = cplx(g(rng), g(rng));
            const auto u = phi_star_universal(ev, b, h, a);
            const CVector ref = c.columns * trig_times_b(r.measure, h, a);
            CHECK((flatten(u.value) - ref).norm() < 1e-8 * std::max(1.0, ref.norm()));
        }
    }

    TEST_CASE("C_* and C_1 at Gamma = 0") {
        CharFnEvaluator ev(scenario_s3(), ContractionParam(CMatrix::Zero(2, 2)));
        const CMatrix I = CMatrix::Identity(2, 2);
        for (cplx z : oracle::disk_points(9, 10, 0.9)) {
            const auto p = c1_cstar_eval(ev, z);
            CHECK(oracle::norm2(p.C_star.topRows(2) - I) < 1e-14);
            CHECK(p.C_star.bottomRows(2).norm() < 1e-14);
            CHECK(oracle::norm2(p.C1.topRows(2) - (I - ev.theta(z))) < 1e-14);
            CHECK(oracle::norm2(p.C1.bottomRows(2) + ev.delta(z)) < 1e-12);
            CHECK(p.psi1_residual < 1e-10);
        }
    }

    TEST_CASE("direct formula inverts the adjoint") {
        CharFnEvaluator e2(scenario_s2(), ContractionParam(scalar(0.0)));
        TaylorRep h = TaylorRep::zero(1, 4);
        h.coeffs(0, 0) = h.coeffs(0, 1) = 0.5;
        const auto r = phi_direct(e2, h);
        CHECK(std::abs(r.fiber_values(0) - 1.0) < 1e-6);
        CHECK(std::abs(r.fiber_values(1)) < 1e-6);

        CharFnEvaluator e3(scenario_s3(), ContractionParam(random_contraction(2, 2, 0.6)));
        const CVector f = vec({cplx(1, 2), -0.5, cplx(0, 0.3)});
        const auto hf = phi_star_nf(e3, f, 48);
        CHECK((phi_direct(e3, hf).fiber_values - f).norm() < 1e-6);
    }

    TEST_CASE("Psi_+ and Psi_- splits in the inner case") {
        const auto r = random_scenario(2);
        CharFnEvaluator ev(r.measure, ContractionParam(r.gamma));
        CVector f(r.measure.total_dim());
        for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = cplx(std::cos(k + 1.0), std::sin(2.0 * k));
        const auto b = build_model_space(ev);
        const auto hf = phi_star_nf(ev, f, b.theta.K());
        const auto grid = offset_grid(r.measure, 16);
        const auto sp = psi_pm_split(ev, hf, f, Side::Inside, grid);
        const auto sm = psi_pm_split(ev, hf, f, Side::Outside, grid);
        const double s = std::max(1.0, fiber_to_embedded(r.measure, f).norm());
        CHECK(sp.total_vs_nf / s < 1e-7);
        CHECK(sm.total_vs_nf / s < 1e-7);
        CHECK(sp.psi_columns < 1e-7);
        CHECK((sp.singular - sm.singular).cwiseAbs().maxCoeff() / s < 1e-7);
        for (cplx xi : grid) CHECK(op_norm(psi2_tilde(ev, xi).tilde) < 1e-6);
    }

    TEST_CASE("tilde Psi_2 for an a.c. measure with a rank-deficient density") {
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
        CMatrix g(2, 2);
        g << 0.3, cplx(0.1, 0.1), 0, -0.2;
        CharFnEvaluator ev(m, ContractionParam(g));
        for (double t : {0.07, 0.33, 0.81}) {
            const cplx xi = std::polar(1.0, 2 * M_PI * t);
            const CMatrix Bx = a.eval(xi);
            const auto p = psi2_tilde(ev, xi);
            CHECK(p.form_gap < 1e-10);
            CHECK(oracle::norm2(p.tilde.adjoint() * p.tilde - Bx.adjoint() * Bx) < 1e-10);
            // any right inverse gives the same Psi_2
            const CMatrix R1 = pinv(Bx);
            const CMatrix R2 = R1 + null_basis(Bx) * CMatrix::Constant(1, 1, cplx(0.7, -1.1));
            CHECK(oracle::norm2(psi2_eval(ev, xi, R1) - psi2_eval(ev, xi, R2)) < 1e-10);
        }
        // the quadrature stand-in is rejected by the model-space numerics
        CharFnEvaluator eq(ac_approximation(a, 64), ContractionParam(g));
        CHECK_THROWS_AS(phi_star_nf_columns(eq, 8), Error);
    }

    TEST_CASE("singular integral bounds") {
        CharFnEvaluator ev(scenario_s3(), ContractionParam(random_contraction(3, 2, 0.7)));
        const auto b = sio_bounds(ev, 32, 10, {0.5, 0.9, 0.99, 1.01, 1.5}, 1, 1024);
        CHECK(b.max_ratio_Pn <= 2.0 * (1.0 + 1e-3));
        CHECK(b.max_ratio_Tr <= 2.0 * (1.0 + 1e-3));
        CHECK(b.max_ratio_Pn > 0.0);
        CHECK(b.radial_errors.back() < 1e-2 * b.radial_errors.front());
    }
}
