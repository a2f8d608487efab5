#include <doctest.h>

#include "clarklab/dilation.hpp"
#include "oracles.hpp"

using namespace clarklab;

namespace {

CMatrix scalar(cplx g) { return CMatrix::Constant(1, 1, g); }

}  // namespace

TEST_SUITE("dilation") {
    TEST_CASE("T = 0 gives a truncated bilateral shift") {
        const auto op = build_T(embed(scenario_s1()), ContractionParam(scalar(0.0)));
        const auto dil = build_dilation(op, 4);
        REQUIRE(dil.size() == 9);
        // basis order: G_* cells 0..3, H, G cells 0..3; the shift walks G_*[3] -> ... -> G_*[0] -> H -> G[0] -> ...
        CMatrix want = CMatrix::Zero(9, 9);
        for (int k = 0; k < 3; ++k) want(k, k + 1) = 1.0;
        want(4, 0) = 1.0;
        want(5, 4) = 1.0;
        for (int k = 5; k < 8; ++k) want(k + 1, k) = 1.0;
        CHECK(oracle::norm2(dil.U - want) < 1e-15);
    }

    TEST_CASE("scalar T = [gamma]") {
        const cplx g(0.3, 0.4);
        const auto op = build_T(embed(scenario_s1()), ContractionParam(scalar(g)));
        const auto dil = build_dilation(op, 4);
        const double s = std::sqrt(1.0 - std::norm(g));
        const auto h = dil.h_offset(), gg = dil.g_offset();
        CHECK(std::abs(dil.U(h, h) - g) < 1e-15);
        CHECK(std::abs(dil.U(h, 0) - s) < 1e-15);
        CHECK(std::abs(dil.U(gg, h) - s) < 1e-15);
        CHECK(std::abs(dil.U(gg, 0) + std::conj(g)) < 1e-15);
    }

    TEST_CASE("S2 columns are orthonormal except the last shift cell") {
        const auto op = build_T(embed(scenario_s2()), ContractionParam(scalar(0.0)));
        const auto dil = build_dilation(op, 6);
        const auto keep = dil.size() - dil.d;
        const CMatrix c = dil.U.leftCols(keep);
        CHECK(oracle::norm2(c.adjoint() * c - CMatrix::Identity(keep, keep)) < 1e-14);
        CHECK(dil.U.rightCols(dil.d).norm() < 1e-15);
    }

    TEST_CASE("dilation property against dense powers") {
        const auto op1 = build_T(embed(scenario_s1()), ContractionParam(scalar(0.5)));
        const auto d1 = build_dilation(op1, 4);
        const auto r1 = dilation_property_check(d1, op1, 3);
        CHECK(r1.forward < 1e-12);
        CHECK(r1.backward < 1e-12);
        CHECK(dilation_property_check(d1, op1, 0).forward == 0.0);

        const auto op = build_T(embed(scenario_s3()), ContractionParam(random_contraction(31, 2, 0.8)));
        const auto dil = build_dilation(op, 8);
        const auto r = dilation_property_check(dil, op, 5);
        CHECK(r.forward < 1e-10);
        CHECK(r.backward < 1e-10);
        CHECK(r.isometry < 1e-12);
        CHECK(r.defect_block < 1e-12);
        // independent oracle: compress U^5 by hand
        const CMatrix U5 = dil.U * dil.U * dil.U * dil.U * dil.U;
        const CMatrix T5 = op.T * op.T * op.T * op.T * op.T;
        CHECK(oracle::norm2(U5.block(dil.h_offset(), dil.h_offset(), dil.n, dil.n) - T5) < 1e-12);
    }

    TEST_CASE("horizon limit") {
        const auto op = build_T(embed(scenario_s1()), ContractionParam(scalar(0.5)));
        const auto dil = build_dilation(op, 4);
        try {
            dilation_property_check(dil, op, 4);
            FAIL("expected HorizonTooLarge");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::HorizonTooLarge);
        }
    }
}
