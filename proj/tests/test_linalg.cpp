#include <doctest.h>

#include "clarklab/linalg.hpp"
#include "oracles.hpp"

using namespace clarklab;

TEST_SUITE("linalg") {
    TEST_CASE("herm_sqrt squares back and rejects indefinite input") {
        const CMatrix g = CMatrix::Random(4, 4);
        const CMatrix a = g * g.adjoint();
        const CMatrix s = herm_sqrt(HermMatrix(a));
        CHECK(oracle::norm2(s * s - a) < 1e-12);
        CHECK(oracle::norm2(s - s.adjoint()) < 1e-14);
        CMatrix bad = CMatrix::Identity(2, 2);
        bad(1, 1) = -0.5;
        CHECK_THROWS_AS(herm_sqrt(HermMatrix(bad)), Error);
    }

    TEST_CASE("zero_below removes round-off square roots") {
        CMatrix a = CMatrix::Zero(2, 2);
        a(0, 0) = 1.0;
        a(1, 1) = 1e-17;
        CHECK(std::abs(herm_sqrt(HermMatrix(a))(1, 1)) > 1e-9);
        CHECK(herm_sqrt(HermMatrix(a), 1e-10, 1e-13)(1, 1) == cplx(0.0));
    }

    TEST_CASE("HermMatrix checks symmetry") {
        CMatrix a(2, 2);
        a << 1, 2, 0, 1;
        CHECK_THROWS_AS(HermMatrix{a}, Error);
    }

    TEST_CASE("herm_power matches diagonal arithmetic") {
        CMatrix a = CMatrix::Zero(2, 2);
        a(0, 0) = 4.0;
        a(1, 1) = 0.25;
        const CMatrix p = herm_power(HermMatrix(a), -0.5);
        CHECK(std::abs(p(0, 0) - 0.5) < 1e-14);
        CHECK(std::abs(p(1, 1) - 2.0) < 1e-14);
    }

    TEST_CASE("pinv satisfies the Moore-Penrose conditions") {
        const CMatrix a = CMatrix::Random(3, 5);
        const CMatrix p = pinv(a);
        CHECK(oracle::norm2(a * p * a - a) < 1e-12);
        CHECK(oracle::norm2(p * a * p - p) < 1e-12);
        CHECK(oracle::norm2((a * p).adjoint() - a * p) < 1e-12);
        CHECK(oracle::norm2(a * p - CMatrix::Identity(3, 3)) < 1e-12);  // full row rank: right inverse
    }

    TEST_CASE("woodbury inverse equals the dense inverse") {
        const int n = 6, d = 2;
        const CMatrix c = 0.3 * CMatrix::Random(n, d);
        const CMatrix dd = 0.3 * CMatrix::Random(d, d);
        const CMatrix bs = 0.3 * CMatrix::Random(d, n);
        const CMatrix dense = (CMatrix::Identity(n, n) - c * dd * bs).inverse();
        CHECK(oracle::norm2(woodbury_inverse(c, dd, bs) - dense) < 1e-12);
    }

    TEST_CASE("singular systems raise SingularCore") {
        CMatrix a = CMatrix::Zero(2, 2);
        a(0, 0) = 1.0;
        try {
            solve_checked(a, CMatrix::Identity(2, 2));
            FAIL("expected SingularCore");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SingularCore);
        }
        CHECK_THROWS_AS(inverse_checked(a), Error);
    }

    TEST_CASE("rank, range and kernel") {
        CMatrix a(3, 3);
        a << 1, 2, 3, 2, 4, 6, 0, 1, 1;
        CHECK(numerical_rank(a) == 2);
        const CMatrix r = range_basis(a);
        const CMatrix k = null_basis(a);
        CHECK(r.cols() == 2);
        CHECK(k.cols() == 1);
        CHECK(oracle::norm2(a * k) < 1e-12);
        CHECK(oracle::norm2(r.adjoint() * r - CMatrix::Identity(2, 2)) < 1e-12);
        CHECK(std::abs(op_norm(CMatrix::Identity(3, 3) * 2.0) - 2.0) < 1e-14);
    }
}
