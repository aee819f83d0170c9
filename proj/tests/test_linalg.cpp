#include "doctest.h"
#include "test_support.hpp"

#include "ddirac/linalg.hpp"

using namespace ddirac;

TEST_CASE("signature matrices satisfy their algebraic relations") {
  for (int p : {1, 2, 3}) {
    const SignatureContext ctx(p);
    const CMatrix I = ctx.identity();
    CHECK(ddt::max_entry_diff(ctx.j() * ctx.j(), I) < 1e-15);
    CHECK(ddt::max_entry_diff(ctx.J() * ctx.J(), I) < 1e-15);
    CHECK(ddt::max_entry_diff(ctx.K().adjoint() * ctx.K(), I) < 1e-15);
    CHECK(ddt::max_entry_diff(ctx.K() * ctx.K().adjoint(), I) < 1e-15);
    CHECK(ddt::max_entry_diff(ctx.K() * ctx.j() * ctx.K().adjoint(), ctx.J()) < 1e-15);
  }
}

TEST_CASE("hermitian_sqrt") {
  SUBCASE("identity and diagonal") {
    CHECK(ddt::max_entry_diff(hermitian_sqrt(CMatrix::Identity(4, 4)), CMatrix::Identity(4, 4)) <
          1e-15);
    CMatrix D = CMatrix::Zero(2, 2);
    D(0, 0) = 4.0;
    D(1, 1) = 9.0;
    const CMatrix R = hermitian_sqrt(D);
    CHECK(std::abs(R(0, 0) - 2.0) < 1e-14);
    CHECK(std::abs(R(1, 1) - 3.0) < 1e-14);
    CHECK(std::abs(R(0, 1)) < 1e-14);
  }
  SUBCASE("random PD squares back") {
    ddt::reseed(1);
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix M = ddt::random_pd(4, 0.1);
      const CMatrix R = hermitian_sqrt(M);
      CHECK(norm(R * R - M) < 1e-12 * norm(M));
      CHECK(hermitian_residual(R) < 1e-14 * norm(R));
      CHECK(min_eigenvalue(R) > 0.0);
    }
  }
  SUBCASE("errors") {
    CMatrix A = CMatrix::Identity(2, 2);
    A(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_sqrt(A), Error);
    try {
      hermitian_sqrt(A);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotHermitian);
    }
    CMatrix B = CMatrix::Identity(2, 2);
    B(1, 1) = -1.0;
    try {
      hermitian_sqrt(B);
      FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    }
  }
}

TEST_CASE("rank_p_factor") {
  SUBCASE("projector gives the canonical factor") {
    for (int p : {1, 2}) {
      CMatrix G = CMatrix::Zero(2 * p, 2 * p);
      G.topLeftCorner(p, p).setIdentity();
      const CMatrix b = rank_p_factor(G, p);
      CMatrix expected = CMatrix::Zero(p, 2 * p);
      expected.leftCols(p).setIdentity();
      CHECK(ddt::max_entry_diff(b, expected) < 1e-14);
    }
  }
  SUBCASE("example potential factor satisfies both identities") {
    const SignatureContext ctx(1);
    ddt::ScalarExampleOracle o{1.0, 1.0, 1.0};
    CMatrix C0(2, 2);
    C0 << o.diagonal(0), std::conj(o.lower(0)), o.lower(0), o.diagonal(0);
    const CMatrix G = 0.5 * (C0 + ctx.j());
    const CMatrix b = rank_p_factor(G, 1);
    CHECK(norm(b.adjoint() * b - G) < 1e-11 * norm(G));
    CHECK(norm(b * ctx.j() * b.adjoint() - CMatrix::Identity(1, 1)) < 1e-12);
  }
  SUBCASE("random rank-p inputs and determinism") {
    ddt::reseed(2);
    for (int trial = 0; trial < 10; ++trial) {
      const CMatrix X = ddt::random_matrix(2, 4);
      const CMatrix G = X.adjoint() * X;
      const CMatrix b1 = rank_p_factor(G, 2);
      const CMatrix b2 = rank_p_factor(G, 2);
      CHECK(norm(b1.adjoint() * b1 - G) < 1e-11 * norm(G));
      CHECK(ddt::max_entry_diff(b1, b2) == 0.0);
    }
  }
  SUBCASE("rank mismatch and indefinite input") {
    CMatrix G = CMatrix::Zero(2, 2);
    G(0, 0) = 1.0;
    G(1, 1) = 1e-3;
    try {
      rank_p_factor(G, 1);
      FAIL("expected RankMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RankMismatch);
    }
    G(1, 1) = -0.5;
    try {
      rank_p_factor(G, 1);
      FAIL("expected NotPSD");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotPSD);
    }
  }
}

TEST_CASE("block_toeplitz") {
  SUBCASE("trivial symbol") {
    std::vector<CMatrix> a{CMatrix::Identity(2, 2), CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)};
    CHECK(ddt::max_entry_diff(block_toeplitz(a), 2.0 * CMatrix::Identity(6, 6)) == 0.0);
  }
  SUBCASE("scalar substitution") {
    const cplx x(0.3, -0.7);
    std::vector<CMatrix> a{CMatrix::Constant(1, 1, cplx(2.0, 1.0)), CMatrix::Constant(1, 1, x)};
    const CMatrix S = block_toeplitz(a);
    CHECK(S(0, 0) == cplx(4.0, 0.0));
    CHECK(S(1, 1) == cplx(4.0, 0.0));
    CHECK(S(0, 1) == std::conj(x));
    CHECK(S(1, 0) == x);
  }
  SUBCASE("hermitian and constant along block diagonals") {
    ddt::reseed(3);
    const int p = 2;
    std::vector<CMatrix> a;
    for (int k = 0; k < 5; ++k) a.push_back(ddt::random_matrix(p, p));
    const CMatrix S = block_toeplitz(a);
    CHECK(hermitian_residual(S) == 0.0);
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) {
        const CMatrix blk = S.block(r * p, c * p, p, p);
        const int d = c - r;
        CMatrix expected;
        if (d == 0) expected = a[0] + a[0].adjoint();
        else if (d < 0) expected = a[static_cast<std::size_t>(-d)];
        else expected = a[static_cast<std::size_t>(d)].adjoint();
        CHECK(ddt::max_entry_diff(blk, expected) == 0.0);
      }
    }
  }
}

TEST_CASE("pd_solve and conditioning helpers") {
  ddt::reseed(4);
  const CMatrix B = ddt::random_matrix(3, 2);
  CHECK(ddt::max_entry_diff(pd_solve(CMatrix::Identity(3, 3), B), B) < 1e-15);
  CHECK(ddt::max_entry_diff(pd_solve(2.0 * CMatrix::Identity(3, 3), B), 0.5 * B) < 1e-15);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix S = ddt::random_pd(5, 0.5);
    const CMatrix R = ddt::random_matrix(5, 3);
    CHECK(norm(S * pd_solve(S, R) - R) / norm(R) < 1e-10);
  }
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  try {
    pd_solve(bad, CMatrix::Identity(2, 2));
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
  }
  CHECK(condition_number(CMatrix::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(std::isinf(condition_number(CMatrix::Zero(2, 2))));
  try {
    checked_solve(CMatrix::Zero(2, 2), CMatrix::Identity(2, 2), 1e12, ErrorCode::SingularShift,
                  "test");
    FAIL("expected SingularShift");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularShift);
  }
}
