#include "doctest.h"
#include "test_support.hpp"

#include "ddirac/szego.hpp"

using namespace ddirac;

TEST_CASE("schur_to_R on a fixed pair") {
  const SchurCoefficients rho({cplx(0.3, 0.0), cplx(0.0, -0.2)});
  const auto sz = schur_to_R(rho);
  REQUIRE(sz.size() == 2);
  const double t0 = std::sqrt(1.0 - 0.09);
  CHECK(std::abs(sz.R()[0](0, 0) - 1.0 / t0) < 1e-15);
  CHECK(std::abs(sz.R()[0](0, 1) - (-0.3 / t0)) < 1e-15);
  CHECK(std::abs(sz.theta()[0] - t0) < 1e-15);
  const SignatureContext ctx(1);
  for (const auto& R : sz.R()) CHECK(norm(R * ctx.j() * R - ctx.j()) < 1e-14);
  const auto back = schur_coeffs(sz);
  CHECK(std::abs(back.values()[0] - cplx(0.3, 0.0)) < 1e-15);
  CHECK(std::abs(back.values()[1] - cplx(0.0, -0.2)) < 1e-15);
}

TEST_CASE("Schur coefficients must lie in the open disk") {
  CHECK_THROWS_AS(SchurCoefficients({cplx(0.6, 0.8)}), Error);
  try {
    SchurCoefficients({0.1, 1.5});
    FAIL("expected ModulusAtLeastOne");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ModulusAtLeastOne);
    CHECK(e.index() == 1);
  }
  CHECK_THROWS_AS(schur_coeffs(ddt::random_block_szego(2, 2)), Error);
}

TEST_CASE("SzegoSequence rejects R without R j R = j") {
  const SignatureContext ctx(1);
  CMatrix R = CMatrix::Identity(2, 2);
  R(0, 0) = 2.0;
  try {
    SzegoSequence(ctx, {R}, {1.0});
    FAIL("expected InvariantViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvariantViolated);
  }
}

TEST_CASE("Schur round trip is exact") {
  ddt::reseed(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = ddt::random_schur(20, 0.9);
    const auto back = schur_coeffs(schur_to_R(rho));
    for (std::size_t k = 0; k < rho.size(); ++k) {
      CHECK(std::abs(back.values()[k] - rho.values()[k]) < 1e-12);
    }
  }
}

TEST_CASE("Szego to Dirac and back") {
  ddt::reseed(22);
  SUBCASE("scalar") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto sz = schur_to_R(ddt::random_schur(20));
      const auto sys = szego_to_dirac(sz);
      CHECK(validate(sys).pass);
      const auto back = dirac_to_szego(sys);
      for (std::size_t k = 0; k < sz.size(); ++k) {
        CHECK(ddt::max_entry_diff(back.R()[k], sz.R()[k]) < 1e-10);
        CHECK(std::abs(back.theta()[k] - sz.theta()[k]) < 1e-10);
      }
    }
  }
  SUBCASE("block p = 2") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto sz = ddt::random_block_szego(2, 12);
      const auto back = dirac_to_szego(szego_to_dirac(sz));
      for (std::size_t k = 0; k < sz.size(); ++k) {
        CHECK(ddt::max_entry_diff(back.R()[k], sz.R()[k]) < 1e-10);
      }
    }
  }
  SUBCASE("from potentials") {
    const auto sys = generate(Example41(2.0, 1.0, kI).params(), 20).potentials;
    const auto again = szego_to_dirac(dirac_to_szego(sys));
    CHECK(ddt::max_potential_diff(sys, again) < 1e-10);
  }
}

TEST_CASE("identity potentials give the trivial Szego data") {
  const SignatureContext ctx(2);
  const PotentialSequence sys(ctx, std::vector<CMatrix>(4, ctx.identity()));
  const auto sz = dirac_to_szego(sys);
  for (std::size_t k = 0; k < sz.size(); ++k) {
    CHECK(ddt::max_entry_diff(sz.R()[k], ctx.identity()) < 1e-14);
    CHECK(sz.theta()[k] == cplx(1.0, 0.0));
  }
}

TEST_CASE("dirac_to_szego requires positive potentials") {
  const SignatureContext ctx(1);
  CMatrix C = ctx.identity();
  C(1, 1) = -1.0;
  try {
    dirac_to_szego(PotentialSequence(ctx, {ctx.identity(), C}));
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    CHECK(e.index() == 1);
  }
}

TEST_CASE("gauges stay j-unitary") {
  ddt::reseed(23);
  const auto sz = ddt::random_block_szego(2, 20);
  CHECK(gauge_j_drift(sz) < 1e-9);
  const auto U = szego_gauges(sz, 3);
  CHECK(U.size() == 4);
  CHECK(ddt::max_entry_diff(U[0], sz.ctx().identity()) == 0.0);
  CHECK_THROWS_AS(szego_gauges(sz, 21), Error);
}

TEST_CASE("Cayley maps") {
  for (cplx z : {cplx(0.0, 0.0), cplx(0.3, -0.4), cplx(-0.7, 0.1)}) {
    CHECK(std::abs(cayley_z_of_lambda(cayley_lambda_of_z(z)) - z) < 1e-14);
    CHECK(std::abs(szego_z_of_lambda(szego_lambda_of_z(z)) - z) < 1e-14);
    // The open unit disk maps into the lower half-plane for the Taylor variable.
    CHECK(cayley_lambda_of_z(z).imag() < 0.0);
  }
  CHECK(std::abs(cayley_lambda_of_z(0.0) - cplx(0.0, -1.0)) < 1e-15);
  CHECK_THROWS_AS(cayley_lambda_of_z(1.0), Error);
  CHECK_THROWS_AS(cayley_z_of_lambda(kI), Error);
  CHECK_THROWS_AS(szego_z_of_lambda(-kI), Error);
  CHECK_THROWS_AS(szego_lambda_of_z(-1.0), Error);
}

TEST_CASE("Szego solutions map to Dirac solutions") {
  ddt::reseed(24);
  for (int p : {1, 2}) {
    const auto sz = p == 1 ? schur_to_R(ddt::random_schur(8)) : ddt::random_block_szego(p, 8);
    const auto sys = szego_to_dirac(sz);
    for (cplx z : {cplx(0.2, 0.5), cplx(-0.4, -0.3), cplx(1.5, 0.7)}) {
      // X_0 chosen so that the mapped solution starts at the identity.
      CMatrix X0 = CMatrix::Identity(2 * p, 2 * p);
      X0.topLeftCorner(p, p) /= z;
      const auto X = szego_propagate(sz, X0, 8, z);
      const cplx lambda = szego_lambda_of_z(z);
      const auto W = propagate_all(sys, lambda, 8);
      for (std::size_t k = 0; k <= 8; ++k) {
        const CMatrix mapped = szego_solution_map(sz, X[k], k, z);
        CHECK(norm(mapped - W[k]) < 1e-10 * std::max(1.0, norm(W[k])));
      }
    }
  }
}
