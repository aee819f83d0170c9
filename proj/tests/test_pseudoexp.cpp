#include "doctest.h"
#include "test_support.hpp"

#include "ddirac/pseudoexp.hpp"

#include <numbers>

using namespace ddirac;

namespace {

const std::vector<ddt::ScalarExampleOracle> kExamples{
    {1.0, 1.0, 1.0},
    {2.0, 1.0, cplx(0.0, 1.0)},
    {-0.5, std::polar(1.0, std::numbers::pi / 5.0), 1.0},
};

const std::vector<cplx> kLambdas{cplx(1, -1), cplx(0, -2), cplx(3, -0.5), cplx(-0.4, 0.9),
                                 cplx(-2.0, -0.1)};

}  // namespace

TEST_CASE("BDT parameters must satisfy the identity") {
  CMatrix A(1, 1);
  A(0, 0) = 1.0;
  CMatrix Pi(1, 2);
  Pi << 1.0, 2.0;  // |Phi| != |Psi| breaks A S0 - S0 A* = i Pi j Pi*
  try {
    BdtParameters(A, CMatrix::Identity(1, 1), Pi);
    FAIL("expected IdentityViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IdentityViolated);
  }
  CHECK(Example41(1.0, 1.0, 1.0).params().identity_residual() < 1e-15);
  CHECK_THROWS_AS(Example41(1.0, 1.0, 2.0), Error);
}

TEST_CASE("scalar example: generated potentials match the closed forms") {
  for (const auto& o : kExamples) {
    const Example41 ex(o.a, o.phi, o.psi);
    const auto gen = generate(ex.params(), 50);
    for (std::size_t k = 0; k <= 50; ++k) {
      const CMatrix& C = gen.potentials[k];
      CHECK(std::abs(C(0, 0) - o.diagonal(k)) < 1e-10);
      CHECK(std::abs(C(1, 1) - o.diagonal(k)) < 1e-10);
      CHECK(std::abs(C(1, 0) - o.lower(k)) < 1e-10);
      CHECK(std::abs(C(0, 1) - std::conj(o.lower(k))) < 1e-10);
      CHECK(ddt::max_entry_diff(ex.potential(k), C) < 1e-10);
    }
    for (cplx l : kLambdas) {
      CHECK(std::abs(explicit_weyl(ex.params(), l)(0, 0) - o.weyl(l)) < 1e-12);
    }
  }
}

TEST_CASE("example41 helper pairs a potential with its Weyl function") {
  const auto [C, phi] = example41(1.0, 1.0, 1.0, 0);
  CHECK(std::abs(C(0, 0) - 1.5) < 1e-15);
  CHECK(std::abs(C(1, 0) - cplx(1.0, -0.5)) < 1e-15);
  CHECK(std::abs(phi(cplx(0, -1))(0, 0) - cplx(-0.4, -0.2)) < 1e-15);
}

TEST_CASE("generated systems satisfy the structural identities") {
  ddt::reseed(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto params = trial % 2 == 0 ? ddt::random_bdt(3, 2) : ddt::random_bdt(4, 1);
    const auto gen = generate(params, 20);
    CHECK(validate(gen.potentials).pass);
    CHECK(gen.states.size() == 22);
    for (double r : gen.identity_residuals) CHECK(r < 1e-10);
    for (cplx l : kLambdas) {
      for (std::size_t k = 0; k <= 20; ++k) CHECK(transfer_step_residual(params, gen, k, l) < 1e-10);
    }
  }
}

TEST_CASE("explicit fundamental solution matches propagation") {
  ddt::reseed(32);
  std::vector<BdtParameters> all{Example41(1.0, 1.0, 1.0).params()};
  for (int trial = 0; trial < 5; ++trial) all.push_back(ddt::random_normalized_bdt(4, 2));
  for (const auto& params : all) {
    const auto sys = generate(params, 8).potentials;
    for (cplx l : {cplx(1, -1), cplx(0.5, 2.0), cplx(-3.0, -0.7)}) {
      for (std::size_t k = 0; k <= 8; ++k) {
        const CMatrix W = propagate(sys, l, k);
        CHECK(norm(explicit_fundamental(params, k, l) - W) < 1e-9 * norm(W));
      }
    }
  }
}

TEST_CASE("normalization preserves the potentials") {
  ddt::reseed(33);
  const auto params = ddt::random_bdt(3, 1);
  const auto normed = normalize(params);
  CHECK(ddt::max_entry_diff(normed.S0(), CMatrix::Identity(3, 3)) < 1e-14);
  CHECK(normed.identity_residual() < 1e-10);
  CHECK(ddt::max_potential_diff(generate(params, 10).potentials,
                                generate(normed, 10).potentials) < 1e-9);
  for (cplx l : kLambdas) {
    CHECK(ddt::max_entry_diff(explicit_weyl(params, l), explicit_weyl(normed, l)) < 1e-10);
  }
}

TEST_CASE("realization and parameters are inverse to each other") {
  ddt::reseed(34);
  const auto rz = ddt::random_realization(3, 2);
  const auto params = realization_to_params(rz);
  CHECK(ddt::max_entry_diff(params.S0(), CMatrix::Identity(3, 3)) == 0.0);
  const auto back = params_to_realization(params);
  CHECK(ddt::max_entry_diff(back.theta(), rz.theta()) < 1e-13);
  for (cplx l : kLambdas) {
    CHECK(ddt::max_entry_diff(rz.evaluate(l), explicit_weyl(params, l)) < 1e-12);
  }
  // theta - theta* = i (PhiT PhiT* + PsiT PsiT*) is enforced.
  CHECK_THROWS_AS(WeylRealization(rz.theta().adjoint(), rz.PhiT(), rz.PsiT()), Error);
}

TEST_CASE("transfer at the first state") {
  const auto params = Example41(1.0, 1.0, 1.0).params();
  const auto states = bdt_states(params, 2);
  REQUIRE(states.size() == 3);
  const cplx l(0.0, -1.0);
  const CMatrix w = transfer(params, states[0], l);
  // w_A(0) = I - i j Pi0* (A - l)^{-1} Pi0 with A = 1, Pi0 = [1 1].
  const cplx r = 1.0 / (1.0 - l);
  CMatrix expected(2, 2);
  expected << 1.0 - kI * r, -kI * r, kI * r, 1.0 + kI * r;
  CHECK(ddt::max_entry_diff(w, expected) < 1e-15);
}
