#include "doctest.h"
#include "test_support.hpp"

#include "ddirac/dirac_system.hpp"
#include "ddirac/inverse_spectral.hpp"
#include "ddirac/pseudoexp.hpp"
#include "ddirac/szego.hpp"

using namespace ddirac;

namespace {

PotentialSequence identity_system(int p, std::size_t N) {
  const SignatureContext ctx(p);
  return PotentialSequence(ctx, std::vector<CMatrix>(N + 1, ctx.identity()));
}

PotentialSequence example_system(std::size_t N, double a = 1.0, cplx phi = 1.0, cplx psi = 1.0) {
  return generate(Example41(a, phi, psi).params(), N).potentials;
}

CMatrix c0_example() {
  CMatrix C(2, 2);
  C << 1.5, cplx(1.0, 0.5), cplx(1.0, -0.5), 1.5;
  return C;
}

}  // namespace

TEST_CASE("validate") {
  SUBCASE("identity potentials") {
    const auto rep = validate(identity_system(2, 4));
    CHECK(rep.pass);
    for (const auto& s : rep.steps) {
      CHECK(s.hermitian_residual == 0.0);
      CHECK(s.j_residual == 0.0);
      CHECK(s.min_eig == doctest::Approx(1.0));
    }
  }
  SUBCASE("example sequence passes") { CHECK(validate(example_system(10)).pass); }
  SUBCASE("C j C = j violation is reported, not thrown") {
    CMatrix C = CMatrix::Zero(2, 2);
    C(0, 0) = 2.0;
    C(1, 1) = 1.0;
    const auto rep = validate(PotentialSequence(SignatureContext(1), {C}));
    CHECK_FALSE(rep.pass);
    CHECK(rep.first_failure == 0);
    CHECK(rep.steps[0].j_residual > 0.5);
  }
}

TEST_CASE("propagate") {
  const auto ex = example_system(3);
  CHECK(ddt::max_entry_diff(propagate(ex, cplx(0.7, -0.2), 0), CMatrix::Identity(2, 2)) == 0.0);

  const CMatrix W1 = propagate(identity_system(1, 0), cplx(1.0), 1);
  CHECK(std::abs(W1(0, 0) - cplx(1.0, -1.0)) < 1e-15);
  CHECK(std::abs(W1(1, 1) - cplx(1.0, 1.0)) < 1e-15);
  CHECK(std::abs(W1(0, 1)) < 1e-15);

  CMatrix expected(2, 2);
  expected << cplx(1.0, -1.5), cplx(0.5, -1.0), cplx(0.5, 1.0), cplx(1.0, 1.5);
  CHECK(ddt::max_entry_diff(propagate(ex, cplx(1.0), 1), expected) < 1e-14);

  for (cplx l : {cplx(1, -1), cplx(0, -2), cplx(3, -0.5), cplx(-0.4, 0.9)}) {
    CHECK(ddt::max_entry_diff(propagate(ex, l, 4), ddt::oracle_propagate(ex, l, 4)) < 1e-13);
  }
  CHECK_THROWS_AS(propagate(ex, cplx(0.0), 1), Error);
  CHECK_THROWS_AS(propagate(ex, cplx(1.0), 5), Error);
}

TEST_CASE("q_weight") {
  CHECK(q_weight(cplx(0, -1)) == doctest::Approx(0.5));
  CHECK(q_weight(cplx(1, -1)) == doctest::Approx(2.0 / 3.0));
  CHECK(q_weight(cplx(0, 3)) == doctest::Approx(0.9));
}

TEST_CASE("summation formula") {
  CHECK(summation_residual(identity_system(1, 3), cplx(0, -0.5), 3) < 1e-12);
  CHECK(summation_residual(example_system(10), cplx(1, -1), 10) < 1e-10);
  ddt::reseed(11);
  const auto sys = szego_to_dirac(ddt::random_block_szego(2, 6));
  CHECK(summation_residual(sys, cplx(0, -2), 5) < 1e-10);
  try {
    summation_residual(sys, cplx(2.0), 2);
    FAIL("expected RealLambda");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RealLambda);
  }
}

TEST_CASE("one-step and monodromy j-identities") {
  ddt::reseed(12);
  const auto sys = szego_to_dirac(ddt::random_block_szego(2, 21));
  for (cplx l : {cplx(0.5, 0.0), cplx(0.0, -4.0), cplx(1.0, -1.0), cplx(-2.0, 1.5)}) {
    for (const auto& C : sys.potentials()) CHECK(step_j_residual(sys.ctx(), C, l) < 1e-12 * norm(C) * norm(C));
    CHECK(monodromy_j_residual(sys, l) < 1e-9);
  }
  const auto ex = example_system(20);
  CHECK(monodromy_j_residual(ex, cplx(0.3, -0.6)) < 1e-9);
}

TEST_CASE("weyl_disk_eval") {
  SUBCASE("identity system") {
    const MoebiusPair pair(CMatrix::Zero(2, 2), CMatrix::Identity(2, 2));
    const CMatrix phi = weyl_disk_eval(identity_system(2, 3), pair, cplx(0, -1));
    CHECK(ddt::max_entry_diff(phi, -kI * CMatrix::Identity(2, 2)) < 1e-14);
  }
  SUBCASE("two valid pairs share the first N+1 coefficients") {
    const auto ex = example_system(5);
    const MoebiusPair a(CMatrix::Zero(1, 1), CMatrix::Identity(1, 1));
    const MoebiusPair b(0.5 * CMatrix::Identity(1, 1), CMatrix::Identity(1, 1));
    const auto ta = disk_taylor(ex, a, 5);
    const auto tb = disk_taylor(ex, b, 5);
    for (std::size_t k = 0; k <= 5; ++k) CHECK(norm(ta.alpha[k] - tb.alpha[k]) < 1e-6);
    // Both pin down the same coefficients as the direct problem.
    const auto direct = direct_taylor(ex);
    for (std::size_t k = 0; k <= 5; ++k) CHECK(norm(ta.alpha[k] - direct[k]) < 1e-6);
  }
  SUBCASE("invalid pairs") {
    CHECK_THROWS_AS(MoebiusPair(CMatrix::Zero(1, 1), CMatrix::Zero(1, 1)), Error);
    CHECK_THROWS_AS(MoebiusPair(2.0 * CMatrix::Identity(1, 1), CMatrix::Identity(1, 1)), Error);
  }
  SUBCASE("upper half-plane is rejected") {
    const MoebiusPair pair(CMatrix::Zero(1, 1), CMatrix::Identity(1, 1));
    CHECK_THROWS_AS(weyl_disk_eval(identity_system(1, 1), pair, cplx(0, 1)), Error);
  }
}

TEST_CASE("herglotz_map") {
  CHECK(ddt::max_entry_diff(herglotz_map(CMatrix::Zero(2, 2)), -kI * CMatrix::Identity(2, 2)) <
        1e-15);
  const CMatrix v = CMatrix::Constant(1, 1, cplx(-0.4, -0.2));
  CHECK(std::abs(herglotz_map(v)(0, 0) - cplx(1.0, -2.0)) < 1e-14);
  ddt::reseed(13);
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix X = ddt::random_matrix(2, 2);
    X *= 0.9 / Eigen::JacobiSVD<CMatrix>(X).singularValues()(0);
    const CMatrix K = herglotz_map(X);
    const CMatrix imag = (K - K.adjoint()) / (2.0 * kI);
    CHECK(hermitian_eigenvalues(imag).maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(herglotz_map(-CMatrix::Identity(1, 1)), Error);
}

TEST_CASE("weyl partial sums") {
  SUBCASE("r = 0 with phi = 0 picks the lower-right block of C_0") {
    const auto ex = example_system(2);
    auto zero = [](cplx) { return CMatrix::Zero(1, 1); };
    const CMatrix s = weyl_partial_sum(ex, zero, cplx(0, -1), 0, WeylConvention::Identity);
    CHECK(std::abs(s(0, 0) - c0_example()(1, 1)) < 1e-14);
  }
  SUBCASE("explicit Weyl function is monotone and bounded; a constant is not") {
    const auto ex = example_system(60);
    const Example41 e(1.0, 1.0, 1.0);
    const cplx l(0, -2);
    const double bound = weyl_sum_bound(l);
    auto weyl = [&](cplx x) { return e.weyl(x); };
    const auto sums = weyl_partial_sums(ex, weyl, l, 30, WeylConvention::Identity);
    for (std::size_t r = 1; r < sums.size(); ++r) {
      CHECK(sums[r](0, 0).real() >= sums[r - 1](0, 0).real() - 1e-12);
    }
    CHECK(sums.back()(0, 0).real() < bound);
    auto wrong = [](cplx) { return CMatrix::Constant(1, 1, 0.9); };
    const auto bad = weyl_partial_sums(ex, wrong, l, 60, WeylConvention::Identity);
    CHECK(bad.back()(0, 0).real() > bound);
  }
  SUBCASE("K convention sums are Hermitian and nondecreasing") {
    ddt::reseed(14);
    const auto params = ddt::random_normalized_bdt(2, 2);
    const auto sys = generate(params, 20).potentials;
    auto weyl = [&](cplx x) { return herglotz_map(explicit_weyl(params, x)); };
    const auto sums = weyl_partial_sums(sys, weyl, cplx(0.5, -1.0), 20, WeylConvention::K);
    for (std::size_t r = 1; r < sums.size(); ++r) {
      CHECK(hermitian_residual(sums[r]) < 1e-12);
      CHECK(hermitian_eigenvalues(sums[r] - sums[r - 1]).minCoeff() > -1e-10);
    }
  }
}
