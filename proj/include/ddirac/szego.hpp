#pragma once

#include "ddirac/dirac_system.hpp"
#include "ddirac/linalg.hpp"

#include <vector>

namespace ddirac {

/// Block Szego recurrence X_{k+1}(z) = theta_k R_k diag(z I, I) X_k(z)
/// with R_k = R_k* > 0 and R_k j R_k = j.
class SzegoSequence {
 public:
  /// Checks shapes, positivity and j-unitarity of every R_k.
  SzegoSequence(SignatureContext ctx, std::vector<CMatrix> R, std::vector<cplx> theta,
                const NumericPolicy& policy = {});

  const SignatureContext& ctx() const noexcept { return ctx_; }
  int p() const noexcept { return ctx_.p(); }
  std::size_t size() const noexcept { return R_.size(); }
  const std::vector<CMatrix>& R() const noexcept { return R_; }
  const std::vector<cplx>& theta() const noexcept { return theta_; }

 private:
  SignatureContext ctx_;
  std::vector<CMatrix> R_;
  std::vector<cplx> theta_;
};

/// Scalar Schur (Verblunsky) coefficients, |rho_k| < 1.
class SchurCoefficients {
 public:
  explicit SchurCoefficients(std::vector<cplx> rho);
  const std::vector<cplx>& values() const noexcept { return rho_; }
  std::size_t size() const noexcept { return rho_.size(); }

 private:
  std::vector<cplx> rho_;
};

/// Fixed theta rule: sqrt(1 - |rho|^2) for p = 1, 1 otherwise.
cplx theta_of(const SignatureContext& ctx, const CMatrix& R);

/// U_0 = I, U_{k+1} = U_k (i j R_k); returns U_0..U_count.
std::vector<CMatrix> szego_gauges(const SzegoSequence& sz, std::size_t count);

/// C_k = (U_k*)^{-1} R_k^2 U_k^{-1}.
PotentialSequence szego_to_dirac(const SzegoSequence& sz, const NumericPolicy& policy = {});

/// R_k = (U_k* C_k U_k)^{1/2}, U_{k+1} = U_k (i j R_k). Requires C_k > 0.
SzegoSequence dirac_to_szego(const PotentialSequence& sys, const NumericPolicy& policy = {});

SzegoSequence schur_to_R(const SchurCoefficients& rho);

/// rho_k = -(R_k)_{12} / (R_k)_{11}; p = 1 only.
SchurCoefficients schur_coeffs(const SzegoSequence& sz);

// Cayley maps. The disk variable of the Taylor expansion uses
//   lambda(z) = i (z + 1)/(z - 1),  z(lambda) = (lambda + i)/(lambda - i),
// while the Szego solution transform uses z = (1 + i lambda)/(1 - i lambda).
cplx cayley_lambda_of_z(cplx z);
cplx cayley_z_of_lambda(cplx lambda);
cplx szego_z_of_lambda(cplx lambda);
cplx szego_lambda_of_z(cplx z);

/// W_k(lambda) = ((i - 1/lambda)^k / prod_{r<k} theta_r) U_k diag(z I, I) X_k(z),
/// lambda = szego_lambda_of_z(z).
CMatrix szego_solution_map(const SzegoSequence& sz, const CMatrix& X, std::size_t k, cplx z);

/// Solution of the Szego recurrence X_0..X_k from a given X_0.
std::vector<CMatrix> szego_propagate(const SzegoSequence& sz, const CMatrix& X0, std::size_t k,
                                     cplx z);

/// Max ||U_k j U_k* - j|| over k <= N + 1 (drift diagnostic).
double gauge_j_drift(const SzegoSequence& sz);

}  // namespace ddirac
