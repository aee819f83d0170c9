#pragma once

#include "ddirac/linalg.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace ddirac {

/// Potentials C_0..C_N of the discrete system
///   W_{k+1}(lambda) = (I - (i/lambda) j C_k) W_k(lambda).
/// Construction checks shapes only; use validate() for the structural
/// relations C = C*, C j C = j, C > 0.
class PotentialSequence {
 public:
  PotentialSequence(SignatureContext ctx, std::vector<CMatrix> potentials);

  const SignatureContext& ctx() const noexcept { return ctx_; }
  int p() const noexcept { return ctx_.p(); }
  std::size_t size() const noexcept { return C_.size(); }
  /// Index of the last potential (N); the sequence holds N + 1 matrices.
  std::size_t last_index() const noexcept { return C_.size() - 1; }
  const CMatrix& operator[](std::size_t k) const { return C_.at(k); }
  const std::vector<CMatrix>& potentials() const noexcept { return C_; }

  /// First `count` potentials.
  PotentialSequence prefix(std::size_t count) const;

 private:
  SignatureContext ctx_;
  std::vector<CMatrix> C_;
};

struct StepValidation {
  double hermitian_residual = 0.0;   // ||C - C*||
  double j_residual = 0.0;           // ||C j C - j||
  double min_eig = 0.0;              // of C
  double min_eig_plus_j = 0.0;       // of C + j
  double min_eig_minus_j = 0.0;      // of C - j
  double scale = 1.0;                // max(1, ||C||); thresholds are relative to it
  bool pass = false;
};

struct ValidationReport {
  std::vector<StepValidation> steps;
  bool pass = true;
  std::size_t first_failure = Error::npos;
};

/// Never throws on invalid potentials; callers decide what a failure means.
ValidationReport validate(const PotentialSequence& sys, const NumericPolicy& policy = {});

/// Spectral parameter; zero is rejected at construction.
class SpectralPoint {
 public:
  SpectralPoint(cplx lambda);  // NOLINT(google-explicit-constructor)
  cplx value() const noexcept { return lambda_; }
  bool in_lower_half_plane() const noexcept { return lambda_.imag() < 0.0; }

 private:
  cplx lambda_;
};

/// |lambda|^2 / (|lambda|^2 + 1).
double q_weight(SpectralPoint lambda);

/// One step factor I - (i/lambda) j C.
CMatrix step_factor(const SignatureContext& ctx, const CMatrix& C, SpectralPoint lambda);

/// W_k(lambda), W_0 = I. Requires k <= N + 1.
CMatrix propagate(const PotentialSequence& sys, SpectralPoint lambda, std::size_t k);

/// W_0 .. W_k.
std::vector<CMatrix> propagate_all(const PotentialSequence& sys, SpectralPoint lambda,
                                   std::size_t k);

/// Norm of the difference between the two sides of the summation formula
///   sum_{k<=r} q^k W_k* C_k W_k = (|l|^2+1)/(i(l - conj l)) (q^{r+1} W_{r+1}* j W_{r+1} - j).
double summation_residual(const PotentialSequence& sys, SpectralPoint lambda, std::size_t r);

/// ||(I + (i/l) C j) j (I - (i/l) j C) - (1 + 1/l^2) j|| for one potential.
double step_j_residual(const SignatureContext& ctx, const CMatrix& C, SpectralPoint lambda);

/// Relative residual of W_{N+1}(l) j W_{N+1}(conj l)* = ((l+i)(l-i)/l^2)^{N+1} j,
/// normalized by ||W_{N+1}(l)|| ||W_{N+1}(conj l)||.
double monodromy_j_residual(const PotentialSequence& sys, SpectralPoint lambda);

/// Constant pair (R, Q) of p x p matrices with R*R + Q*Q > 0 and R*R <= Q*Q.
class MoebiusPair {
 public:
  MoebiusPair(CMatrix R, CMatrix Q, const NumericPolicy& policy = {});
  const CMatrix& R() const noexcept { return R_; }
  const CMatrix& Q() const noexcept { return Q_; }

 private:
  CMatrix R_;
  CMatrix Q_;
};

/// Interval Weyl function value
///   phi(l) = i (W21 R + W22 Q)(W11 R + W12 Q)^{-1},  W = K W_{N+1}(conj l)*.
CMatrix weyl_disk_eval(const PotentialSequence& sys, const MoebiusPair& pair,
                       SpectralPoint lambda, const NumericPolicy& policy = {});

/// phi_K = -i (I - phi_I)(I + phi_I)^{-1}.
CMatrix herglotz_map(const CMatrix& phi_identity, const NumericPolicy& policy = {});

enum class WeylConvention { Identity, K };

using MatrixFunction = std::function<CMatrix(cplx)>;

/// Partial sums r' = 0..r of the Weyl quadratic form in the chosen convention.
std::vector<CMatrix> weyl_partial_sums(const PotentialSequence& sys, const MatrixFunction& phi,
                                       SpectralPoint lambda, std::size_t r,
                                       WeylConvention convention);

CMatrix weyl_partial_sum(const PotentialSequence& sys, const MatrixFunction& phi,
                         SpectralPoint lambda, std::size_t r, WeylConvention convention);

/// (|l|^2 + 1) / (i (l - conj l)), the upper bound for identity-convention partial sums.
double weyl_sum_bound(SpectralPoint lambda);

}  // namespace ddirac
