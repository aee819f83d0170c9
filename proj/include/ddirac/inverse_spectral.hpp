#pragma once

#include "ddirac/dirac_system.hpp"
#include "ddirac/linalg.hpp"
#include "ddirac/pseudoexp.hpp"

#include <cstddef>
#include <vector>

namespace ddirac {

/// Taylor blocks alpha_0..alpha_N at z = 0 of i phi(i (z+1)/(z-1)), phi the
/// K-convention Weyl function. Only shapes are checked on construction;
/// positivity of the induced Toeplitz matrices is checked by the consumers.
class TaylorSequence {
 public:
  TaylorSequence(int p, std::vector<CMatrix> alpha);

  int p() const noexcept { return p_; }
  std::size_t size() const noexcept { return alpha_.size(); }
  std::size_t last_index() const noexcept { return alpha_.size() - 1; }
  const CMatrix& operator[](std::size_t k) const { return alpha_.at(k); }
  const std::vector<CMatrix>& blocks() const noexcept { return alpha_; }
  TaylorSequence prefix(std::size_t count) const;

 private:
  int p_;
  std::vector<CMatrix> alpha_;
};

/// Factors beta(k) (p x 2p) with beta J beta* = I_p.
class BetaSequence {
 public:
  BetaSequence(SignatureContext ctx, std::vector<CMatrix> beta, const NumericPolicy& policy = {});

  const SignatureContext& ctx() const noexcept { return ctx_; }
  int p() const noexcept { return ctx_.p(); }
  std::size_t size() const noexcept { return beta_.size(); }
  const CMatrix& operator[](std::size_t k) const { return beta_.at(k); }
  const std::vector<CMatrix>& blocks() const noexcept { return beta_; }

 private:
  SignatureContext ctx_;
  std::vector<CMatrix> beta_;
};

/// Block lower triangular Toeplitz A(N) = {a_{j-k}}: a_0 = (i/2) I,
/// a_r = i I for r < 0, zero above the diagonal.
struct StructuredA {
  std::size_t N;
  int p;
  CMatrix dense() const;
};

/// Pi = [Phi1 Phi2] with Phi1 the stack of identities and Phi2 the partial
/// sums alpha_0 + ... + alpha_k.
CMatrix taylor_pi(const TaylorSequence& alpha, std::size_t r);

/// beta(k) = rank_p_factor((C_k + j)/2) K*.
BetaSequence beta_from_potentials(const PotentialSequence& sys, const NumericPolicy& policy = {});

/// Potentials C_k = 2 K* beta(k)* beta(k) K - j.
PotentialSequence potentials_from_beta(const BetaSequence& beta);

struct DirectDiagnostics {
  double phi1_residual = 0.0;   // max |Pi(:, first block col) - Phi1|, relative
  std::vector<double> v_minus_condition;
};

/// Taylor coefficients of the Weyl function from the potentials, through the
/// block lower triangular V_-(N) with V_-(N)^{-1} B(N) = [Phi1 Phi2].
TaylorSequence direct_taylor(const PotentialSequence& sys, const NumericPolicy& policy = {});
TaylorSequence direct_taylor(const BetaSequence& beta, const NumericPolicy& policy = {},
                             DirectDiagnostics* diagnostics = nullptr);

enum class ToeplitzSolver { Cholesky, Levinson };

struct InverseDiagnostics {
  std::vector<double> jnorm_residuals;   // relative, per r
  std::vector<double> toeplitz_min_eig;  // Cholesky path: min eig of S(r); Levinson: of E_b(r)
};

/// Potentials from Taylor coefficients via the nested block Toeplitz S(r).
PotentialSequence inverse_potentials(const TaylorSequence& alpha,
                                     ToeplitzSolver solver = ToeplitzSolver::Cholesky,
                                     const NumericPolicy& policy = {},
                                     InverseDiagnostics* diagnostics = nullptr);

/// ||A(N) S - S A(N)* - i Pi J Pi*|| for S = block_toeplitz(alpha).
double lyapunov_residual(const TaylorSequence& alpha);

/// Minimal eigenvalue of S(0)..S(N).
std::vector<double> toeplitz_positivity(const TaylorSequence& alpha);

struct TaylorExtraction {
  TaylorSequence alpha;
  double error_estimate = 0.0;  // |alpha_{N+1}| rho
};

struct ExtractionOptions {
  double radius = 0.5;
  std::size_t samples = 512;
};

/// Taylor blocks 0..N of a p x p function analytic on |z| <= radius, by
/// discrete Fourier sums over the circle |z| = radius.
TaylorExtraction extract_taylor(const std::function<CMatrix(cplx)>& f, int p, std::size_t N,
                                const ExtractionOptions& options = {});

/// Taylor coefficients of i phi_K(lambda(z)) for the rational Weyl function of
/// BDT parameters (phi_I from the realization, mapped by herglotz_map).
TaylorExtraction rational_taylor(const BdtParameters& params, std::size_t N,
                                 const ExtractionOptions& options = {},
                                 const NumericPolicy& policy = {});
TaylorExtraction rational_taylor(const WeylRealization& rz, std::size_t N,
                                 const ExtractionOptions& options = {},
                                 const NumericPolicy& policy = {});

/// Taylor coefficients of i phi(lambda(z)) for an interval Weyl function
/// given by a constant Moebius pair.
TaylorExtraction disk_taylor(const PotentialSequence& sys, const MoebiusPair& pair, std::size_t N,
                             const ExtractionOptions& options = {},
                             const NumericPolicy& policy = {});

struct BorgMarchenkoReport {
  bool coefficients_agree = false;   // k <= N
  bool potentials_agree = false;     // k <= N
  double max_coefficient_deviation = 0.0;
  double max_potential_deviation = 0.0;
  std::size_t first_coefficient_mismatch = Error::npos;  // over all common indices
  std::size_t first_potential_mismatch = Error::npos;
};

BorgMarchenkoReport borg_marchenko_check(const PotentialSequence& a, const PotentialSequence& b,
                                         std::size_t N, double tolerance = 1e-8,
                                         const NumericPolicy& policy = {});

}  // namespace ddirac
