#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddirac {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

enum class ErrorCode {
  DimensionMismatch,
  IndexOutOfRange,
  NotHermitian,
  NotPositiveDefinite,
  NotPSD,
  RankMismatch,
  LambdaZero,
  RealLambda,
  NotLowerHalfPlane,
  InvalidPair,
  SingularDenominator,
  SingularShift,
  ModulusAtLeastOne,
  BlockSizeNotOne,
  PoleAtInput,
  IdentityViolated,
  SingularS,
  ResolventSingular,
  SingularW0,
  InvariantViolated,
  ModulusMismatch,
  JNormViolated,
  SingularLeadingBlock,
  SingularVMinus,
  Phi1Mismatch,
  ToeplitzNotPD,
  AnalyticityViolation,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. `index()` names the offending step (potential
/// index, Toeplitz order, ...) when the failure is localized, else npos.
class Error : public std::runtime_error {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  Error(ErrorCode code, const std::string& message, std::size_t index = npos);

  ErrorCode code() const noexcept { return code_; }
  std::size_t index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::size_t index_;
};

/// Tolerances shared by every module. Passed explicitly; the defaults are the
/// documented policy.
struct NumericPolicy {
  double herm = 1e-10;            // relative to ||M||
  double pd = 1e-10;              // relative to ||M||
  double rank = 1e-9;             // relative to the largest eigenvalue
  double solve = 1e-12;
  double resolvent_cond = 1e12;   // reject (A - lambda I) beyond this condition number
  double identity = 1e-10;        // Sylvester/Lyapunov identity residuals, relative
  double j_unitary = 1e-9;        // R j R = j checks on Szego factors
  double phi1 = 1e-8;             // internal consistency of the V_- recursion
  double jnorm = 1e-10;           // J-normalization of reconstructed factors
};

/// Fixed matrices of the indefinite metric for block size p (m = 2p):
/// j = diag(I, -I), J = [[0, I], [I, 0]], K = [[I, -I], [I, I]] / sqrt(2).
class SignatureContext {
 public:
  explicit SignatureContext(int p);

  int p() const noexcept { return p_; }
  int m() const noexcept { return 2 * p_; }
  const CMatrix& j() const noexcept { return j_; }
  const CMatrix& J() const noexcept { return J_; }
  const CMatrix& K() const noexcept { return K_; }
  CMatrix identity() const { return CMatrix::Identity(m(), m()); }

  friend bool operator==(const SignatureContext& a, const SignatureContext& b) noexcept {
    return a.p_ == b.p_;
  }

 private:
  int p_;
  CMatrix j_;
  CMatrix J_;
  CMatrix K_;
};

// Frobenius norm; used for every residual in the library.
inline double norm(const CMatrix& M) { return M.norm(); }

double hermitian_residual(const CMatrix& M);

/// Eigenvalues (ascending) of the Hermitian part of M.
Eigen::VectorXd hermitian_eigenvalues(const CMatrix& M);
double min_eigenvalue(const CMatrix& M);

/// Principal square root of a Hermitian positive-definite matrix.
CMatrix hermitian_sqrt(const CMatrix& M, const NumericPolicy& policy = {});

/// beta with beta* beta = G for a PSD G of numerical rank p, built as
/// Lambda^{1/2} V* from the top-p eigenpairs. Eigenvalues are taken in
/// descending order and each eigenvector is rotated so that its first
/// nonzero entry is real positive, which makes the factor deterministic.
CMatrix rank_p_factor(const CMatrix& G, int p, const NumericPolicy& policy = {});

/// Hermitian block Toeplitz matrix with block (k, j) = s_{j-k},
/// s_{-k} = alpha_k, s_k = alpha_k^*, s_0 = alpha_0 + alpha_0^*.
CMatrix block_toeplitz(std::span<const CMatrix> alpha);

/// Solves S X = B for Hermitian positive-definite S via Cholesky.
CMatrix pd_solve(const CMatrix& S, const CMatrix& B, const NumericPolicy& policy = {});

/// 2-norm condition number (via singular values); +inf for singular input.
double condition_number(const CMatrix& M);

/// Solves M X = B after checking cond(M) <= cond_limit; throws `code` otherwise.
CMatrix checked_solve(const CMatrix& M, const CMatrix& B, double cond_limit, ErrorCode code,
                      const std::string& what);

inline CMatrix checked_inverse(const CMatrix& M, double cond_limit, ErrorCode code,
                               const std::string& what) {
  return checked_solve(M, CMatrix::Identity(M.rows(), M.cols()), cond_limit, code, what);
}

}  // namespace ddirac
