#pragma once

#include "ddirac/dirac_system.hpp"
#include "ddirac/linalg.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace ddirac {

/// Generating triple (A, S0, Pi0) of a pseudo-exponential potential, with
/// A S0 - S0 A* = i Pi0 j Pi0*. Pi0 = [Phi Psi] with n x p blocks.
class BdtParameters {
 public:
  BdtParameters(CMatrix A, CMatrix S0, CMatrix Pi0, const NumericPolicy& policy = {});

  int n() const noexcept { return static_cast<int>(A_.rows()); }
  int p() const noexcept { return static_cast<int>(Pi0_.cols() / 2); }
  const CMatrix& A() const noexcept { return A_; }
  const CMatrix& S0() const noexcept { return S0_; }
  const CMatrix& Pi0() const noexcept { return Pi0_; }
  CMatrix Phi() const { return Pi0_.leftCols(p()); }
  CMatrix Psi() const { return Pi0_.rightCols(p()); }
  SignatureContext ctx() const { return SignatureContext(p()); }

  /// ||A S0 - S0 A* - i Pi0 j Pi0*||.
  double identity_residual() const;

 private:
  CMatrix A_;
  CMatrix S0_;
  CMatrix Pi0_;
};

struct BdtState {
  std::size_t k = 0;
  CMatrix Pi;
  CMatrix S;
};

struct GeneratedSystem {
  PotentialSequence potentials;
  std::vector<BdtState> states;  // k = 0..N+1
  std::vector<double> identity_residuals;  // relative, per state
};

/// States 0..count of Pi_{k+1} = Pi_k + i A^{-1} Pi_k j,
/// S_{k+1} = S_k + A^{-1} S_k A^{-*} + A^{-1} Pi_k Pi_k* A^{-*}.
std::vector<BdtState> bdt_states(const BdtParameters& params, std::size_t count,
                                 const NumericPolicy& policy = {});

/// C_k = I + Pi_k* S_k^{-1} Pi_k - Pi_{k+1}* S_{k+1}^{-1} Pi_{k+1}, k = 0..N.
GeneratedSystem generate(const BdtParameters& params, std::size_t N,
                         const NumericPolicy& policy = {});

/// (S0^{-1/2} A S0^{1/2}, I, S0^{-1/2} Pi0); requires S0 > 0.
BdtParameters normalize(const BdtParameters& params, const NumericPolicy& policy = {});

/// w_A(k, lambda) = I - i j Pi_k* S_k^{-1} (A - lambda I)^{-1} Pi_k.
CMatrix transfer(const BdtParameters& params, const BdtState& state, cplx lambda,
                 const NumericPolicy& policy = {});

/// ||w_A(k+1)(I - (i/l) j) - (I - (i/l) j C_k) w_A(k)|| for the states of a
/// generated system, relative to ||w_A(k+1)|| + ||w_A(k)||.
double transfer_step_residual(const BdtParameters& params, const GeneratedSystem& sys,
                              std::size_t k, cplx lambda, const NumericPolicy& policy = {});

/// W_k(lambda) = w_A(k, lambda) (I - (i/lambda) j)^k w_A(0, lambda)^{-1}.
CMatrix explicit_fundamental(const BdtParameters& params, std::size_t k, cplx lambda,
                             const NumericPolicy& policy = {});

/// phi_I(lambda) = -i Phi* S0^{-1} (A^x - lambda I)^{-1} Psi, A^x = A + i Psi Psi* S0^{-1}.
CMatrix explicit_weyl(const BdtParameters& params, cplx lambda,
                      const NumericPolicy& policy = {});

/// State-space data of a rational contractive Weyl function
///   phi(lambda) = -i PhiT* (theta - lambda I)^{-1} PsiT,
/// theta - theta* = i (PhiT PhiT* + PsiT PsiT*).
class WeylRealization {
 public:
  WeylRealization(CMatrix theta, CMatrix PhiT, CMatrix PsiT, const NumericPolicy& policy = {});

  int n() const noexcept { return static_cast<int>(theta_.rows()); }
  int p() const noexcept { return static_cast<int>(PhiT_.cols()); }
  const CMatrix& theta() const noexcept { return theta_; }
  const CMatrix& PhiT() const noexcept { return PhiT_; }
  const CMatrix& PsiT() const noexcept { return PsiT_; }

  CMatrix evaluate(cplx lambda, const NumericPolicy& policy = {}) const;

 private:
  CMatrix theta_;
  CMatrix PhiT_;
  CMatrix PsiT_;
};

/// A = theta - i PsiT PsiT*, S0 = I, Pi0 = [PhiT PsiT].
BdtParameters realization_to_params(const WeylRealization& rz, const NumericPolicy& policy = {});

/// (theta = A^x, PhiT = Phi, PsiT = Psi) of normalized parameters.
WeylRealization params_to_realization(const BdtParameters& params,
                                      const NumericPolicy& policy = {});

/// Closed-form scalar example (p = n = 1, A = a, S0 = 1, Pi0 = [Phi Psi]).
struct Example41 {
  double a;
  cplx phi;
  cplx psi;

  Example41(double a, cplx phi, cplx psi);

  double zeta() const;
  CMatrix potential(std::size_t k) const;
  CMatrix weyl(cplx lambda) const;  // 1x1
  BdtParameters params() const;
};

/// C_k of the scalar example together with its Weyl function.
std::pair<CMatrix, MatrixFunction> example41(double a, cplx phi, cplx psi, std::size_t k);

}  // namespace ddirac
