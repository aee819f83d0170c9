#include "ddirac/pseudoexp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddirac {

namespace {

// Drift of the step identity A S_k - S_k A* = i Pi_k j Pi_k* beyond this
// relative level means the recursion has lost the structure entirely.
constexpr double kStepIdentityAbort = 1e-6;

CMatrix signature_j(int p) { return SignatureContext(p).j(); }

double lyapunov_relative_residual(const CMatrix& A, const CMatrix& S, const CMatrix& Pi,
                                  const CMatrix& j) {
  const CMatrix res = A * S - S * A.adjoint() - kI * Pi * j * Pi.adjoint();
  const double scale = std::max(1.0, norm(A) * norm(S) + norm(Pi) * norm(Pi));
  return norm(res) / scale;
}

/// S^{-1} B, through Cholesky when S > 0, else LU with condition monitoring.
CMatrix apply_S_inverse(const CMatrix& S, const CMatrix& B, const NumericPolicy& policy,
                        std::size_t k) {
  Eigen::LLT<CMatrix> llt(S);
  if (llt.info() == Eigen::Success) return llt.solve(B);
  const double cond = condition_number(S);
  if (!(cond <= policy.resolvent_cond)) {
    std::ostringstream os;
    os << "S_" << k << " is numerically singular (cond " << cond << ")";
    throw Error(ErrorCode::SingularS, os.str(), k);
  }
  return S.partialPivLu().solve(B);
}

CMatrix resolvent_times(const CMatrix& A, cplx lambda, const CMatrix& B,
                        const NumericPolicy& policy, const char* what) {
  const CMatrix shifted = A - lambda * CMatrix::Identity(A.rows(), A.cols());
  return checked_solve(shifted, B, policy.resolvent_cond, ErrorCode::ResolventSingular, what);
}

}  // namespace

BdtParameters::BdtParameters(CMatrix A, CMatrix S0, CMatrix Pi0, const NumericPolicy& policy)
    : A_(std::move(A)), S0_(std::move(S0)), Pi0_(std::move(Pi0)) {
  const auto n = A_.rows();
  if (n == 0 || A_.cols() != n || S0_.rows() != n || S0_.cols() != n || Pi0_.rows() != n ||
      Pi0_.cols() == 0 || Pi0_.cols() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "BDT parameters need A, S0 of size n x n and Pi0 of size n x 2p");
  }
  if (!(condition_number(A_) <= policy.resolvent_cond)) {
    throw Error(ErrorCode::InvariantViolated, "A must be invertible");
  }
  if (hermitian_residual(S0_) > policy.herm * std::max(1.0, norm(S0_))) {
    throw Error(ErrorCode::NotHermitian, "S0 must be Hermitian");
  }
  const double rel = lyapunov_relative_residual(A_, S0_, Pi0_, signature_j(p()));
  if (rel > policy.identity) {
    std::ostringstream os;
    os << "A S0 - S0 A* != i Pi0 j Pi0* (relative residual " << rel << ")";
    throw Error(ErrorCode::IdentityViolated, os.str());
  }
}

double BdtParameters::identity_residual() const {
  return norm(A_ * S0_ - S0_ * A_.adjoint() - kI * Pi0_ * signature_j(p()) * Pi0_.adjoint());
}

std::vector<BdtState> bdt_states(const BdtParameters& params, std::size_t count,
                                 const NumericPolicy& policy) {
  const CMatrix j = signature_j(params.p());
  const CMatrix Ainv = checked_inverse(params.A(), policy.resolvent_cond,
                                       ErrorCode::InvariantViolated, "A^{-1}");
  std::vector<BdtState> states;
  states.reserve(count + 1);
  states.push_back({0, params.Pi0(), params.S0()});
  for (std::size_t k = 0; k < count; ++k) {
    const BdtState& cur = states.back();
    BdtState next;
    next.k = k + 1;
    next.Pi = cur.Pi + kI * Ainv * cur.Pi * j;
    const CMatrix APi = Ainv * cur.Pi;
    next.S = cur.S + Ainv * cur.S * Ainv.adjoint() + APi * APi.adjoint();
    next.S = 0.5 * (next.S + next.S.adjoint());
    const double rel = lyapunov_relative_residual(params.A(), next.S, next.Pi, j);
    if (rel > kStepIdentityAbort) {
      std::ostringstream os;
      os << "step identity lost at k = " << next.k << " (relative residual " << rel << ")";
      throw Error(ErrorCode::IdentityViolated, os.str(), next.k);
    }
    states.push_back(std::move(next));
  }
  return states;
}

GeneratedSystem generate(const BdtParameters& params, std::size_t N,
                         const NumericPolicy& policy) {
  const SignatureContext ctx = params.ctx();
  auto states = bdt_states(params, N + 1, policy);
  std::vector<double> residuals;
  residuals.reserve(states.size());
  for (const auto& st : states) {
    residuals.push_back(lyapunov_relative_residual(params.A(), st.S, st.Pi, ctx.j()));
  }
  std::vector<CMatrix> quad;  // Pi_k* S_k^{-1} Pi_k
  quad.reserve(states.size());
  for (const auto& st : states) {
    quad.push_back(st.Pi.adjoint() * apply_S_inverse(st.S, st.Pi, policy, st.k));
  }
  std::vector<CMatrix> C;
  C.reserve(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    CMatrix Ck = ctx.identity() + quad[k] - quad[k + 1];
    C.push_back(0.5 * (Ck + Ck.adjoint()));
  }
  return {PotentialSequence(ctx, std::move(C)), std::move(states), std::move(residuals)};
}

BdtParameters normalize(const BdtParameters& params, const NumericPolicy& policy) {
  const CMatrix root = hermitian_sqrt(params.S0(), policy);
  const auto lu = root.partialPivLu();
  const CMatrix A = lu.solve(params.A() * root);
  const auto n = params.n();
  return BdtParameters(A, CMatrix::Identity(n, n), lu.solve(params.Pi0()), policy);
}

CMatrix transfer(const BdtParameters& params, const BdtState& state, cplx lambda,
                 const NumericPolicy& policy) {
  const SignatureContext ctx = params.ctx();
  const CMatrix res = resolvent_times(params.A(), lambda, state.Pi, policy, "transfer");
  const CMatrix SinvPi = apply_S_inverse(state.S, state.Pi, policy, state.k);
  return ctx.identity() - kI * ctx.j() * SinvPi.adjoint() * res;
}

double transfer_step_residual(const BdtParameters& params, const GeneratedSystem& sys,
                              std::size_t k, cplx lambda, const NumericPolicy& policy) {
  if (k + 1 >= sys.states.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "transfer_step_residual: k exceeds N");
  }
  const SpectralPoint point(lambda);
  const SignatureContext ctx = params.ctx();
  const CMatrix wk = transfer(params, sys.states[k], point.value(), policy);
  const CMatrix wk1 = transfer(params, sys.states[k + 1], point.value(), policy);
  const CMatrix lhs = wk1 * (ctx.identity() - (kI / lambda) * ctx.j());
  const CMatrix rhs = step_factor(ctx, sys.potentials[k], point) * wk;
  return norm(lhs - rhs) / std::max(1.0, norm(wk) + norm(wk1));
}

CMatrix explicit_fundamental(const BdtParameters& params, std::size_t k, cplx lambda,
                             const NumericPolicy& policy) {
  const SpectralPoint point(lambda);
  const SignatureContext ctx = params.ctx();
  const auto states = bdt_states(params, k, policy);
  const CMatrix w0 = transfer(params, states.front(), point.value(), policy);
  const CMatrix wk = transfer(params, states.back(), point.value(), policy);
  const CMatrix w0inv =
      checked_inverse(w0, policy.resolvent_cond, ErrorCode::SingularW0, "w_A(0, lambda)");
  // (I - (i/lambda) j) is diagonal: (1 - i/lambda) on the first block, (1 + i/lambda) on the second.
  const cplx top = std::pow(1.0 - kI / lambda, static_cast<double>(k));
  const cplx bottom = std::pow(1.0 + kI / lambda, static_cast<double>(k));
  CVector diag(ctx.m());
  diag.head(ctx.p()).setConstant(top);
  diag.tail(ctx.p()).setConstant(bottom);
  return wk * diag.asDiagonal() * w0inv;
}

CMatrix explicit_weyl(const BdtParameters& params, cplx lambda, const NumericPolicy& policy) {
  Eigen::LLT<CMatrix> llt(params.S0());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "explicit_weyl requires S0 > 0");
  }
  const CMatrix Phi = params.Phi();
  const CMatrix Psi = params.Psi();
  const CMatrix S0invPsi = llt.solve(Psi);
  const CMatrix Ax = params.A() + kI * Psi * S0invPsi.adjoint();
  const CMatrix res = resolvent_times(Ax, lambda, Psi, policy, "explicit_weyl");
  const CMatrix S0invPhi = llt.solve(Phi);
  return -kI * S0invPhi.adjoint() * res;
}

WeylRealization::WeylRealization(CMatrix theta, CMatrix PhiT, CMatrix PsiT,
                                 const NumericPolicy& policy)
    : theta_(std::move(theta)), PhiT_(std::move(PhiT)), PsiT_(std::move(PsiT)) {
  const auto n = theta_.rows();
  if (n == 0 || theta_.cols() != n || PhiT_.rows() != n || PsiT_.rows() != n ||
      PhiT_.cols() != PsiT_.cols() || PhiT_.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "realization needs theta n x n and PhiT, PsiT of size n x p");
  }
  const CMatrix gram = PhiT_ * PhiT_.adjoint() + PsiT_ * PsiT_.adjoint();
  const double scale = std::max(1.0, norm(theta_) + norm(gram));
  const double res = norm(theta_ - theta_.adjoint() - kI * gram);
  if (res > policy.identity * scale) {
    std::ostringstream os;
    os << "theta - theta* != i (PhiT PhiT* + PsiT PsiT*) (residual " << res << ")";
    throw Error(ErrorCode::InvariantViolated, os.str());
  }
  const CMatrix A = theta_ - kI * PsiT_ * PsiT_.adjoint();
  if (!(condition_number(A) <= policy.resolvent_cond)) {
    throw Error(ErrorCode::InvariantViolated, "theta - i PsiT PsiT* is singular");
  }
}

CMatrix WeylRealization::evaluate(cplx lambda, const NumericPolicy& policy) const {
  return -kI * PhiT_.adjoint() *
         resolvent_times(theta_, lambda, PsiT_, policy, "WeylRealization::evaluate");
}

BdtParameters realization_to_params(const WeylRealization& rz, const NumericPolicy& policy) {
  const auto n = rz.n();
  CMatrix Pi0(n, 2 * rz.p());
  Pi0 << rz.PhiT(), rz.PsiT();
  return BdtParameters(rz.theta() - kI * rz.PsiT() * rz.PsiT().adjoint(),
                       CMatrix::Identity(n, n), std::move(Pi0), policy);
}

WeylRealization params_to_realization(const BdtParameters& params, const NumericPolicy& policy) {
  const BdtParameters normalized = normalize(params, policy);
  const CMatrix Psi = normalized.Psi();
  return WeylRealization(normalized.A() + kI * Psi * Psi.adjoint(), normalized.Phi(), Psi,
                         policy);
}

Example41::Example41(double a_, cplx phi_, cplx psi_) : a(a_), phi(phi_), psi(psi_) {
  if (a == 0.0) throw Error(ErrorCode::InvariantViolated, "a must be nonzero");
  const double scale = std::max(1.0, std::abs(phi));
  if (std::abs(std::abs(phi) - std::abs(psi)) > 1e-12 * scale) {
    throw Error(ErrorCode::ModulusMismatch, "|Phi| must equal |Psi|");
  }
}

double Example41::zeta() const { return 2.0 * std::norm(phi) / (a * a + 1.0); }

CMatrix Example41::potential(std::size_t k) const {
  const double z = zeta();
  const double kd = static_cast<double>(k);
  const double d0 = kd * z + 1.0;
  const double d1 = (kd + 1.0) * z + 1.0;
  const cplx w = cplx(a, 1.0) / cplx(a, -1.0);
  const double diag = 1.0 + z * std::norm(phi) / (d0 * d1);
  const cplx off =
      phi * std::conj(psi) * (std::pow(w, kd) / d0 - std::pow(w, kd + 1.0) / d1);
  CMatrix C(2, 2);
  C << diag, std::conj(off), off, diag;
  return C;
}

CMatrix Example41::weyl(cplx lambda) const {
  CMatrix v(1, 1);
  v(0, 0) = kI * std::conj(phi) * psi / (lambda - a - kI * std::norm(psi));
  return v;
}

BdtParameters Example41::params() const {
  CMatrix A(1, 1);
  A(0, 0) = a;
  CMatrix Pi0(1, 2);
  Pi0 << phi, psi;
  return BdtParameters(A, CMatrix::Identity(1, 1), Pi0);
}

std::pair<CMatrix, MatrixFunction> example41(double a, cplx phi, cplx psi, std::size_t k) {
  const Example41 ex(a, phi, psi);
  return {ex.potential(k), [ex](cplx lambda) { return ex.weyl(lambda); }};
}

}  // namespace ddirac
