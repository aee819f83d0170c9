#include "ddirac/szego.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddirac {

SzegoSequence::SzegoSequence(SignatureContext ctx, std::vector<CMatrix> R,
                             std::vector<cplx> theta, const NumericPolicy& policy)
    : ctx_(std::move(ctx)), R_(std::move(R)), theta_(std::move(theta)) {
  if (R_.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "Szego sequence must hold at least R_0");
  }
  if (theta_.size() != R_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "theta and R must have equal length");
  }
  const auto& j = ctx_.j();
  for (std::size_t k = 0; k < R_.size(); ++k) {
    const CMatrix& Rk = R_[k];
    if (Rk.rows() != ctx_.m() || Rk.cols() != ctx_.m()) {
      throw Error(ErrorCode::DimensionMismatch, "R_k must be m x m", k);
    }
    const double scale = std::max(1.0, norm(Rk));
    if (hermitian_residual(Rk) > policy.herm * scale) {
      throw Error(ErrorCode::NotHermitian, "R_k is not Hermitian", k);
    }
    if (min_eigenvalue(Rk) <= policy.pd * scale) {
      throw Error(ErrorCode::NotPositiveDefinite, "R_k is not positive definite", k);
    }
    const double jres = norm(Rk * j * Rk - j);
    if (jres > policy.j_unitary * scale * scale) {
      std::ostringstream os;
      os << "R_" << k << " j R_" << k << " - j has norm " << jres;
      throw Error(ErrorCode::InvariantViolated, os.str(), k);
    }
    if (theta_[k] == cplx(0.0, 0.0)) {
      throw Error(ErrorCode::InvariantViolated, "theta_k must be nonzero", k);
    }
  }
}

SchurCoefficients::SchurCoefficients(std::vector<cplx> rho) : rho_(std::move(rho)) {
  for (std::size_t k = 0; k < rho_.size(); ++k) {
    if (!(std::abs(rho_[k]) < 1.0)) {
      throw Error(ErrorCode::ModulusAtLeastOne, "Schur coefficient must satisfy |rho| < 1", k);
    }
  }
}

cplx theta_of(const SignatureContext& ctx, const CMatrix& R) {
  if (ctx.p() != 1) return {1.0, 0.0};
  // For p = 1, R = (1 - |rho|^2)^{-1/2} [[1, -rho], [-conj(rho), 1]], so R_11 = 1/theta.
  return {1.0 / R(0, 0).real(), 0.0};
}

std::vector<CMatrix> szego_gauges(const SzegoSequence& sz, std::size_t count) {
  if (count > sz.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "szego_gauges: count exceeds N + 1");
  }
  std::vector<CMatrix> U;
  U.reserve(count + 1);
  U.push_back(sz.ctx().identity());
  const CMatrix ij = kI * sz.ctx().j();
  for (std::size_t k = 0; k < count; ++k) {
    U.push_back(U.back() * ij * sz.R()[k]);
  }
  return U;
}

PotentialSequence szego_to_dirac(const SzegoSequence& sz, const NumericPolicy& policy) {
  const auto U = szego_gauges(sz, sz.size() - 1);
  std::vector<CMatrix> C;
  C.reserve(sz.size());
  for (std::size_t k = 0; k < sz.size(); ++k) {
    const CMatrix Uinv = U[k].partialPivLu().inverse();
    const CMatrix Ck = Uinv.adjoint() * sz.R()[k] * sz.R()[k] * Uinv;
    C.push_back(0.5 * (Ck + Ck.adjoint()));
  }
  PotentialSequence sys(sz.ctx(), std::move(C));
  const auto report = validate(sys, policy);
  if (!report.pass) {
    throw Error(ErrorCode::InvariantViolated, "converted potentials fail validation",
                report.first_failure);
  }
  return sys;
}

SzegoSequence dirac_to_szego(const PotentialSequence& sys, const NumericPolicy& policy) {
  const CMatrix ij = kI * sys.ctx().j();
  std::vector<CMatrix> R;
  std::vector<cplx> theta;
  R.reserve(sys.size());
  theta.reserve(sys.size());
  CMatrix U = sys.ctx().identity();
  for (std::size_t k = 0; k < sys.size(); ++k) {
    CMatrix Rk;
    try {
      Rk = hermitian_sqrt(U.adjoint() * sys[k] * U, policy);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("C_") + std::to_string(k) + ": " + e.what(), k);
    }
    // Rounding in R_k j R_k - j is amplified by ||R||^2 at every gauge step; the
    // averaging X -> (X + j X^{-1} j)/2 has the j-unitary positive R as a
    // quadratically attracting fixed point.
    for (int it = 0; it < 2; ++it) {
      const CMatrix& j = sys.ctx().j();
      const CMatrix avg = 0.5 * (Rk + j * Rk.inverse() * j);
      Rk = 0.5 * (avg + avg.adjoint());
    }
    theta.push_back(theta_of(sys.ctx(), Rk));
    U = U * ij * Rk;
    R.push_back(std::move(Rk));
  }
  // The constructor re-checks R_k j R_k = j.
  return SzegoSequence(sys.ctx(), std::move(R), std::move(theta), policy);
}

SzegoSequence schur_to_R(const SchurCoefficients& rho) {
  SignatureContext ctx(1);
  std::vector<CMatrix> R;
  std::vector<cplx> theta;
  for (const cplx r : rho.values()) {
    const double t = std::sqrt(1.0 - std::norm(r));
    CMatrix Rk(2, 2);
    Rk << 1.0, -r, -std::conj(r), 1.0;
    R.push_back(Rk / t);
    theta.emplace_back(t, 0.0);
  }
  return SzegoSequence(ctx, std::move(R), std::move(theta));
}

SchurCoefficients schur_coeffs(const SzegoSequence& sz) {
  if (sz.p() != 1) {
    throw Error(ErrorCode::BlockSizeNotOne, "Schur coefficients are defined for p = 1 only");
  }
  std::vector<cplx> rho;
  rho.reserve(sz.size());
  for (const auto& Rk : sz.R()) rho.push_back(-Rk(0, 1) / Rk(0, 0));
  return SchurCoefficients(std::move(rho));
}

cplx cayley_lambda_of_z(cplx z) {
  if (z == cplx(1.0, 0.0)) throw Error(ErrorCode::PoleAtInput, "lambda(z) has a pole at z = 1");
  return kI * (z + 1.0) / (z - 1.0);
}

cplx cayley_z_of_lambda(cplx lambda) {
  if (lambda == kI) throw Error(ErrorCode::PoleAtInput, "z(lambda) has a pole at lambda = i");
  return (lambda + kI) / (lambda - kI);
}

cplx szego_z_of_lambda(cplx lambda) {
  if (lambda == -kI) {
    throw Error(ErrorCode::PoleAtInput, "Szego z(lambda) has a pole at lambda = -i");
  }
  return (1.0 + kI * lambda) / (1.0 - kI * lambda);
}

cplx szego_lambda_of_z(cplx z) {
  if (z == cplx(-1.0, 0.0)) {
    throw Error(ErrorCode::PoleAtInput, "Szego lambda(z) has a pole at z = -1");
  }
  return -kI * (z - 1.0) / (z + 1.0);
}

namespace {

CMatrix disk_diag(int p, cplx z) {
  CMatrix D = CMatrix::Identity(2 * p, 2 * p);
  D.topLeftCorner(p, p) *= z;
  return D;
}

}  // namespace

CMatrix szego_solution_map(const SzegoSequence& sz, const CMatrix& X, std::size_t k, cplx z) {
  if (z == cplx(1.0, 0.0)) {
    throw Error(ErrorCode::PoleAtInput, "z = 1 corresponds to lambda = 0");
  }
  const cplx lambda = szego_lambda_of_z(z);
  const auto U = szego_gauges(sz, k);
  cplx scale = std::pow(kI - 1.0 / lambda, static_cast<double>(k));
  for (std::size_t r = 0; r < k; ++r) scale /= sz.theta()[r];
  return scale * U[k] * disk_diag(sz.p(), z) * X;
}

std::vector<CMatrix> szego_propagate(const SzegoSequence& sz, const CMatrix& X0, std::size_t k,
                                     cplx z) {
  if (k > sz.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "szego_propagate: k exceeds N + 1");
  }
  const CMatrix D = disk_diag(sz.p(), z);
  std::vector<CMatrix> X{X0};
  for (std::size_t r = 0; r < k; ++r) {
    X.push_back(sz.theta()[r] * sz.R()[r] * D * X.back());
  }
  return X;
}

double gauge_j_drift(const SzegoSequence& sz) {
  const auto U = szego_gauges(sz, sz.size());
  double drift = 0.0;
  for (const auto& Uk : U) {
    drift = std::max(drift, norm(Uk * sz.ctx().j() * Uk.adjoint() - sz.ctx().j()));
  }
  return drift;
}

}  // namespace ddirac
