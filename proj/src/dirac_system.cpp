#include "ddirac/dirac_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddirac {

PotentialSequence::PotentialSequence(SignatureContext ctx, std::vector<CMatrix> potentials)
    : ctx_(std::move(ctx)), C_(std::move(potentials)) {
  if (C_.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "potential sequence must hold at least C_0");
  }
  for (std::size_t k = 0; k < C_.size(); ++k) {
    if (C_[k].rows() != ctx_.m() || C_[k].cols() != ctx_.m()) {
      std::ostringstream os;
      os << "C_" << k << " is " << C_[k].rows() << "x" << C_[k].cols() << ", expected "
         << ctx_.m() << "x" << ctx_.m();
      throw Error(ErrorCode::DimensionMismatch, os.str(), k);
    }
  }
}

PotentialSequence PotentialSequence::prefix(std::size_t count) const {
  if (count == 0 || count > C_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "prefix length out of range");
  }
  return PotentialSequence(ctx_, std::vector<CMatrix>(C_.begin(), C_.begin() + count));
}

ValidationReport validate(const PotentialSequence& sys, const NumericPolicy& policy) {
  ValidationReport report;
  const auto& j = sys.ctx().j();
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const CMatrix& C = sys[k];
    StepValidation s;
    s.hermitian_residual = hermitian_residual(C);
    s.j_residual = norm(C * j * C - j);
    s.min_eig = min_eigenvalue(C);
    s.min_eig_plus_j = min_eigenvalue(C + j);
    s.min_eig_minus_j = min_eigenvalue(C - j);
    const double scale = std::max(1.0, norm(C));
    s.scale = scale;
    s.pass = s.hermitian_residual <= policy.herm * scale &&
             s.j_residual <= policy.herm * scale * scale && s.min_eig > 0.0 &&
             s.min_eig_plus_j >= -policy.herm * scale && s.min_eig_minus_j >= -policy.herm * scale;
    if (!s.pass && report.pass) {
      report.pass = false;
      report.first_failure = k;
    }
    report.steps.push_back(s);
  }
  return report;
}

SpectralPoint::SpectralPoint(cplx lambda) : lambda_(lambda) {
  if (lambda == cplx(0.0, 0.0)) {
    throw Error(ErrorCode::LambdaZero, "spectral parameter must be nonzero");
  }
}

double q_weight(SpectralPoint lambda) {
  const double a = std::norm(lambda.value());
  return a / (a + 1.0);
}

CMatrix step_factor(const SignatureContext& ctx, const CMatrix& C, SpectralPoint lambda) {
  return ctx.identity() - (kI / lambda.value()) * (ctx.j() * C);
}

std::vector<CMatrix> propagate_all(const PotentialSequence& sys, SpectralPoint lambda,
                                   std::size_t k) {
  if (k > sys.size()) {
    std::ostringstream os;
    os << "propagate: k = " << k << " exceeds N + 1 = " << sys.size();
    throw Error(ErrorCode::IndexOutOfRange, os.str());
  }
  std::vector<CMatrix> W;
  W.reserve(k + 1);
  W.push_back(sys.ctx().identity());
  for (std::size_t r = 0; r < k; ++r) {
    W.push_back(step_factor(sys.ctx(), sys[r], lambda) * W.back());
  }
  return W;
}

CMatrix propagate(const PotentialSequence& sys, SpectralPoint lambda, std::size_t k) {
  return propagate_all(sys, lambda, k).back();
}

double summation_residual(const PotentialSequence& sys, SpectralPoint lambda, std::size_t r) {
  const cplx l = lambda.value();
  if (l.imag() == 0.0) {
    throw Error(ErrorCode::RealLambda, "summation formula needs a non-real lambda");
  }
  if (r > sys.last_index()) {
    throw Error(ErrorCode::IndexOutOfRange, "summation_residual: r exceeds N");
  }
  const double q = q_weight(lambda);
  const auto W = propagate_all(sys, lambda, r + 1);
  const auto& j = sys.ctx().j();
  CMatrix lhs = CMatrix::Zero(sys.ctx().m(), sys.ctx().m());
  double qk = 1.0;
  for (std::size_t k = 0; k <= r; ++k) {
    lhs += qk * (W[k].adjoint() * sys[k] * W[k]);
    qk *= q;
  }
  const cplx factor = (std::norm(l) + 1.0) / (kI * (l - std::conj(l)));
  const CMatrix rhs = factor * (qk * (W[r + 1].adjoint() * j * W[r + 1]) - j);
  return norm(lhs - rhs);
}

double step_j_residual(const SignatureContext& ctx, const CMatrix& C, SpectralPoint lambda) {
  const cplx l = lambda.value();
  const CMatrix left = ctx.identity() + (kI / l) * (C * ctx.j());
  const CMatrix right = step_factor(ctx, C, lambda);
  return norm(left * ctx.j() * right - (1.0 + 1.0 / (l * l)) * ctx.j());
}

double monodromy_j_residual(const PotentialSequence& sys, SpectralPoint lambda) {
  const cplx l = lambda.value();
  const CMatrix W = propagate(sys, lambda, sys.size());
  const CMatrix Wc = propagate(sys, SpectralPoint(std::conj(l)), sys.size());
  const cplx base = (l + kI) * (l - kI) / (l * l);
  const cplx scale = std::pow(base, static_cast<double>(sys.size()));
  const CMatrix diff = W * sys.ctx().j() * Wc.adjoint() - scale * sys.ctx().j();
  const double denom = std::max(1.0, norm(W) * norm(Wc));
  return norm(diff) / denom;
}

MoebiusPair::MoebiusPair(CMatrix R, CMatrix Q, const NumericPolicy& policy)
    : R_(std::move(R)), Q_(std::move(Q)) {
  if (R_.rows() != R_.cols() || Q_.rows() != Q_.cols() || R_.rows() != Q_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Moebius pair blocks must be p x p");
  }
  const CMatrix RR = R_.adjoint() * R_;
  const CMatrix QQ = Q_.adjoint() * Q_;
  const double scale = std::max(1.0, norm(RR) + norm(QQ));
  if (min_eigenvalue(RR + QQ) <= policy.pd * scale) {
    throw Error(ErrorCode::InvalidPair, "R*R + Q*Q is not positive definite");
  }
  if (min_eigenvalue(QQ - RR) < -policy.pd * scale) {
    throw Error(ErrorCode::InvalidPair, "R*R <= Q*Q fails");
  }
}

CMatrix weyl_disk_eval(const PotentialSequence& sys, const MoebiusPair& pair,
                       SpectralPoint lambda, const NumericPolicy& policy) {
  const int p = sys.p();
  if (pair.R().rows() != p) {
    throw Error(ErrorCode::DimensionMismatch, "Moebius pair block size differs from system");
  }
  if (!lambda.in_lower_half_plane()) {
    throw Error(ErrorCode::NotLowerHalfPlane, "weyl_disk_eval needs Im lambda < 0");
  }
  const CMatrix Wbar = propagate(sys, SpectralPoint(std::conj(lambda.value())), sys.size());
  const CMatrix calW = sys.ctx().K() * Wbar.adjoint();
  const CMatrix num = calW.block(p, 0, p, p) * pair.R() + calW.block(p, p, p, p) * pair.Q();
  const CMatrix den = calW.block(0, 0, p, p) * pair.R() + calW.block(0, p, p, p) * pair.Q();
  // Solve X den = num via den* X* = num*.
  const CMatrix Xadj = checked_solve(den.adjoint(), num.adjoint(), policy.resolvent_cond,
                                     ErrorCode::SingularDenominator, "weyl_disk_eval");
  return kI * Xadj.adjoint();
}

CMatrix herglotz_map(const CMatrix& phi_identity, const NumericPolicy& policy) {
  const auto Ip = CMatrix::Identity(phi_identity.rows(), phi_identity.cols());
  const CMatrix shifted = Ip + phi_identity;
  const CMatrix inv =
      checked_inverse(shifted, policy.resolvent_cond, ErrorCode::SingularShift, "herglotz_map");
  return -kI * (Ip - phi_identity) * inv;
}

double weyl_sum_bound(SpectralPoint lambda) {
  const cplx l = lambda.value();
  if (l.imag() == 0.0) {
    throw Error(ErrorCode::RealLambda, "Weyl bound needs a non-real lambda");
  }
  return ((std::norm(l) + 1.0) / (kI * (l - std::conj(l)))).real();
}

std::vector<CMatrix> weyl_partial_sums(const PotentialSequence& sys, const MatrixFunction& phi,
                                       SpectralPoint lambda, std::size_t r,
                                       WeylConvention convention) {
  if (!lambda.in_lower_half_plane()) {
    throw Error(ErrorCode::NotLowerHalfPlane, "weyl_partial_sums needs Im lambda < 0");
  }
  if (r > sys.last_index()) {
    throw Error(ErrorCode::IndexOutOfRange, "weyl_partial_sums: r exceeds N");
  }
  const int p = sys.p();
  const CMatrix value = phi(lambda.value());
  CMatrix column(2 * p, p);
  if (convention == WeylConvention::Identity) {
    column << value, CMatrix::Identity(p, p);
  } else {
    column << -kI * value, CMatrix::Identity(p, p);
    column = sys.ctx().K().adjoint() * column;
  }
  const double q = q_weight(lambda);
  std::vector<CMatrix> sums;
  sums.reserve(r + 1);
  CMatrix acc = CMatrix::Zero(p, p);
  CMatrix W = sys.ctx().identity();
  double qk = 1.0;
  for (std::size_t k = 0; k <= r; ++k) {
    const CMatrix y = W * column;
    acc += qk * (y.adjoint() * sys[k] * y);
    sums.push_back(0.5 * (acc + acc.adjoint()));
    W = step_factor(sys.ctx(), sys[k], lambda) * W;
    qk *= q;
  }
  return sums;
}

CMatrix weyl_partial_sum(const PotentialSequence& sys, const MatrixFunction& phi,
                         SpectralPoint lambda, std::size_t r, WeylConvention convention) {
  return weyl_partial_sums(sys, phi, lambda, r, convention).back();
}

}  // namespace ddirac
