#include "ddirac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddirac {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::LambdaZero: return "LambdaZero";
    case ErrorCode::RealLambda: return "RealLambda";
    case ErrorCode::NotLowerHalfPlane: return "NotLowerHalfPlane";
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::ModulusAtLeastOne: return "ModulusAtLeastOne";
    case ErrorCode::BlockSizeNotOne: return "BlockSizeNotOne";
    case ErrorCode::PoleAtInput: return "PoleAtInput";
    case ErrorCode::IdentityViolated: return "IdentityViolated";
    case ErrorCode::SingularS: return "SingularS";
    case ErrorCode::ResolventSingular: return "ResolventSingular";
    case ErrorCode::SingularW0: return "SingularW0";
    case ErrorCode::InvariantViolated: return "InvariantViolated";
    case ErrorCode::ModulusMismatch: return "ModulusMismatch";
    case ErrorCode::JNormViolated: return "JNormViolated";
    case ErrorCode::SingularLeadingBlock: return "SingularLeadingBlock";
    case ErrorCode::SingularVMinus: return "SingularVMinus";
    case ErrorCode::Phi1Mismatch: return "Phi1Mismatch";
    case ErrorCode::ToeplitzNotPD: return "ToeplitzNotPD";
    case ErrorCode::AnalyticityViolation: return "AnalyticityViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      index_(index) {}

SignatureContext::SignatureContext(int p) : p_(p) {
  if (p <= 0) {
    throw Error(ErrorCode::DimensionMismatch, "block size must be positive");
  }
  const auto Ip = CMatrix::Identity(p, p);
  const int m = 2 * p;
  j_ = CMatrix::Zero(m, m);
  j_.topLeftCorner(p, p) = Ip;
  j_.bottomRightCorner(p, p) = -Ip;

  J_ = CMatrix::Zero(m, m);
  J_.topRightCorner(p, p) = Ip;
  J_.bottomLeftCorner(p, p) = Ip;

  const double s = 1.0 / std::sqrt(2.0);
  K_.resize(m, m);
  K_.topLeftCorner(p, p) = s * Ip;
  K_.topRightCorner(p, p) = -s * Ip;
  K_.bottomLeftCorner(p, p) = s * Ip;
  K_.bottomRightCorner(p, p) = s * Ip;
}

double hermitian_residual(const CMatrix& M) { return norm(M - M.adjoint()); }

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& M) {
  const CMatrix H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const CMatrix& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  return hermitian_eigenvalues(M).minCoeff();
}

namespace {

void require_square(const CMatrix& M, const char* what) {
  if (M.rows() != M.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << M.rows() << "x" << M.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

void require_hermitian(const CMatrix& M, double tol, const char* what) {
  const double scale = std::max(1.0, norm(M));
  const double res = hermitian_residual(M);
  if (res > tol * scale) {
    std::ostringstream os;
    os << what << ": asymmetry " << res << " exceeds tolerance";
    throw Error(ErrorCode::NotHermitian, os.str());
  }
}

}  // namespace

CMatrix hermitian_sqrt(const CMatrix& M, const NumericPolicy& policy) {
  require_square(M, "hermitian_sqrt");
  require_hermitian(M, policy.herm, "hermitian_sqrt");
  const CMatrix H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = std::max(1.0, norm(M));
  if (ev.size() > 0 && ev.minCoeff() <= policy.pd * scale) {
    std::ostringstream os;
    os << "hermitian_sqrt: minimal eigenvalue " << ev.minCoeff();
    throw Error(ErrorCode::NotPositiveDefinite, os.str());
  }
  const CMatrix& V = es.eigenvectors();
  const Eigen::VectorXcd root = ev.cwiseSqrt().cast<cplx>();
  CMatrix R = V * root.asDiagonal() * V.adjoint();
  return 0.5 * (R + R.adjoint());
}

CMatrix rank_p_factor(const CMatrix& G, int p, const NumericPolicy& policy) {
  require_square(G, "rank_p_factor");
  if (p <= 0 || p > G.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "rank_p_factor: invalid target rank");
  }
  require_hermitian(G, policy.herm, "rank_p_factor");
  const CMatrix H = 0.5 * (G + G.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  const Eigen::Index n = ev.size();
  const double top = std::max(std::abs(ev(n - 1)), std::abs(ev(0)));
  if (ev(0) < -policy.pd * std::max(1.0, top)) {
    std::ostringstream os;
    os << "rank_p_factor: negative eigenvalue " << ev(0);
    throw Error(ErrorCode::NotPSD, os.str());
  }
  const double threshold = policy.rank * top;
  const double pth = ev(n - p);
  const double next = (n > p) ? ev(n - p - 1) : 0.0;
  if (!(pth > threshold) || next >= threshold) {
    std::ostringstream os;
    os << "rank_p_factor: expected numerical rank " << p << " (p-th eigenvalue " << pth
       << ", next " << next << ", threshold " << threshold << ")";
    throw Error(ErrorCode::RankMismatch, os.str());
  }

  // Within a cluster of (nearly) equal eigenvalues the eigenvectors are not
  // unique; the basis is fixed by Gram-Schmidt on the projected unit vectors
  // e_0, e_1, ..., and the rows are Q* V L^{1/2} V* so beta* beta = G holds for
  // any orthonormal Q spanning the cluster.
  const double phase_cut = std::sqrt(std::numeric_limits<double>::epsilon());
  const double cluster_tol = 1e-10 * std::max(1.0, top);
  CMatrix beta(p, n);
  int r = 0;
  while (r < p) {
    int d = 1;
    while (r + d < p && ev(n - 1 - r) - ev(n - 1 - r - d) <= cluster_tol) ++d;
    const CMatrix V = es.eigenvectors().middleCols(n - r - d, d);
    const Eigen::VectorXd root = ev.segment(n - r - d, d).cwiseSqrt();
    const CMatrix P = V * V.adjoint();
    CMatrix Q(n, d);
    int found = 0;
    for (Eigen::Index i = 0; i < n && found < d; ++i) {
      CVector w = P.col(i);
      for (int c = 0; c < found; ++c) w -= Q.col(c) * (Q.col(c).adjoint() * w)(0, 0);
      if (w.norm() <= phase_cut) continue;
      w.normalize();
      for (Eigen::Index t = 0; t < w.size(); ++t) {
        if (std::abs(w(t)) > phase_cut) {
          w *= std::conj(w(t)) / std::abs(w(t));
          break;
        }
      }
      Q.col(found++) = w;
    }
    beta.middleRows(r, d) = Q.adjoint() * V * root.cast<cplx>().asDiagonal() * V.adjoint();
    r += d;
  }
  return beta;
}

CMatrix block_toeplitz(std::span<const CMatrix> alpha) {
  if (alpha.empty()) return CMatrix(0, 0);
  const Eigen::Index p = alpha[0].rows();
  const auto count = static_cast<Eigen::Index>(alpha.size());
  for (const auto& a : alpha) {
    if (a.rows() != p || a.cols() != p) {
      throw Error(ErrorCode::DimensionMismatch, "block_toeplitz: blocks must be p x p");
    }
  }
  CMatrix S(count * p, count * p);
  for (Eigen::Index k = 0; k < count; ++k) {
    for (Eigen::Index c = 0; c < count; ++c) {
      const Eigen::Index d = c - k;
      auto block = S.block(k * p, c * p, p, p);
      if (d == 0) {
        block = alpha[0] + alpha[0].adjoint();
      } else if (d < 0) {
        block = alpha[static_cast<std::size_t>(-d)];
      } else {
        block = alpha[static_cast<std::size_t>(d)].adjoint();
      }
    }
  }
  return S;
}

CMatrix pd_solve(const CMatrix& S, const CMatrix& B, const NumericPolicy& policy) {
  require_square(S, "pd_solve");
  if (S.rows() != B.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "pd_solve: right-hand side has wrong height");
  }
  require_hermitian(S, policy.herm, "pd_solve");
  Eigen::LLT<CMatrix> llt(S);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "pd_solve: Cholesky breakdown");
  }
  return llt.solve(B);
}

double condition_number(const CMatrix& M) {
  if (M.size() == 0) return 1.0;
  Eigen::JacobiSVD<CMatrix> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || !std::isfinite(smax)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

CMatrix checked_solve(const CMatrix& M, const CMatrix& B, double cond_limit, ErrorCode code,
                      const std::string& what) {
  require_square(M, what.c_str());
  const double cond = condition_number(M);
  if (!(cond <= cond_limit)) {
    std::ostringstream os;
    os << what << ": condition number " << cond << " exceeds " << cond_limit;
    throw Error(code, os.str());
  }
  return M.partialPivLu().solve(B);
}

}  // namespace ddirac
