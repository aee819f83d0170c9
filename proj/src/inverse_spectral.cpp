#include "ddirac/inverse_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ddirac {

TaylorSequence::TaylorSequence(int p, std::vector<CMatrix> alpha) : p_(p), alpha_(std::move(alpha)) {
  if (p <= 0 || alpha_.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "Taylor sequence needs p > 0 and alpha_0");
  }
  for (std::size_t k = 0; k < alpha_.size(); ++k) {
    if (alpha_[k].rows() != p || alpha_[k].cols() != p) {
      throw Error(ErrorCode::DimensionMismatch, "alpha_k must be p x p", k);
    }
  }
}

TaylorSequence TaylorSequence::prefix(std::size_t count) const {
  if (count == 0 || count > alpha_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "prefix length out of range");
  }
  return TaylorSequence(p_, std::vector<CMatrix>(alpha_.begin(), alpha_.begin() + count));
}

BetaSequence::BetaSequence(SignatureContext ctx, std::vector<CMatrix> beta,
                           const NumericPolicy& policy)
    : ctx_(std::move(ctx)), beta_(std::move(beta)) {
  if (beta_.empty()) throw Error(ErrorCode::DimensionMismatch, "empty beta sequence");
  const auto Ip = CMatrix::Identity(p(), p());
  for (std::size_t k = 0; k < beta_.size(); ++k) {
    if (beta_[k].rows() != p() || beta_[k].cols() != ctx_.m()) {
      throw Error(ErrorCode::DimensionMismatch, "beta(k) must be p x 2p", k);
    }
    const double res = norm(beta_[k] * ctx_.J() * beta_[k].adjoint() - Ip);
    if (res > policy.jnorm * std::max(1.0, beta_[k].squaredNorm())) {
      std::ostringstream os;
      os << "beta(" << k << ") J beta(" << k << ")* - I has norm " << res;
      throw Error(ErrorCode::JNormViolated, os.str(), k);
    }
  }
}

CMatrix StructuredA::dense() const {
  const Eigen::Index n = static_cast<Eigen::Index>(N + 1) * p;
  CMatrix A = CMatrix::Zero(n, n);
  const auto Ip = CMatrix::Identity(p, p);
  for (std::size_t k = 0; k <= N; ++k) {
    for (std::size_t c = 0; c <= k; ++c) {
      A.block(static_cast<Eigen::Index>(k) * p, static_cast<Eigen::Index>(c) * p, p, p) =
          (c == k ? 0.5 : 1.0) * kI * Ip;
    }
  }
  return A;
}

CMatrix taylor_pi(const TaylorSequence& alpha, std::size_t r) {
  const int p = alpha.p();
  CMatrix Pi(static_cast<Eigen::Index>(r + 1) * p, 2 * p);
  CMatrix partial = CMatrix::Zero(p, p);
  for (std::size_t k = 0; k <= r; ++k) {
    partial += alpha[k];
    const auto row = static_cast<Eigen::Index>(k) * p;
    Pi.block(row, 0, p, p).setIdentity();
    Pi.block(row, p, p, p) = partial;
  }
  return Pi;
}

BetaSequence beta_from_potentials(const PotentialSequence& sys, const NumericPolicy& policy) {
  const auto& ctx = sys.ctx();
  const auto Ip = CMatrix::Identity(ctx.p(), ctx.p());
  std::vector<CMatrix> beta;
  beta.reserve(sys.size());
  for (std::size_t k = 0; k < sys.size(); ++k) {
    CMatrix hat;
    try {
      hat = rank_p_factor(0.5 * (sys[k] + ctx.j()), ctx.p(), policy);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("C_") + std::to_string(k) + ": " + e.what(), k);
    }
    // beta_hat j beta_hat* = I follows from C j C = j; it is checked, not imposed.
    const double res = norm(hat * ctx.j() * hat.adjoint() - Ip);
    if (res > policy.jnorm * std::max(1.0, hat.squaredNorm())) {
      std::ostringstream os;
      os << "C_" << k << " violates C j C = j: beta_hat j beta_hat* - I has norm " << res;
      throw Error(ErrorCode::JNormViolated, os.str(), k);
    }
    beta.push_back(hat * ctx.K().adjoint());
  }
  return BetaSequence(ctx, std::move(beta), policy);
}

PotentialSequence potentials_from_beta(const BetaSequence& beta) {
  const auto& ctx = beta.ctx();
  std::vector<CMatrix> C;
  C.reserve(beta.size());
  for (const auto& b : beta.blocks()) {
    const CMatrix bk = b * ctx.K();
    CMatrix Ck = 2.0 * bk.adjoint() * bk - ctx.j();
    C.push_back(0.5 * (Ck + Ck.adjoint()));
  }
  return PotentialSequence(ctx, std::move(C));
}

TaylorSequence direct_taylor(const PotentialSequence& sys, const NumericPolicy& policy) {
  return direct_taylor(beta_from_potentials(sys, policy), policy);
}

TaylorSequence direct_taylor(const BetaSequence& beta, const NumericPolicy& policy,
                             DirectDiagnostics* diagnostics) {
  const int p = beta.p();
  const CMatrix& J = beta.ctx().J();
  const std::size_t N = beta.size() - 1;
  const Eigen::Index dim = static_cast<Eigen::Index>(N + 1) * p;
  auto first = [p](const CMatrix& b) { return b.leftCols(p); };

  DirectDiagnostics local;
  CMatrix V = CMatrix::Zero(dim, dim);
  CMatrix v = first(beta[0]);
  {
    const double cond = condition_number(v);
    local.v_minus_condition.push_back(cond);
    if (!(cond <= policy.resolvent_cond)) {
      throw Error(ErrorCode::SingularLeadingBlock, "first block of beta(0) is singular", 0);
    }
  }
  V.topLeftCorner(p, p) = v;

  for (std::size_t k = 1; k <= N; ++k) {
    const Eigen::Index kp = static_cast<Eigen::Index>(k) * p;
    v = beta[k] * J * beta[k - 1].adjoint() * v;
    const double cond = condition_number(v);
    local.v_minus_condition.push_back(cond);
    if (!(cond <= policy.resolvent_cond)) {
      std::ostringstream os;
      os << "v_-(" << k << ") is singular (cond " << cond << ")";
      throw Error(ErrorCode::SingularVMinus, os.str(), k);
    }

    CMatrix X(p, kp);
    if (k == 1) {
      X = first(beta[1]) - v;
    } else {
      const Eigen::Index tail = kp - p;  // (k-1) p columns of X~(k)
      CMatrix row(p, kp);
      for (std::size_t c = 0; c < k; ++c) {
        row.middleCols(static_cast<Eigen::Index>(c) * p, p) = beta[k] * J * beta[c].adjoint();
      }
      CMatrix T = (row * V.topLeftCorner(kp, kp)).leftCols(tail);
      for (Eigen::Index c = 0; c < tail; c += p) T.middleCols(c, p) -= v;
      // A(k-2) + (i/2) I = i L with L the block lower triangular matrix of
      // identities, so the leading factor i cancels. L^{-1} has I on the
      // diagonal and -I on the first subdiagonal: right multiplication
      // differences adjacent blocks.
      const CMatrix& Y = T;
      CMatrix Xt(p, tail);
      for (Eigen::Index c = 0; c < tail; c += p) {
        Xt.middleCols(c, p) = Y.middleCols(c, p);
        if (c + p < tail) Xt.middleCols(c, p) -= Y.middleCols(c + p, p);
      }
      CMatrix X0 = first(beta[k]) - v;
      for (Eigen::Index c = 0; c < tail; c += p) X0 -= Xt.middleCols(c, p);
      X << X0, Xt;
    }
    V.block(kp, 0, p, kp) = X;
    V.block(kp, kp, p, p) = v;
  }

  CMatrix B(dim, 2 * p);
  for (std::size_t k = 0; k <= N; ++k) B.middleRows(static_cast<Eigen::Index>(k) * p, p) = beta[k];
  // Block forward substitution; the diagonal blocks v_-(k) are full p x p.
  CMatrix Pi(dim, 2 * p);
  for (std::size_t k = 0; k <= N; ++k) {
    const Eigen::Index kp = static_cast<Eigen::Index>(k) * p;
    CMatrix rhs = B.middleRows(kp, p);
    if (k > 0) rhs -= V.block(kp, 0, p, kp) * Pi.topRows(kp);
    Pi.middleRows(kp, p) = V.block(kp, kp, p, p).partialPivLu().solve(rhs);
  }

  double phi1 = 0.0;
  for (std::size_t k = 0; k <= N; ++k) {
    const auto block = Pi.block(static_cast<Eigen::Index>(k) * p, 0, p, p);
    phi1 = std::max(phi1, norm(block - CMatrix::Identity(p, p)));
  }
  local.phi1_residual = phi1;
  if (!(phi1 <= policy.phi1)) {
    std::ostringstream os;
    os << "first block column of V_-^{-1} B deviates from the identity stack by " << phi1;
    throw Error(ErrorCode::Phi1Mismatch, os.str());
  }

  std::vector<CMatrix> alpha;
  alpha.reserve(N + 1);
  CMatrix prev = CMatrix::Zero(p, p);
  for (std::size_t k = 0; k <= N; ++k) {
    const CMatrix psi = Pi.block(static_cast<Eigen::Index>(k) * p, p, p, p);
    alpha.push_back(psi - prev);
    prev = psi;
  }
  if (diagnostics != nullptr) *diagnostics = std::move(local);
  return TaylorSequence(p, std::move(alpha));
}

namespace {

CMatrix reconstruct_potential(const SignatureContext& ctx, const CMatrix& G) {
  CMatrix C = 2.0 * ctx.K().adjoint() * G * ctx.K() - ctx.j();
  return 0.5 * (C + C.adjoint());
}

void throw_not_pd(std::size_t r, double min_eig) {
  std::ostringstream os;
  os << "block Toeplitz S(" << r << ") is not positive definite (min eigenvalue " << min_eig
     << ")";
  throw Error(ErrorCode::ToeplitzNotPD, os.str(), r);
}

/// G = M* E^{-1} M with M = P S^{-1} Pi, E = P S^{-1} P*; returns the relative
/// residual of M J M* = E alongside.
std::pair<CMatrix, double> beta_gram(const CMatrix& M, const CMatrix& E, const CMatrix& J) {
  const CMatrix Eh = 0.5 * (E + E.adjoint());
  Eigen::LLT<CMatrix> llt(Eh);
  const CMatrix G = M.adjoint() * llt.solve(M);
  const double res = norm(M * J * M.adjoint() - Eh) / std::max(norm(Eh), 1e-300);
  return {0.5 * (G + G.adjoint()), res};
}

void check_jnorm(double res, std::size_t r, const NumericPolicy& policy, double cond) {
  // The identity is exact; rounding scales with the conditioning of S(r).
  const double allowed = policy.jnorm * std::max(1.0, cond);
  if (res > allowed) {
    std::ostringstream os;
    os << "J-normalization of the reconstructed factor fails at r = " << r << " (residual "
       << res << ")";
    throw Error(ErrorCode::JNormViolated, os.str(), r);
  }
}

PotentialSequence inverse_cholesky(const TaylorSequence& alpha, const NumericPolicy& policy,
                                   InverseDiagnostics& diag) {
  const int p = alpha.p();
  const SignatureContext ctx(p);
  std::vector<CMatrix> C;
  C.reserve(alpha.size());
  for (std::size_t r = 0; r < alpha.size(); ++r) {
    const std::span<const CMatrix> head(alpha.blocks().data(), r + 1);
    const CMatrix S = block_toeplitz(head);
    const Eigen::VectorXd ev = hermitian_eigenvalues(S);
    const double min_eig = ev.minCoeff();
    diag.toeplitz_min_eig.push_back(min_eig);
    if (!(min_eig > policy.pd * std::max(1.0, norm(S)))) throw_not_pd(r, min_eig);

    const Eigen::Index dim = S.rows();
    CMatrix Pstar = CMatrix::Zero(dim, p);
    Pstar.bottomRows(p).setIdentity();
    const CMatrix Z = pd_solve(S, Pstar, policy);  // S^{-1} P*
    const CMatrix Pi = taylor_pi(alpha, r);
    const CMatrix M = Z.adjoint() * Pi;
    const CMatrix E = Z.bottomRows(p);
    auto [G, res] = beta_gram(M, E, ctx.J());
    diag.jnorm_residuals.push_back(res);
    check_jnorm(res, r, policy, ev.maxCoeff() / min_eig);
    C.push_back(reconstruct_potential(ctx, G));
  }
  return PotentialSequence(ctx, std::move(C));
}

// Block Levinson recursion on the nested Toeplitz matrices: keeps the forward
// row F with F S(r) = [E_f 0 .. 0] and the backward row B with
// B S(r) = [0 .. 0 E_b]; then P S(r)^{-1} = E_b^{-1} B.
PotentialSequence inverse_levinson(const TaylorSequence& alpha, const NumericPolicy& policy,
                                   InverseDiagnostics& diag) {
  const int p = alpha.p();
  const SignatureContext ctx(p);
  const auto& a = alpha.blocks();
  // s_d for d in [-N, N]: s_{-d} = alpha_d, s_d = alpha_d^*.
  auto s = [&](long d) -> CMatrix {
    if (d == 0) return a[0] + a[0].adjoint();
    if (d < 0) return a[static_cast<std::size_t>(-d)];
    return a[static_cast<std::size_t>(d)].adjoint();
  };
  const CMatrix s0 = s(0);
  const double scale = std::max(1.0, norm(s0));

  std::vector<CMatrix> F{CMatrix::Identity(p, p)};
  std::vector<CMatrix> Bk{CMatrix::Identity(p, p)};
  CMatrix Ef = s0;
  CMatrix Eb = s0;
  std::vector<CMatrix> C;
  C.reserve(alpha.size());

  for (std::size_t r = 0; r < alpha.size(); ++r) {
    if (r > 0) {
      CMatrix df = CMatrix::Zero(p, p);
      CMatrix db = CMatrix::Zero(p, p);
      for (std::size_t k = 0; k < r; ++k) {
        df += F[k] * s(static_cast<long>(r - k));
        db += Bk[k] * a[k + 1];
      }
      const CMatrix gf = -df * Eb.partialPivLu().inverse();
      const CMatrix gb = -db * Ef.partialPivLu().inverse();
      std::vector<CMatrix> Fn(r + 1), Bn(r + 1);
      for (std::size_t k = 0; k <= r; ++k) {
        const CMatrix fext = k < r ? F[k] : CMatrix::Zero(p, p);
        const CMatrix bext = k > 0 ? Bk[k - 1] : CMatrix::Zero(p, p);
        Fn[k] = fext + gf * bext;
        Bn[k] = bext + gb * fext;
      }
      Ef = Ef + gf * db;
      Eb = Eb + gb * df;
      Ef = 0.5 * (Ef + Ef.adjoint());
      Eb = 0.5 * (Eb + Eb.adjoint());
      F = std::move(Fn);
      Bk = std::move(Bn);
    }
    const double min_eig = min_eigenvalue(Eb);
    diag.toeplitz_min_eig.push_back(min_eig);
    if (!(min_eig > policy.pd * scale)) throw_not_pd(r, min_eig);

    const CMatrix Pi = taylor_pi(alpha, r);
    CMatrix BPi = CMatrix::Zero(p, 2 * p);
    for (std::size_t k = 0; k <= r; ++k) {
      BPi += Bk[k] * Pi.middleRows(static_cast<Eigen::Index>(k) * p, p);
    }
    const CMatrix EbInv = Eb.partialPivLu().inverse();
    const CMatrix M = EbInv * BPi;
    auto [G, res] = beta_gram(M, EbInv, ctx.J());
    diag.jnorm_residuals.push_back(res);
    check_jnorm(res, r, policy, scale / min_eig);
    C.push_back(reconstruct_potential(ctx, G));
  }
  return PotentialSequence(ctx, std::move(C));
}

}  // namespace

PotentialSequence inverse_potentials(const TaylorSequence& alpha, ToeplitzSolver solver,
                                     const NumericPolicy& policy,
                                     InverseDiagnostics* diagnostics) {
  InverseDiagnostics local;
  PotentialSequence out = solver == ToeplitzSolver::Cholesky
                              ? inverse_cholesky(alpha, policy, local)
                              : inverse_levinson(alpha, policy, local);
  if (diagnostics != nullptr) *diagnostics = std::move(local);
  return out;
}

double lyapunov_residual(const TaylorSequence& alpha) {
  const StructuredA A{alpha.last_index(), alpha.p()};
  const CMatrix Ad = A.dense();
  const CMatrix S = block_toeplitz(alpha.blocks());
  const CMatrix Pi = taylor_pi(alpha, alpha.last_index());
  const SignatureContext ctx(alpha.p());
  return norm(Ad * S - S * Ad.adjoint() - kI * Pi * ctx.J() * Pi.adjoint());
}

std::vector<double> toeplitz_positivity(const TaylorSequence& alpha) {
  std::vector<double> out;
  out.reserve(alpha.size());
  for (std::size_t r = 0; r < alpha.size(); ++r) {
    const std::span<const CMatrix> head(alpha.blocks().data(), r + 1);
    out.push_back(min_eigenvalue(block_toeplitz(head)));
  }
  return out;
}

TaylorExtraction extract_taylor(const std::function<CMatrix(cplx)>& f, int p, std::size_t N,
                                const ExtractionOptions& options) {
  const std::size_t M = options.samples;
  const double rho = options.radius;
  if (!(rho > 0.0 && rho < 1.0) || M < 2 * (N + 2)) {
    throw Error(ErrorCode::DimensionMismatch, "extraction needs 0 < radius < 1 and enough samples");
  }
  std::vector<CMatrix> acc(N + 2, CMatrix::Zero(p, p));
  for (std::size_t m = 0; m < M; ++m) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(M);
    const cplx z = std::polar(rho, t);
    const CMatrix value = f(z);
    if (!value.allFinite()) {
      throw Error(ErrorCode::AnalyticityViolation, "non-finite sample on the extraction circle");
    }
    for (std::size_t k = 0; k < N + 2; ++k) {
      acc[k] += value * std::polar(1.0, -t * static_cast<double>(k));
    }
  }
  std::vector<CMatrix> alpha;
  alpha.reserve(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    alpha.push_back(acc[k] / (static_cast<double>(M) * std::pow(rho, static_cast<double>(k))));
  }
  // |alpha_{N+1}| rho: the first neglected block scaled back to the circle.
  const double next = norm(acc[N + 1]) / static_cast<double>(M);
  return {TaylorSequence(p, std::move(alpha)), next / std::pow(rho, static_cast<double>(N))};
}

namespace {

TaylorExtraction rational_taylor_impl(const std::function<CMatrix(cplx)>& phi_identity, int p,
                                      const CMatrix& state_matrix, std::size_t N,
                                      const ExtractionOptions& options,
                                      const NumericPolicy& policy) {
  // Poles of phi_I sit at eigenvalues of the state matrix; reject any whose
  // disk image lies on or inside the extraction circle.
  Eigen::ComplexEigenSolver<CMatrix> es(state_matrix, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx mu = es.eigenvalues()(i);
    if (std::abs(mu - kI) < 1e-300) continue;  // z = infinity
    const cplx zmu = (mu + kI) / (mu - kI);
    if (std::abs(zmu) <= options.radius * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "pole of phi_I at lambda = " << mu << " maps inside the extraction circle";
      throw Error(ErrorCode::AnalyticityViolation, os.str());
    }
  }
  auto f = [&](cplx z) -> CMatrix {
    const cplx lambda = kI * (z + 1.0) / (z - 1.0);
    CMatrix phi;
    try {
      phi = phi_identity(lambda);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ResolventSingular) {
        throw Error(ErrorCode::AnalyticityViolation, e.what());
      }
      throw;
    }
    return kI * herglotz_map(phi, policy);
  };
  return extract_taylor(f, p, N, options);
}

}  // namespace

TaylorExtraction rational_taylor(const BdtParameters& params, std::size_t N,
                                 const ExtractionOptions& options, const NumericPolicy& policy) {
  Eigen::LLT<CMatrix> llt(params.S0());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "rational_taylor requires S0 > 0");
  }
  const CMatrix Psi = params.Psi();
  const CMatrix Ax = params.A() + kI * Psi * llt.solve(Psi).adjoint();
  return rational_taylor_impl([&](cplx l) { return explicit_weyl(params, l, policy); },
                              params.p(), Ax, N, options, policy);
}

TaylorExtraction rational_taylor(const WeylRealization& rz, std::size_t N,
                                 const ExtractionOptions& options, const NumericPolicy& policy) {
  return rational_taylor_impl([&](cplx l) { return rz.evaluate(l, policy); }, rz.p(), rz.theta(),
                              N, options, policy);
}

TaylorExtraction disk_taylor(const PotentialSequence& sys, const MoebiusPair& pair, std::size_t N,
                             const ExtractionOptions& options, const NumericPolicy& policy) {
  auto f = [&](cplx z) -> CMatrix {
    const cplx lambda = kI * (z + 1.0) / (z - 1.0);
    return kI * weyl_disk_eval(sys, pair, lambda, policy);
  };
  return extract_taylor(f, sys.p(), N, options);
}

BorgMarchenkoReport borg_marchenko_check(const PotentialSequence& a, const PotentialSequence& b,
                                         std::size_t N, double tolerance,
                                         const NumericPolicy& policy) {
  if (N > a.last_index() || N > b.last_index()) {
    throw Error(ErrorCode::IndexOutOfRange, "N exceeds one of the system lengths");
  }
  if (a.p() != b.p()) throw Error(ErrorCode::DimensionMismatch, "block sizes differ");
  const TaylorSequence ta = direct_taylor(a, policy);
  const TaylorSequence tb = direct_taylor(b, policy);
  BorgMarchenkoReport rep;
  const std::size_t common = std::min(ta.size(), tb.size());
  for (std::size_t k = 0; k < common; ++k) {
    const double dc = norm(ta[k] - tb[k]);
    const double dp = norm(a[k] - b[k]);
    const double sc = std::max(1.0, norm(ta[k]));
    const double sp = std::max(1.0, norm(a[k]));
    if (k <= N) {
      rep.max_coefficient_deviation = std::max(rep.max_coefficient_deviation, dc);
      rep.max_potential_deviation = std::max(rep.max_potential_deviation, dp);
    }
    if (dc > tolerance * sc && rep.first_coefficient_mismatch == Error::npos) {
      rep.first_coefficient_mismatch = k;
    }
    if (dp > tolerance * sp && rep.first_potential_mismatch == Error::npos) {
      rep.first_potential_mismatch = k;
    }
  }
  rep.coefficients_agree =
      rep.first_coefficient_mismatch == Error::npos || rep.first_coefficient_mismatch > N;
  rep.potentials_agree =
      rep.first_potential_mismatch == Error::npos || rep.first_potential_mismatch > N;
  if (rep.coefficients_agree && !rep.potentials_agree) {
    std::ostringstream os;
    os << "Taylor coefficients agree up to " << N << " but potentials differ at "
       << rep.first_potential_mismatch;
    throw Error(ErrorCode::InvariantViolated, os.str(), rep.first_potential_mismatch);
  }
  return rep;
}

}  // namespace ddirac
