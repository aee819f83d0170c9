#include "ddirac/documents.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ddirac::cli {

void Location::fail(const std::string& problem) const {
  throw CliError(kExitUsage, file + ": " + (pointer.empty() ? "/" : pointer) + ": " + problem);
}

json encode(cplx z) { return json::array({z.real(), z.imag()}); }

json encode(const CMatrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(encode(M(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json encode(const std::vector<CMatrix>& Ms) {
  json out = json::array();
  for (const auto& M : Ms) out.push_back(encode(M));
  return out;
}

json encode(const std::vector<cplx>& zs) {
  json out = json::array();
  for (const cplx z : zs) out.push_back(encode(z));
  return out;
}

double decode_real(const json& v, const Location& at) {
  if (!v.is_number()) at.fail("expected a number");
  return v.get<double>();
}

std::size_t decode_count(const json& v, const Location& at) {
  if (!v.is_number_integer() || v.get<long long>() < 0) at.fail("expected a nonnegative integer");
  return v.get<std::size_t>();
}

cplx decode_complex(const json& v, const Location& at) {
  if (!v.is_array() || v.size() != 2) at.fail("expected a complex number as [re, im]");
  return {decode_real(v[0], at / 0), decode_real(v[1], at / 1)};
}

CMatrix decode_matrix(const json& v, const Location& at, Eigen::Index rows, Eigen::Index cols) {
  if (!v.is_array() || v.empty()) at.fail("expected a matrix as a nonempty array of rows");
  const auto r = static_cast<Eigen::Index>(v.size());
  if (rows >= 0 && r != rows) {
    at.fail("expected " + std::to_string(rows) + " rows, found " + std::to_string(r));
  }
  if (!v[0].is_array()) (at / 0).fail("expected a row array");
  const auto c = static_cast<Eigen::Index>(v[0].size());
  if (cols >= 0 && c != cols) {
    (at / 0).fail("expected " + std::to_string(cols) + " columns, found " + std::to_string(c));
  }
  CMatrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    const Location rat = at / static_cast<std::size_t>(i);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      rat.fail("ragged matrix row");
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      M(i, k) = decode_complex(row[static_cast<std::size_t>(k)], rat / static_cast<std::size_t>(k));
    }
  }
  return M;
}

std::vector<CMatrix> decode_matrices(const json& v, const Location& at, Eigen::Index rows,
                                     Eigen::Index cols, std::optional<std::size_t> count) {
  if (!v.is_array()) at.fail("expected an array of matrices");
  if (count && v.size() != *count) {
    at.fail("expected " + std::to_string(*count) + " matrices, found " + std::to_string(v.size()));
  }
  std::vector<CMatrix> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(decode_matrix(v[k], at / k, rows, cols));
  return out;
}

std::vector<cplx> decode_complex_list(const json& v, const Location& at,
                                      std::optional<std::size_t> count) {
  if (!v.is_array()) at.fail("expected an array of complex numbers");
  if (count && v.size() != *count) {
    at.fail("expected " + std::to_string(*count) + " entries, found " + std::to_string(v.size()));
  }
  std::vector<cplx> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(decode_complex(v[k], at / k));
  return out;
}

const json& Document::field(const std::string& key) const {
  if (!body.contains(key)) at().fail("missing field \"" + key + "\"");
  return body.at(key);
}

const json& Document::payload(const std::string& key) const {
  const json& pl = field("payload");
  if (!pl.is_object() || !pl.contains(key)) at("/payload").fail("missing field \"" + key + "\"");
  return pl.at(key);
}

bool Document::has_payload(const std::string& key) const {
  return body.contains("payload") && body["payload"].is_object() && body["payload"].contains(key);
}

int Document::p() const {
  const std::size_t p = decode_count(field("p"), at("/p"));
  if (p == 0) at("/p").fail("p must be positive");
  return static_cast<int>(p);
}

int Document::n() const {
  const std::size_t n = decode_count(field("n"), at("/n"));
  if (n == 0) at("/n").fail("n must be positive");
  return static_cast<int>(n);
}

std::size_t Document::N() const { return decode_count(field("N"), at("/N")); }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitUsage, path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError(kExitUsage, path + ": /: malformed JSON (" + e.what() + ")");
  }
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw CliError(kExitUsage, path + ": cannot open for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw CliError(kExitUsage, path + ": write failed");
}

Document load_document(const std::string& path, std::initializer_list<const char*> kinds) {
  Document doc{path, "", read_json_file(path)};
  if (!doc.body.is_object()) doc.at().fail("expected a document object");
  const json& kind = doc.field("kind");
  if (!kind.is_string()) doc.at("/kind").fail("expected a string");
  doc.kind = kind.get<std::string>();
  bool accepted = false;
  std::string expected;
  for (const char* k : kinds) {
    accepted = accepted || doc.kind == k;
    expected += (expected.empty() ? "" : " or ") + std::string(k);
  }
  if (!accepted) doc.at("/kind").fail("expected kind " + expected + ", found " + doc.kind);
  const json& version = doc.field("version");
  if (!version.is_string() || version.get<std::string>() != kFormatVersion) {
    doc.at("/version").fail(std::string("unsupported format version, expected \"") +
                            kFormatVersion + "\"");
  }
  if (!doc.field("payload").is_object()) doc.at("/payload").fail("expected an object");
  return doc;
}

json envelope(const std::string& kind, json header, json payload) {
  json doc = {{"kind", kind}, {"version", kFormatVersion}};
  for (auto& [key, value] : header.items()) doc[key] = value;
  doc["payload"] = std::move(payload);
  return doc;
}

json validation_json(const ValidationReport& report, const NumericPolicy& policy) {
  json steps = json::array();
  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    const auto& s = report.steps[k];
    json failures = json::array();
    const double tol = policy.herm * s.scale;
    if (s.hermitian_residual > tol) failures.push_back("C = C*");
    if (s.j_residual > tol * s.scale) failures.push_back("C j C - j");
    if (!(s.min_eig > 0.0)) failures.push_back("C > 0");
    if (s.min_eig_plus_j < -tol) failures.push_back("C + j >= 0");
    if (s.min_eig_minus_j < -tol) failures.push_back("C - j >= 0");
    steps.push_back({{"k", k},
                     {"hermitian_residual", s.hermitian_residual},
                     {"j_residual", s.j_residual},
                     {"min_eig", s.min_eig},
                     {"min_eig_plus_j", s.min_eig_plus_j},
                     {"min_eig_minus_j", s.min_eig_minus_j},
                     {"pass", s.pass},
                     {"failures", failures}});
  }
  json out = {{"pass", report.pass}, {"steps", steps}};
  out["first_failure"] = report.pass ? json(nullptr) : json(report.first_failure);
  return out;
}

json potentials_document(const PotentialSequence& sys, const std::optional<json>& report) {
  json payload = {{"C", encode(sys.potentials())}};
  if (report) payload["validation"] = *report;
  return envelope("potentials", {{"p", sys.p()}, {"N", sys.last_index()}}, std::move(payload));
}

json taylor_document(const TaylorSequence& alpha, const std::vector<double>& toeplitz_min_eig) {
  return envelope("taylor", {{"p", alpha.p()}, {"N", alpha.last_index()}},
                  {{"alpha", encode(alpha.blocks())}, {"toeplitz_min_eig", toeplitz_min_eig}});
}

json params_document(const BdtParameters& params) {
  return envelope("bdt-params", {{"p", params.p()}, {"n", params.n()}},
                  {{"A", encode(params.A())},
                   {"S0", encode(params.S0())},
                   {"Pi0", encode(params.Pi0())}});
}

json realization_document(const WeylRealization& rz) {
  return envelope("realization", {{"p", rz.p()}, {"n", rz.n()}},
                  {{"theta", encode(rz.theta())},
                   {"PhiT", encode(rz.PhiT())},
                   {"PsiT", encode(rz.PsiT())}});
}

json szego_document(const SzegoSequence& sz, const std::optional<SchurCoefficients>& rho) {
  json payload = {{"R", encode(sz.R())}, {"theta", encode(sz.theta())}};
  if (rho) payload["rho"] = encode(rho->values());
  return envelope("szego", {{"p", sz.p()}, {"N", sz.size() - 1}}, std::move(payload));
}

namespace {

// Library errors raised while building objects from a document are reported
// against the payload as invariant failures.
template <class F>
auto guarded(const Document& doc, const std::string& pointer, F&& build) {
  try {
    return build();
  } catch (const Error& e) {
    std::string where = pointer;
    if (e.index() != Error::npos) where += "/" + std::to_string(e.index());
    throw CliError(kExitInvariant, doc.file + ": " + where + ": " + e.what());
  }
}

}  // namespace

PotentialSequence potentials_from(const Document& doc) {
  const int p = doc.p();
  const std::size_t N = doc.N();
  auto C = decode_matrices(doc.payload("C"), doc.at("/payload/C"), 2 * p, 2 * p, N + 1);
  return PotentialSequence(SignatureContext(p), std::move(C));
}

TaylorSequence taylor_from(const Document& doc) {
  const int p = doc.p();
  const std::size_t N = doc.N();
  return TaylorSequence(p, decode_matrices(doc.payload("alpha"), doc.at("/payload/alpha"), p, p,
                                           N + 1));
}

BdtParameters params_from(const Document& doc, const NumericPolicy& policy) {
  if (doc.kind == "realization") return realization_to_params(realization_from(doc, policy), policy);
  const int p = doc.p();
  const int n = doc.n();
  CMatrix A = decode_matrix(doc.payload("A"), doc.at("/payload/A"), n, n);
  CMatrix S0 = decode_matrix(doc.payload("S0"), doc.at("/payload/S0"), n, n);
  CMatrix Pi0 = decode_matrix(doc.payload("Pi0"), doc.at("/payload/Pi0"), n, 2 * p);
  return guarded(doc, "/payload", [&] { return BdtParameters(A, S0, Pi0, policy); });
}

WeylRealization realization_from(const Document& doc, const NumericPolicy& policy) {
  const int p = doc.p();
  const int n = doc.n();
  CMatrix theta = decode_matrix(doc.payload("theta"), doc.at("/payload/theta"), n, n);
  CMatrix PhiT = decode_matrix(doc.payload("PhiT"), doc.at("/payload/PhiT"), n, p);
  CMatrix PsiT = decode_matrix(doc.payload("PsiT"), doc.at("/payload/PsiT"), n, p);
  return guarded(doc, "/payload", [&] { return WeylRealization(theta, PhiT, PsiT, policy); });
}

SzegoSequence szego_from(const Document& doc, const NumericPolicy& policy) {
  const int p = doc.p();
  const std::size_t N = doc.N();
  if (!doc.has_payload("R")) {
    if (p != 1) doc.at("/p").fail("a Schur-coefficient document requires p = 1");
    auto rho = decode_complex_list(doc.payload("rho"), doc.at("/payload/rho"), N + 1);
    return guarded(doc, "/payload/rho",
                   [&] { return schur_to_R(SchurCoefficients(std::move(rho))); });
  }
  auto R = decode_matrices(doc.payload("R"), doc.at("/payload/R"), 2 * p, 2 * p, N + 1);
  std::vector<cplx> theta;
  if (doc.has_payload("theta")) {
    theta = decode_complex_list(doc.payload("theta"), doc.at("/payload/theta"), N + 1);
  } else {
    const SignatureContext ctx(p);
    for (const auto& Rk : R) theta.push_back(theta_of(ctx, Rk));
  }
  return guarded(doc, "/payload/R",
                 [&] { return SzegoSequence(SignatureContext(p), R, theta, policy); });
}

NumericPolicy load_policy(const std::string& path) {
  const json doc = read_json_file(path);
  const Location at{path, ""};
  if (!doc.is_object()) at.fail("expected an object of tolerances");
  NumericPolicy policy;
  const std::pair<const char*, double*> fields[] = {
      {"herm", &policy.herm},
      {"pd", &policy.pd},
      {"rank", &policy.rank},
      {"solve", &policy.solve},
      {"resolvent_cond", &policy.resolvent_cond},
      {"identity", &policy.identity},
      {"j_unitary", &policy.j_unitary},
      {"phi1", &policy.phi1},
      {"jnorm", &policy.jnorm},
  };
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const auto& [name, slot] : fields) {
      if (key == name) {
        *slot = decode_real(value, at / key);
        if (!(*slot > 0.0)) (at / key).fail("tolerance must be positive");
        known = true;
      }
    }
    if (!known) (at / key).fail("unknown policy field");
  }
  return policy;
}

NumericPolicy resolve_policy(const std::string& flag_path) {
  if (!flag_path.empty()) return load_policy(flag_path);
  if (const char* env = std::getenv("DDIRAC_POLICY"); env != nullptr && *env != '\0') {
    return load_policy(env);
  }
  return {};
}

}  // namespace ddirac::cli
