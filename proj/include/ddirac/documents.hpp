#pragma once

#include "ddirac/dirac_system.hpp"
#include "ddirac/inverse_spectral.hpp"
#include "ddirac/linalg.hpp"
#include "ddirac/pseudoexp.hpp"
#include "ddirac/szego.hpp"

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddirac::cli {

using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1";

// Process exit codes.
enum ExitCode : int {
  kExitPass = 0,
  kExitUsage = 1,
  kExitInvariant = 2,
  kExitDirectSingular = 3,
  kExitToeplitz = 4,
};

/// Failure carrying the exit code the command should terminate with.
class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& message)
      : std::runtime_error(message), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

json encode(cplx z);
json encode(const CMatrix& M);
json encode(const std::vector<CMatrix>& Ms);
json encode(const std::vector<cplx>& zs);

// Decoders take the file name and the JSON pointer of the value so that a
// malformed entry is reported as "<file>: <pointer>: <problem>".
struct Location {
  std::string file;
  std::string pointer;
  Location operator/(const std::string& key) const { return {file, pointer + "/" + key}; }
  Location operator/(std::size_t index) const { return *this / std::to_string(index); }
  [[noreturn]] void fail(const std::string& problem) const;
};

cplx decode_complex(const json& v, const Location& at);
CMatrix decode_matrix(const json& v, const Location& at, Eigen::Index rows = -1,
                      Eigen::Index cols = -1);
std::vector<CMatrix> decode_matrices(const json& v, const Location& at, Eigen::Index rows,
                                     Eigen::Index cols, std::optional<std::size_t> count);
std::vector<cplx> decode_complex_list(const json& v, const Location& at,
                                      std::optional<std::size_t> count);
double decode_real(const json& v, const Location& at);
std::size_t decode_count(const json& v, const Location& at);

/// A parsed document envelope.
struct Document {
  std::string file;
  std::string kind;
  json body;

  Location at(const std::string& pointer = "") const { return {file, pointer}; }
  const json& field(const std::string& key) const;           // top-level, required
  const json& payload(const std::string& key) const;         // payload member, required
  bool has_payload(const std::string& key) const;
  int p() const;
  int n() const;
  std::size_t N() const;
};

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& doc);
Document load_document(const std::string& path, std::initializer_list<const char*> kinds);

json envelope(const std::string& kind, json header, json payload);

json potentials_document(const PotentialSequence& sys, const std::optional<json>& report = {});
json taylor_document(const TaylorSequence& alpha, const std::vector<double>& toeplitz_min_eig);
json params_document(const BdtParameters& params);
json realization_document(const WeylRealization& rz);
json szego_document(const SzegoSequence& sz, const std::optional<SchurCoefficients>& rho = {});
json validation_json(const ValidationReport& report, const NumericPolicy& policy);

PotentialSequence potentials_from(const Document& doc);
TaylorSequence taylor_from(const Document& doc);
BdtParameters params_from(const Document& doc, const NumericPolicy& policy);
WeylRealization realization_from(const Document& doc, const NumericPolicy& policy);
/// Szego document from R and theta, or from a p = 1 "rho" list alone.
SzegoSequence szego_from(const Document& doc, const NumericPolicy& policy);

/// Policy from a JSON file; absent keys keep their defaults.
NumericPolicy load_policy(const std::string& path);
/// Policy file path: explicit flag, else $DDIRAC_POLICY, else built-in defaults.
NumericPolicy resolve_policy(const std::string& flag_path);

}  // namespace ddirac::cli
