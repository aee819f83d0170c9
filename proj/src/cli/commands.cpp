#include "ddirac/cli.hpp"

#include "ddirac/documents.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace ddirac::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularLeadingBlock:
    case ErrorCode::SingularVMinus:
    case ErrorCode::Phi1Mismatch:
      return kExitDirectSingular;
    case ErrorCode::ToeplitzNotPD:
      return kExitToeplitz;
    default:
      return kExitInvariant;
  }
}

// "re:im" or a plain real number.
cplx parse_complex(const std::string& text, const std::string& what) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) {
      throw CliError(kExitUsage, what + ": cannot parse \"" + text + "\" (expected re or re:im)");
    }
    return v;
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {number(text), 0.0};
  return {number(text.substr(0, colon)), number(text.substr(colon + 1))};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<cplx> parse_grid(const std::string& spec) {
  if (spec.empty()) return {{1.0, -1.0}, {0.0, -2.0}, {3.0, -0.5}};
  std::vector<cplx> grid;
  for (const auto& item : split(spec, ',')) grid.push_back(parse_complex(item, "--lambda-grid"));
  return grid;
}

PotentialSequence load_potentials(const std::string& path, bool check, const NumericPolicy& policy) {
  const Document doc = load_document(path, {"potentials"});
  PotentialSequence sys = potentials_from(doc);
  if (check) {
    const auto report = validate(sys, policy);
    if (!report.pass) {
      const auto json_report = validation_json(report, policy);
      const auto& step = json_report["steps"][report.first_failure];
      std::string failed;
      for (const auto& f : step["failures"]) failed += (failed.empty() ? "" : ", ") + f.get<std::string>();
      throw CliError(kExitInvariant, path + ": /payload/C/" + std::to_string(report.first_failure) +
                                         ": potential fails validation (" + failed + ")");
    }
  }
  return sys;
}

struct Options {
  std::string policy_file;
  bool no_validate = false;
};

int cmd_generate(const Options& opt, const std::string& params_file, const std::string& example,
                 std::size_t steps, const std::string& out_file, std::ostream& out) {
  const NumericPolicy policy = resolve_policy(opt.policy_file);
  if (params_file.empty() == example.empty()) {
    throw CliError(kExitUsage, "generate: give exactly one of --params or --example41");
  }
  std::optional<BdtParameters> params;
  if (!example.empty()) {
    const auto parts = split(example, ',');
    if (parts.size() != 3) throw CliError(kExitUsage, "--example41: expected a,phi,psi");
    const cplx a = parse_complex(parts[0], "--example41");
    if (a.imag() != 0.0) throw CliError(kExitUsage, "--example41: a must be real");
    params = Example41(a.real(), parse_complex(parts[1], "--example41"),
                       parse_complex(parts[2], "--example41"))
                 .params();
  } else {
    params = params_from(load_document(params_file, {"bdt-params", "realization"}), policy);
  }
  const GeneratedSystem gen = generate(*params, steps, policy);
  const auto report = validate(gen.potentials, policy);
  json rep = validation_json(report, policy);
  rep["identity_residuals"] = gen.identity_residuals;
  write_json_file(out_file, potentials_document(gen.potentials, rep));
  out << "wrote " << gen.potentials.size() << " potentials to " << out_file
      << (report.pass ? "" : " (validation FAILED)") << '\n';
  return report.pass ? kExitPass : kExitInvariant;
}

int cmd_direct(const Options& opt, const std::string& system_file, const std::string& out_file,
               std::ostream& out) {
  const NumericPolicy policy = resolve_policy(opt.policy_file);
  const PotentialSequence sys = load_potentials(system_file, !opt.no_validate, policy);
  const BetaSequence beta = beta_from_potentials(sys, policy);
  DirectDiagnostics diag;
  const TaylorSequence alpha = direct_taylor(beta, policy, &diag);
  json doc = taylor_document(alpha, toeplitz_positivity(alpha));
  doc["payload"]["phi1_residual"] = diag.phi1_residual;
  doc["payload"]["v_minus_condition"] = diag.v_minus_condition;
  write_json_file(out_file, doc);
  out << "wrote " << alpha.size() << " Taylor coefficients to " << out_file << '\n';
  return kExitPass;
}

int cmd_inverse(const Options& opt, const std::string& taylor_file, const std::string& out_file,
                const std::string& solver_name, const std::string& compare_file,
                std::ostream& out) {
  const NumericPolicy policy = resolve_policy(opt.policy_file);
  const TaylorSequence alpha = taylor_from(load_document(taylor_file, {"taylor"}));
  const ToeplitzSolver solver =
      solver_name == "levinson" ? ToeplitzSolver::Levinson : ToeplitzSolver::Cholesky;
  InverseDiagnostics diag;
  PotentialSequence sys = [&] {
    try {
      return inverse_potentials(alpha, solver, policy, &diag);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ToeplitzNotPD) {
        throw CliError(kExitToeplitz, taylor_file + ": /payload/alpha: first failing r = " +
                                          std::to_string(e.index()) + ": " + e.what());
      }
      throw;
    }
  }();
  const auto report = validate(sys, policy);
  json rep = validation_json(report, policy);
  rep["jnorm_residuals"] = diag.jnorm_residuals;
  rep["toeplitz_min_eig"] = diag.toeplitz_min_eig;
  write_json_file(out_file, potentials_document(sys, rep));
  out << "wrote " << sys.size() << " potentials to " << out_file << '\n';
  if (!compare_file.empty()) {
    const PotentialSequence ref = load_potentials(compare_file, false, policy);
    if (ref.p() != sys.p() || ref.size() != sys.size()) {
      throw CliError(kExitUsage, compare_file + ": dimensions differ from the reconstruction");
    }
    double dev = 0.0;
    for (std::size_t k = 0; k < sys.size(); ++k) {
      dev = std::max(dev, (sys[k] - ref[k]).cwiseAbs().maxCoeff());
    }
    out << "max deviation: " << std::setprecision(3) << std::scientific << dev << '\n';
  }
  return report.pass ? kExitPass : kExitInvariant;
}

int cmd_verify(const Options& opt, const std::string& system_file, const std::string& grid_spec,
               const std::string& out_file, std::ostream& out) {
  const NumericPolicy policy = resolve_policy(opt.policy_file);
  const PotentialSequence sys = load_potentials(system_file, false, policy);
  const auto grid = parse_grid(grid_spec);
  const std::size_t N = sys.last_index();
  std::vector<std::size_t> rs{N / 2, N};
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

  constexpr double kSummationTol = 1e-9;
  constexpr double kMonodromyTol = 1e-9;
  const auto validation = validate(sys, policy);
  json report = {{"kind", "report"}, {"version", kFormatVersion}, {"p", sys.p()}, {"N", N}};
  json payload;
  payload["validation"] = validation_json(validation, policy);
  bool pass = validation.pass;
  json summation = json::array();
  json monodromy = json::array();
  for (const cplx l : grid) {
    if (l == cplx(0.0, 0.0) || l.imag() == 0.0) {
      throw CliError(kExitUsage, "--lambda-grid: lambda must be non-real");
    }
    for (const std::size_t r : rs) {
      const double res = summation_residual(sys, l, r);
      const double scale = std::max(1.0, std::pow(norm(propagate(sys, l, r + 1)), 2));
      const bool ok = res <= kSummationTol * scale;
      pass = pass && ok;
      summation.push_back({{"lambda", encode(l)}, {"r", r}, {"residual", res},
                           {"tolerance", kSummationTol * scale}, {"pass", ok}});
    }
    const double mres = monodromy_j_residual(sys, l);
    const bool ok = mres <= kMonodromyTol;
    pass = pass && ok;
    monodromy.push_back(
        {{"lambda", encode(l)}, {"residual", mres}, {"tolerance", kMonodromyTol}, {"pass", ok}});
  }
  payload["summation"] = summation;
  payload["monodromy"] = monodromy;
  payload["pass"] = pass;
  report["payload"] = payload;
  if (out_file.empty()) {
    out << report.dump(1) << '\n';
  } else {
    write_json_file(out_file, report);
    out << (pass ? "PASS" : "FAIL") << ": report written to " << out_file << '\n';
  }
  if (!validation.pass) {
    const auto& step = payload["validation"]["steps"][validation.first_failure];
    std::string failed;
    for (const auto& f : step["failures"]) failed += (failed.empty() ? "" : ", ") + f.get<std::string>();
    out << "C_" << validation.first_failure << " fails: " << failed << '\n';
  }
  return pass ? kExitPass : kExitInvariant;
}

double max_matrix_deviation(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  double dev = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
    dev = std::max(dev, (a[k] - b[k]).cwiseAbs().maxCoeff());
  }
  return dev;
}

int cmd_szego(const Options& opt, bool to_dirac, bool to_szego, bool schur,
              const std::string& in_file, const std::string& out_file, bool round_trip,
              std::ostream& out) {
  const NumericPolicy policy = resolve_policy(opt.policy_file);
  if (int(to_dirac) + int(to_szego) + int(schur) != 1) {
    throw CliError(kExitUsage, "szego: give exactly one of --to-dirac, --to-szego, --schur");
  }
  out << std::setprecision(3) << std::scientific;
  if (to_dirac) {
    const Document doc = load_document(in_file, {"szego"});
    const SzegoSequence sz = szego_from(doc, policy);
    const PotentialSequence sys = szego_to_dirac(sz, policy);
    write_json_file(out_file, potentials_document(sys, validation_json(validate(sys, policy), policy)));
    if (round_trip) {
      const SzegoSequence back = dirac_to_szego(sys, policy);
      out << "max deviation: " << max_matrix_deviation(sz.R(), back.R()) << '\n';
    }
    return kExitPass;
  }
  if (to_szego) {
    const PotentialSequence sys = load_potentials(in_file, !opt.no_validate, policy);
    const SzegoSequence sz = dirac_to_szego(sys, policy);
    std::optional<SchurCoefficients> rho;
    if (sz.p() == 1) rho = schur_coeffs(sz);
    write_json_file(out_file, szego_document(sz, rho));
    if (round_trip) {
      const PotentialSequence back = szego_to_dirac(sz, policy);
      out << "max deviation: " << max_matrix_deviation(sys.potentials(), back.potentials()) << '\n';
    }
    return kExitPass;
  }
  const Document doc = load_document(in_file, {"szego"});
  if (doc.p() != 1) throw CliError(kExitUsage, in_file + ": /p: --schur requires p = 1");
  const SzegoSequence sz = szego_from(doc, policy);
  const SchurCoefficients rho = schur_coeffs(sz);
  write_json_file(out_file, szego_document(sz, rho));
  if (round_trip) {
    out << "max deviation: " << max_matrix_deviation(sz.R(), schur_to_R(rho).R()) << '\n';
  }
  return kExitPass;
}

int cmd_weyl(const Options& opt, const std::string& params_file, const std::string& lambda_text,
             const std::string& convention, std::ostream& out) {
  const NumericPolicy policy = resolve_policy(opt.policy_file);
  const auto parts = split(lambda_text, ',');
  if (parts.size() != 2) throw CliError(kExitUsage, "--lambda: expected RE,IM");
  const cplx lambda(parse_complex(parts[0], "--lambda").real(),
                    parse_complex(parts[1], "--lambda").real());
  const Document doc = load_document(params_file, {"bdt-params", "realization"});
  CMatrix phi = doc.kind == "realization" ? realization_from(doc, policy).evaluate(lambda, policy)
                                          : explicit_weyl(params_from(doc, policy), lambda, policy);
  if (convention == "K") phi = herglotz_map(phi, policy);
  out << encode(phi).dump() << '\n';
  return kExitPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete Dirac systems: generation, direct and inverse spectral problems"};
  app.name(args.empty() ? "ddirac" : args.front());
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--policy", opt.policy_file, "numeric policy JSON (overrides $DDIRAC_POLICY)");
  app.add_flag("--no-validate", opt.no_validate, "skip validation of loaded potentials");

  std::string params_file, example, out_file, system_file, taylor_file, solver = "cholesky",
                                                                         compare_file, grid,
                                                                         in_file, lambda,
                                                                         convention = "identity";
  std::size_t steps = 0;
  bool to_dirac = false, to_szego = false, schur = false, round_trip = false;

  auto* gen = app.add_subcommand("generate", "potentials from BDT parameters");
  gen->add_option("--params", params_file, "bdt-params or realization document");
  gen->add_option("--example41", example, "scalar example a,phi,psi (complex as re:im)");
  gen->add_option("--steps", steps, "last index N")->required();
  gen->add_option("--out", out_file)->required();

  auto* dir = app.add_subcommand("direct", "Taylor coefficients of the Weyl function");
  dir->add_option("--system", system_file)->required();
  dir->add_option("--out", out_file)->required();

  auto* inv = app.add_subcommand("inverse", "potentials from Taylor coefficients");
  inv->add_option("--taylor", taylor_file)->required();
  inv->add_option("--out", out_file)->required();
  inv->add_option("--solver", solver)->check(CLI::IsMember({"cholesky", "levinson"}));
  inv->add_option("--compare", compare_file, "potentials document to compare against");

  auto* ver = app.add_subcommand("verify", "invariant report for a potentials document");
  ver->add_option("--system", system_file)->required();
  ver->add_option("--lambda-grid", grid, "comma list of re:im values");
  ver->add_option("--out", out_file, "write the report here instead of stdout");

  auto* sz = app.add_subcommand("szego", "Szego <-> Dirac conversions");
  sz->add_flag("--to-dirac", to_dirac);
  sz->add_flag("--to-szego", to_szego);
  sz->add_flag("--schur", schur);
  sz->add_option("--in", in_file)->required();
  sz->add_option("--out", out_file)->required();
  sz->add_flag("--round-trip", round_trip, "convert back and print the max deviation");

  auto* wf = app.add_subcommand("weyl", "evaluate the explicit Weyl function");
  wf->add_option("--params", params_file)->required();
  wf->add_option("--lambda", lambda, "RE,IM")->required();
  wf->add_option("--convention", convention)->check(CLI::IsMember({"identity", "K"}));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(opt, params_file, example, steps, out_file, out);
    if (*dir) return cmd_direct(opt, system_file, out_file, out);
    if (*inv) return cmd_inverse(opt, taylor_file, out_file, solver, compare_file, out);
    if (*ver) return cmd_verify(opt, system_file, grid, out_file, out);
    if (*sz) return cmd_szego(opt, to_dirac, to_szego, schur, in_file, out_file, round_trip, out);
    if (*wf) return cmd_weyl(opt, params_file, lambda, convention, out);
  } catch (const CliError& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.index() != Error::npos) err << " (index " << e.index() << ")";
    err << '\n';
    return exit_code_for(e.code());
  }
  return kExitUsage;
}

}  // namespace ddirac::cli
