#include "cflow/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cflow/flow_engine.hpp"
#include "cflow/matrix_io.hpp"

namespace cflow {
namespace {

using nlohmann::json;

enum class Method { Vandermonde, Companion, Both };

struct Options {
  std::string matrix_path;
  std::vector<std::string> z;
  std::string relation;
  std::string poly;
  std::string method;
  ToleranceConfig tol;
  std::vector<std::string> branch_offsets;
  std::uint64_t seed = 0;
  std::size_t samples = 20;
  double z_radius = 3;
  double threshold = 1e-8;
  bool json = false;
  bool elide_zero = false;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

Method method_of(const Options& o, Method fallback) {
  if (o.method == "vandermonde") return Method::Vandermonde;
  if (o.method == "companion") return Method::Companion;
  if (o.method == "both") return Method::Both;
  return fallback;
}

long parse_integer(std::string_view s, const std::string& whole) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  long value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size())
    throw ParseError("--branch-offset expects cluster:turns with integers, got '" + whole + "'");
  return value;
}

// "k:t" adds t full turns to the logarithm of cluster k (1-based).
BranchOffsets parse_branch_offsets(const std::vector<std::string>& specs) {
  BranchOffsets out;
  for (const std::string& spec : specs) {
    std::string s = spec;
    for (std::size_t pos; (pos = s.find("\xE2\x88\x92")) != std::string::npos;) s.replace(pos, 3, "-");
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos) throw ParseError("--branch-offset expects cluster:turns, got '" + spec + "'");
    const long index = parse_integer(std::string_view(s).substr(0, colon), spec);
    const long turns = parse_integer(std::string_view(s).substr(colon + 1), spec);
    if (index < 1) throw ParseError("--branch-offset cluster indices start at 1, got '" + spec + "'");
    out[static_cast<std::size_t>(index - 1)] += turns;
  }
  return out;
}

std::vector<Complex> parse_exponents(const std::vector<std::string>& literals) {
  std::vector<Complex> out;
  for (const std::string& s : literals) out.push_back(parse_complex(s));
  return out;
}

Vector to_vector(const std::vector<Complex>& values) {
  Vector v(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Index>(i)) = values[i];
  return v;
}

std::optional<AnnihilatorPolynomial> supplied_relation(const Options& o) {
  if (!o.relation.empty()) return AnnihilatorPolynomial::from_relation_vector(to_vector(parse_complex_list(o.relation)));
  if (!o.poly.empty()) {
    const Vector high_first = to_vector(parse_complex_list(o.poly));
    return AnnihilatorPolynomial::from_monomial(high_first.reverse());
  }
  return std::nullopt;
}

struct Relation {
  AnnihilatorPolynomial q;
  std::string source;
};

Relation relation_for(const Matrix& a, const Options& o, std::ostream& err) {
  if (auto q = supplied_relation(o)) return {*q, "supplied"};
  try {
    return {minimal_polynomial(a, o.tol), "minimal polynomial"};
  } catch (const FlowError& e) {
    if (e.kind() != ErrorKind::AmbiguousRank) throw;
    err << "note: " << e.what() << "; using the characteristic polynomial instead\n";
    return {characteristic_polynomial(a), "characteristic polynomial"};
  }
}

void warn_conditioning(const CoefficientTable& t, const char* which, std::ostream& err) {
  if (!t.ill_conditioned) return;
  err << "warning: " << which << " generalized Vandermonde condition estimate " << sci(t.condition_estimate)
      << " exceeds cond_warn; expect roughly " << static_cast<int>(std::log10(t.condition_estimate))
      << " fewer correct digits\n";
}

struct Flows {
  std::optional<FlowRepresentation> direct;
  std::optional<CompanionFlow> companion;

  Matrix operator()(Method m, Complex z) const {
    return m == Method::Companion ? (*companion)(z) : evaluate_flow(*direct, z);
  }
};

Flows build_flows(const Matrix& a, const AnnihilatorPolynomial& q, Method m, const Options& o, std::ostream& err) {
  const BranchOffsets offsets = parse_branch_offsets(o.branch_offsets);
  Flows f;
  if (m != Method::Companion) {
    f.direct = build_flow(a, q, o.tol, offsets);
    warn_conditioning(f.direct->coeffs, "direct method:", err);
  }
  if (m != Method::Vandermonde) {
    f.companion.emplace(a, q, o.tol, offsets);
    warn_conditioning(f.companion->coefficients().companion_flow().coeffs, "companion method:", err);
  }
  return f;
}

// ---- report rendering ----

std::string power_text(Index k) {
  if (k == 0) return "";
  if (k == 1) return "X";
  return "X^" + std::to_string(k);
}

std::string polynomial_text(const AnnihilatorPolynomial& q) {
  const Vector a = q.monomial();
  std::string s;
  for (Index k = a.size() - 1; k >= 0; --k) {
    const Complex c = a(k);
    if (c == Complex{0, 0}) continue;
    bool negative = false;
    std::string coef;
    if (c.imag() == 0) {
      negative = c.real() < 0;
      const double m = std::abs(c.real());
      if (!(m == 1 && k > 0)) coef = format_real(m);
    } else {
      coef = "(" + format_complex(c) + ")";
    }
    if (s.empty())
      s = negative ? "-" : "";
    else
      s += negative ? " - " : " + ";
    s += coef + power_text(k);
  }
  return s;
}

std::string grouped(Complex z) {
  const std::string s = format_complex(z);
  return (z.imag() != 0 || z.real() < 0) ? "(" + s + ")" : s;
}

std::string basis_text(const BasisDescriptor& basis, Index k) {
  const BasisTerm& t = basis.terms[static_cast<std::size_t>(k)];
  const std::string lambda = grouped(basis.spectrum.clusters[t.cluster].lambda);
  if (t.shift == 0) return lambda + "^z";
  return "g_" + std::to_string(t.shift) + "(z) * " + lambda + "^(z-" + std::to_string(t.shift) + ")";
}

struct Report {
  const Relation& relation;
  const FlowRepresentation& rep;
  bool with_residual = false;
};

bool elided(const Options& o, const CoefficientTable& t, Index i, Index j) {
  return o.elide_zero && std::abs(t.e(i, j)) <= o.tol.rank_tol * static_cast<double>(max_norm(t.inverse));
}

json report_json(const Report& r, const Options& o) {
  const FlowRepresentation& rep = r.rep;
  json doc;
  doc["relation"] = {{"polynomial", polynomial_text(r.relation.q)},
                     {"c", to_json(r.relation.q.relation_vector())},
                     {"source", r.relation.source}};
  if (r.with_residual) doc["relation"]["residual"] = rep.relation_residual;
  doc["p"] = rep.p;
  json spectrum = json::array();
  for (std::size_t c = 0; c < rep.basis.spectrum.size(); ++c) {
    const Cluster& cl = rep.basis.spectrum.clusters[c];
    spectrum.push_back({{"cluster", c + 1},
                        {"lambda", to_json(cl.lambda)},
                        {"multiplicity", cl.multiplicity},
                        {"log", to_json(cl.log_lambda)}});
  }
  doc["spectrum"] = spectrum;
  json basis = json::array();
  for (Index k = 0; k < rep.basis.size(); ++k) {
    const BasisTerm& t = rep.basis.terms[static_cast<std::size_t>(k)];
    basis.push_back({{"k", k + 1}, {"cluster", t.cluster + 1}, {"shift", t.shift}, {"f", basis_text(rep.basis, k)}});
  }
  doc["basis"] = basis;
  doc["e"] = to_json(rep.coeffs.e_matrix());
  doc["condition_estimate"] = rep.coeffs.condition_estimate;
  doc["inverse_residual"] = rep.coeffs.inverse_residual;
  doc["ill_conditioned"] = rep.coeffs.ill_conditioned;
  json terms = json::array();
  for (Index i = 0; i < rep.p; ++i)
    for (Index j = 0; j < rep.p; ++j) {
      if (elided(o, rep.coeffs, i, j)) continue;
      terms.push_back({{"i", i + 1}, {"j", j + 1}, {"e", to_json(rep.coeffs.e(i, j))}, {"f", basis_text(rep.basis, j)}});
    }
  doc["terms"] = terms;
  return doc;
}

void print_report(std::ostream& out, const Report& r, const Options& o) {
  const FlowRepresentation& rep = r.rep;
  const AnnihilatorPolynomial& q = r.relation.q;
  out << "relation: " << polynomial_text(q) << "  (" << r.relation.source << ")\n";
  out << "c = (c_" << q.degree() - 1 << ", ..., c_0) = (";
  const Vector c = q.relation_vector();
  for (Index i = 0; i < c.size(); ++i) out << (i ? ", " : "") << format_complex(c(i));
  out << ")\n";
  if (r.with_residual) out << "relation residual: " << sci(rep.relation_residual) << "\n";
  out << "p = " << rep.p << "\n";
  out << "spectrum (cluster order fixes the e_ij indices):\n";
  for (std::size_t k = 0; k < rep.basis.spectrum.size(); ++k) {
    const Cluster& cl = rep.basis.spectrum.clusters[k];
    out << "  " << k + 1 << ": lambda = " << format_complex(cl.lambda) << ", multiplicity " << cl.multiplicity
        << ", log = " << format_complex(cl.log_lambda) << "\n";
  }
  out << "basis:\n";
  for (Index k = 0; k < rep.basis.size(); ++k) out << "  f_" << k + 1 << "(z) = " << basis_text(rep.basis, k) << "\n";
  out << "e_ij (row i multiplies A^-i, column j multiplies f_j):\n";
  for (Index i = 0; i < rep.p; ++i) {
    out << "  [";
    for (Index j = 0; j < rep.p; ++j) out << (j ? ", " : "") << format_complex(rep.coeffs.e(i, j));
    out << "]\n";
  }
  out << "Vandermonde condition estimate: " << sci(rep.coeffs.condition_estimate)
      << ", inverse residual: " << sci(rep.coeffs.inverse_residual) << "\n";
  out << "terms of mu_i(z) = sum_j e_ij f_j(z):\n";
  for (Index i = 0; i < rep.p; ++i)
    for (Index j = 0; j < rep.p; ++j) {
      if (elided(o, rep.coeffs, i, j)) continue;
      out << "  mu_" << i + 1 << " += " << grouped(rep.coeffs.e(i, j)) << " * " << basis_text(rep.basis, j) << "\n";
    }
}

// ---- subcommands ----

int cmd_pow(const Options& o, std::ostream& out, std::ostream& err) {
  const std::vector<Complex> zs = parse_exponents(o.z);
  const Matrix a = read_matrix_file(o.matrix_path);
  const Method m = method_of(o, Method::Vandermonde);
  const Relation r = relation_for(a, o, err);
  const Flows flows = build_flows(a, r.q, m, o, err);
  for (Complex z : zs) {
    const Matrix value = flows(m, z);
    if (m == Method::Both) {
      const double gap = relative_error((*flows.companion)(z), value);
      if (!(gap <= o.threshold))
        err << "warning: methods disagree at z = " << format_complex(z) << " (relative " << sci(gap) << ")\n";
    }
    out << format_matrix_document(value);
  }
  return kExitOk;
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const Matrix a = read_matrix_file(o.matrix_path);
  const Relation r = relation_for(a, o, err);
  const FlowRepresentation rep = build_flow(a, r.q, o.tol, parse_branch_offsets(o.branch_offsets));
  warn_conditioning(rep.coeffs, "direct method:", err);
  const Report report{r, rep, true};
  if (o.json)
    out << report_json(report, o).dump(2) << "\n";
  else
    print_report(out, report, o);
  return kExitOk;
}

int cmd_formula(const Options& o, std::ostream& out, std::ostream& err) {
  const std::vector<Complex> zs = parse_exponents(o.z);
  const Method m = method_of(o, Method::Vandermonde);
  const BranchOffsets offsets = parse_branch_offsets(o.branch_offsets);
  std::optional<Relation> relation;
  if (auto q = supplied_relation(o))
    relation = Relation{*q, "supplied"};
  else
    relation = relation_for(read_matrix_file(o.matrix_path), o, err);
  // The coefficient functions depend on Q alone; C_Q stands in for the matrix.
  const FlowRepresentation rep = build_flow(companion_matrix(relation->q), relation->q, o.tol, offsets);
  warn_conditioning(rep.coeffs, "direct method:", err);
  std::optional<CompanionMu> companion;
  if (m != Method::Vandermonde) companion.emplace(relation->q, o.tol, offsets);

  std::vector<Vector> values;
  for (Complex z : zs) {
    const Vector mu = m == Method::Companion ? (*companion)(z) : mu_functions(rep, z);
    if (m == Method::Both) {
      const double gap = relative_error(Matrix((*companion)(z)), Matrix(mu));
      if (!(gap <= o.threshold))
        err << "warning: methods disagree at z = " << format_complex(z) << " (relative " << sci(gap) << ")\n";
    }
    require_finite(mu, "mu values");
    values.push_back(mu);
  }

  const Report report{*relation, rep, false};
  if (o.json) {
    json doc = report_json(report, o);
    json at = json::array();
    for (std::size_t k = 0; k < zs.size(); ++k) at.push_back({{"z", to_json(zs[k])}, {"mu", to_json(values[k])}});
    doc["at"] = at;
    out << doc.dump(2) << "\n";
    return kExitOk;
  }
  print_report(out, report, o);
  for (std::size_t k = 0; k < zs.size(); ++k) {
    out << "mu(" << format_complex(zs[k]) << ") = (";
    for (Index i = 0; i < values[k].size(); ++i) out << (i ? ", " : "") << format_complex(values[k](i));
    out << ")\n";
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const Matrix a = read_matrix_file(o.matrix_path);
  const Method m = method_of(o, Method::Both);
  const Relation r = relation_for(a, o, err);
  // Cross-agreement needs both methods whichever one is under test.
  const Flows flows = build_flows(a, r.q, Method::Both, o, err);
  const auto pairs = sample_pairs(o.seed, o.samples, o.z_radius);

  std::vector<std::pair<std::string, double>> residuals;
  const auto check = [&](Method which, const char* name) {
    const auto flow = [&](Complex z) { return flows(which, z); };
    const FlowAxiomReport ax = check_flow_axioms(flow, a, pairs);
    const std::string prefix = std::string(name) + ".";
    residuals.emplace_back(prefix + "identity", ax.identity);
    residuals.emplace_back(prefix + "generator", ax.generator);
    residuals.emplace_back(prefix + "group", ax.group);
    residuals.emplace_back(prefix + "integer", integer_power_error(flow, a, -3, 5, o.tol));
  };
  if (m != Method::Companion) check(Method::Vandermonde, "vandermonde");
  if (m != Method::Vandermonde) check(Method::Companion, "companion");
  double cross = 0;
  for (const auto& [z, w] : pairs)
    for (Complex s : {z, w, z + w})
      cross = std::max(cross, relative_error(flows(Method::Companion, s), flows(Method::Vandermonde, s)));
  residuals.emplace_back("cross", cross);

  bool pass = true;
  for (const auto& [name, value] : residuals) pass = pass && value <= o.threshold;

  if (o.json) {
    json doc;
    doc["relation"] = {{"polynomial", polynomial_text(r.q)}, {"source", r.source}};
    doc["seed"] = o.seed;
    doc["samples"] = o.samples;
    doc["z_radius"] = o.z_radius;
    doc["threshold"] = o.threshold;
    json res = json::object();
    for (const auto& [name, value] : residuals) res[name] = value;
    doc["residuals"] = res;
    doc["pass"] = pass;
    out << doc.dump(2) << "\n";
  } else {
    out << "relation: " << polynomial_text(r.q) << "  (" << r.source << ")\n";
    out << "samples: " << o.samples << " pairs, |z| <= " << o.z_radius << ", seed " << o.seed << "\n";
    for (const auto& [name, value] : residuals) out << "  " << name << ": " << sci(value) << "\n";
    out << (pass ? "PASS" : "FAIL") << " (threshold " << sci(o.threshold) << ")\n";
  }
  return pass ? kExitOk : kExitVerifyFailed;
}

void add_tolerances(CLI::App* sub, Options& o) {
  sub->add_option("--tol-rank", o.tol.rank_tol, "rank decisions and singularity");
  sub->add_option("--tol-root", o.tol.root_tol, "root finder stopping");
  sub->add_option("--tol-cluster", o.tol.cluster_tol, "radius for merging roots");
  sub->add_option("--tol-residual", o.tol.residual_tol, "relation and inverse residual checks");
  sub->add_option("--tol-cond-warn", o.tol.cond_warn, "conditioning warning threshold");
  sub->add_option("--tol-multiplicity", o.tol.multiplicity_tol, "multiple-root detection");
}

void add_relation(CLI::App* sub, Options& o) {
  auto* rel = sub->add_option("--relation", o.relation,
                              "c_{p-1},...,c_0 of A^p = c_{p-1} A^{p-1} + ... + c_0 I (default: discover)");
  sub->add_option("--poly", o.poly, "coefficients of Q, highest degree first, e.g. 1,-5,6")->excludes(rel);
}

void add_flow_options(CLI::App* sub, Options& o) {
  sub->add_option("--method", o.method, "vandermonde, companion or both")
      ->check(CLI::IsMember({"vandermonde", "companion", "both"}));
  sub->add_option("--branch-offset", o.branch_offsets, "k:t adds 2 pi i t to the log of cluster k (1-based)")
      ->allow_extra_args(false);
  add_tolerances(sub, o);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularMatrix:
    case ErrorKind::ZeroEigenvalue:
      return kExitSingular;
    case ErrorKind::NonConvergence:
    case ErrorKind::AmbiguousRank:
    case ErrorKind::NonFinite:
      return kExitNonConvergence;
    case ErrorKind::RelationInvalid:
      return kExitRelationInvalid;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotJordanForm:
    case ErrorKind::InvalidArgument:
      return kExitParse;
  }
  return kExitParse;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Complex powers A^z = sum_i mu_i(z) A^-i of invertible matrices", "cflow"};
  app.require_subcommand(1);

  auto* pow = app.add_subcommand("pow", "print A^z as a matrix document");
  pow->add_option("matrix", o.matrix_path, "matrix document")->required();
  pow->add_option("--z", o.z, "complex exponent, e.g. 0.5 or 1.3-0.7i; repeatable")->required()->allow_extra_args(false);
  add_relation(pow, o);
  add_flow_options(pow, o);

  auto* analyze = app.add_subcommand("analyze", "report the relation, spectrum, basis and e_ij");
  analyze->add_option("matrix", o.matrix_path, "matrix document")->required();
  add_relation(analyze, o);
  add_flow_options(analyze, o);
  analyze->add_flag("--json", o.json, "machine-readable report");
  analyze->add_flag("--elide-zero", o.elide_zero, "omit terms whose e_ij is negligible");

  auto* verify = app.add_subcommand("verify", "check the flow axioms, integer powers and method agreement");
  verify->add_option("matrix", o.matrix_path, "matrix document")->required();
  add_relation(verify, o);
  add_flow_options(verify, o);
  verify->add_option("--seed", o.seed, "seed for the sampled exponents");
  verify->add_option("--samples", o.samples, "number of (z, w) pairs");
  verify->add_option("--z-radius", o.z_radius, "exponents are drawn from |z| <= radius");
  verify->add_option("--threshold", o.threshold, "largest accepted residual");
  verify->add_flag("--json", o.json, "machine-readable report");

  auto* formula = app.add_subcommand("formula", "closed form of the mu_i(z) for a relation or a matrix");
  auto* formula_matrix = formula->add_option("matrix", o.matrix_path, "matrix document (instead of a relation)");
  add_relation(formula, o);
  add_flow_options(formula, o);
  formula->add_option("--at,--z", o.z, "also evaluate mu at this exponent; repeatable")->allow_extra_args(false);
  formula->add_option("--threshold", o.threshold, "method disagreement that triggers a warning");
  formula->add_flag("--json", o.json, "machine-readable report");
  formula->add_flag("--elide-zero", o.elide_zero, "omit terms whose e_ij is negligible");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (formula->parsed() && formula_matrix->count() == 0 && o.relation.empty() && o.poly.empty())
      throw CLI::ValidationError("formula", "needs a matrix document, --relation or --poly");
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitParse;
  }

  try {
    o.tol.validate();
    if (pow->parsed()) return cmd_pow(o, out, err);
    if (analyze->parsed()) return cmd_analyze(o, out, err);
    if (verify->parsed()) return cmd_verify(o, out, err);
    return cmd_formula(o, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const FlowError& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

}  // namespace cflow
