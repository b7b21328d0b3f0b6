// SPDX-License-Identifier: Apache-2.0

#include "rocp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "rocp/errors.hpp"
#include "rocp/matrix_io.hpp"

namespace rocp {

namespace {

using nlohmann::json;

// Lanczos start vector seed; pinned so spectrum tables are reproducible.
constexpr std::uint64_t kSpectrumSeed = 7;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path.empty() ? msg : path + ": " + msg);
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
}

void require_known_keys(const json& obj, const std::string& path,
                        std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    if (std::none_of(known.begin(), known.end(),
                     [&key](const char* k) { return key == k; }))
      fail(path, "unknown key \"" + key + "\"");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::uint64_t get_uint64(const json& v, const std::string& path) {
  if (!(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    fail(path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

bool full_space_kind(PrecondKind k) {
  return k == PrecondKind::SchurDrop || k == PrecondKind::MatchedExact ||
         k == PrecondKind::MatchedMean || k == PrecondKind::MatchedCheb;
}

FieldModel::Kind field_kind_from_string(const std::string& s, const std::string& path) {
  if (s == "bounded") return FieldModel::Kind::Bounded;
  if (s == "lognormal") return FieldModel::Kind::LogNormal;
  fail(path, "unknown field model \"" + s + "\" (use \"bounded\" or \"lognormal\")");
}

SpectrumTarget resolve_target(const ExperimentConfig& c) {
  if (c.spectrum.target != SpectrumTarget::Auto) return c.spectrum.target;
  return full_space_kind(c.preconditioner.kind) ? SpectrumTarget::Schur
                                                : SpectrumTarget::Reduced;
}

const char* target_name(SpectrumTarget t) {
  switch (t) {
    case SpectrumTarget::Auto: return "auto";
    case SpectrumTarget::Schur: return "schur";
    case SpectrumTarget::Reduced: return "reduced";
    case SpectrumTarget::Saddle: return "saddle";
  }
  throw Error("target_name: unknown spectrum target");
}

// Range checks shared by the base config and every expanded sweep point.
// `ctx` prefixes diagnostics so a bad swept value names its sweep point.
void check_ranges(const ExperimentConfig& c, const std::string& ctx) {
  auto bad = [&ctx](const std::string& msg) { fail(ctx, msg); };
  if (c.schema_version != 1) bad("schema_version: only version 1 is supported");
  if (!(c.field.sigma2 >= 0.0)) bad("field.sigma2: must be nonnegative");
  if (c.field.model == FieldModel::Kind::LogNormal) {
    if (!(c.field.corr_len2 > 0.0)) bad("field.corr_len2: must be positive");
    if (c.field.m_terms < 1) bad("field.m_terms: must be at least 1");
  }
  if (c.mesh_n < 2) bad("mesh_n: must be at least 2");
  if (c.quadrature.rule == QuadratureConfig::Rule::Gauss) {
    if (c.quadrature.m < 1) bad("quadrature.m: must be at least 1");
  } else if (c.quadrature.count < 1) {
    bad("quadrature.count: must be at least 1");
  }
  if (!(c.beta > 0.0)) bad("beta: must be positive");
  if (!(c.gamma >= 0.0)) bad("gamma: must be nonnegative");
  if (c.preconditioner.k_it < 1) bad("preconditioner.k_it: must be at least 1");
  if (c.preconditioner.power_iters < 1) bad("preconditioner.power_iters: must be at least 1");
  if (c.preconditioner.exact_core_cap < 1) bad("preconditioner.exact_core_cap: must be positive");
  if (!(c.inner.tol > 0.0)) bad("inner_solver.tol: must be positive");
  if (c.inner.maxit < 1) bad("inner_solver.maxit: must be at least 1");
  if (!(c.tol > 0.0)) bad("tol: must be positive");
  if (c.maxit < 1) bad("maxit: must be at least 1");
  if (c.spectrum.lanczos_iters < 2) bad("spectrum.lanczos_iters: must be at least 2");
  if (c.spectrum.dense_cap < 1) bad("spectrum.dense_cap: must be positive");
}

// Consistency between independent knobs; `ctx` as in check_ranges.
void check_consistency(const ExperimentConfig& c, const std::string& ctx) {
  auto bad = [&ctx](const std::string& msg) { fail(ctx, msg); };
  const bool full = full_space_kind(c.preconditioner.kind);
  const std::string kind = to_string(c.preconditioner.kind);
  if (full && c.control_space != ControlSpace::L2)
    bad("preconditioner.kind: " + kind + " requires control_space \"L2\"");
  if (!full && c.control_space != ControlSpace::H1)
    bad("preconditioner.kind: " + kind + " requires control_space \"H1\"");
  if (c.inner.mode == InnerSolveMode::PCG) {
    if (c.preconditioner.kind == PrecondKind::MatchedExact)
      bad("inner_solver: the exact core needs direct per-sample solves");
    if (c.control_space == ControlSpace::H1)
      bad("inner_solver: the H1 reduction needs direct per-sample solves");
  }
  const SpectrumTarget t = resolve_target(c);
  if (t == SpectrumTarget::Schur && !full)
    bad("spectrum.target: \"schur\" needs a Schur-approximation preconditioner kind");
  if (t == SpectrumTarget::Reduced && full)
    bad("spectrum.target: \"reduced\" needs a weighted-norm preconditioner kind");
  if (t == SpectrumTarget::Saddle && !full)
    bad("spectrum.target: \"saddle\" needs a Schur-approximation preconditioner kind");
  if (t != SpectrumTarget::Schur && c.spectrum.method == SpectrumMethod::Lanczos)
    bad("spectrum.method: the " + std::string(target_name(t)) +
        " operator is indefinite; use the dense method");
}

// Sweepable parameters. Integer-valued ones reject fractional JSON numbers;
// "kind" is the only string-valued one.
const std::vector<std::string>& sweep_param_names() {
  static const std::vector<std::string> names = {
      "beta",  "gamma", "sigma2",      "corr_len2", "m_terms",
      "mesh_n", "m",    "count",       "seed",      "k_it",
      "power_iters", "tol", "maxit",   "lanczos_iters", "kind"};
  return names;
}

bool sweep_param_is_integer(const std::string& p) {
  return p == "m_terms" || p == "mesh_n" || p == "m" || p == "count" || p == "seed" ||
         p == "k_it" || p == "power_iters" || p == "maxit" || p == "lanczos_iters";
}

void apply_sweep_value(ExperimentConfig& c, const SweepEntry& e, std::size_t idx) {
  const std::string& p = e.param;
  if (p == "kind") {
    c.preconditioner.kind = precond_kind_from_string(e.names[idx]);
    return;
  }
  const double v = e.numbers[idx];
  if (p == "beta") c.beta = v;
  else if (p == "gamma") c.gamma = v;
  else if (p == "sigma2") c.field.sigma2 = v;
  else if (p == "corr_len2") c.field.corr_len2 = v;
  else if (p == "m_terms") c.field.m_terms = static_cast<int>(v);
  else if (p == "mesh_n") c.mesh_n = static_cast<int>(v);
  else if (p == "m") c.quadrature.m = static_cast<int>(v);
  else if (p == "count") c.quadrature.count = static_cast<int>(v);
  else if (p == "seed") c.quadrature.seed = static_cast<std::uint64_t>(v);
  else if (p == "k_it") c.preconditioner.k_it = static_cast<int>(v);
  else if (p == "power_iters") c.preconditioner.power_iters = static_cast<int>(v);
  else if (p == "tol") c.tol = v;
  else if (p == "maxit") c.maxit = static_cast<int>(v);
  else if (p == "lanczos_iters") c.spectrum.lanczos_iters = static_cast<int>(v);
  else fail("sweep", "unknown parameter \"" + p + "\"");
}

// Sweep axes that only make sense for one field model or quadrature rule.
void check_sweep_applicability(const ExperimentConfig& c, const std::string& param) {
  if ((param == "corr_len2" || param == "m_terms") &&
      c.field.model != FieldModel::Kind::LogNormal)
    fail("sweep." + param, "only applies to the lognormal field model");
  if (param == "m" && c.quadrature.rule != QuadratureConfig::Rule::Gauss)
    fail("sweep.m", "only applies to the gauss quadrature rule");
  if ((param == "count" || param == "seed") &&
      c.quadrature.rule != QuadratureConfig::Rule::MonteCarlo)
    fail("sweep." + param, "only applies to the monte_carlo quadrature rule");
}

void parse_field(const json& v, FieldConfig& out) {
  require_object(v, "field");
  require_known_keys(v, "field", {"model", "sigma2", "corr_len2", "m_terms"});
  const json* model = find(v, "model");
  if (!model) fail("field", "missing required key \"model\"");
  out.model = field_kind_from_string(get_string(*model, "field.model"), "field.model");
  const json* sigma2 = find(v, "sigma2");
  if (!sigma2) fail("field", "missing required key \"sigma2\"");
  out.sigma2 = get_number(*sigma2, "field.sigma2");
  const json* corr = find(v, "corr_len2");
  const json* terms = find(v, "m_terms");
  if (out.model == FieldModel::Kind::Bounded) {
    if (corr) fail("field.corr_len2", "only applies to the lognormal model");
    if (terms) fail("field.m_terms", "only applies to the lognormal model");
  } else {
    if (!corr) fail("field", "the lognormal model needs \"corr_len2\"");
    if (!terms) fail("field", "the lognormal model needs \"m_terms\"");
    out.corr_len2 = get_number(*corr, "field.corr_len2");
    out.m_terms = get_int(*terms, "field.m_terms");
  }
}

void parse_quadrature(const json& v, QuadratureConfig& out) {
  require_object(v, "quadrature");
  require_known_keys(v, "quadrature", {"rule", "m", "count", "seed"});
  const json* rule = find(v, "rule");
  if (!rule) fail("quadrature", "missing required key \"rule\"");
  const std::string name = get_string(*rule, "quadrature.rule");
  if (name == "gauss") {
    out.rule = QuadratureConfig::Rule::Gauss;
    if (find(v, "count")) fail("quadrature.count", "only applies to the monte_carlo rule");
    if (find(v, "seed")) fail("quadrature.seed", "only applies to the monte_carlo rule");
    if (const json* m = find(v, "m")) out.m = get_int(*m, "quadrature.m");
  } else if (name == "monte_carlo") {
    out.rule = QuadratureConfig::Rule::MonteCarlo;
    if (find(v, "m")) fail("quadrature.m", "only applies to the gauss rule");
    const json* count = find(v, "count");
    if (!count) fail("quadrature", "the monte_carlo rule needs \"count\"");
    out.count = get_int(*count, "quadrature.count");
    if (const json* seed = find(v, "seed")) out.seed = get_uint64(*seed, "quadrature.seed");
  } else {
    fail("quadrature.rule", "unknown rule \"" + name + "\" (use \"gauss\" or \"monte_carlo\")");
  }
}

void parse_preconditioner(const json& v, PrecondParams& out) {
  require_object(v, "preconditioner");
  require_known_keys(v, "preconditioner", {"kind", "k_it", "power_iters", "exact_core_cap"});
  if (const json* kind = find(v, "kind")) {
    const std::string name = get_string(*kind, "preconditioner.kind");
    try {
      out.kind = precond_kind_from_string(name);
    } catch (const ConfigError&) {
      fail("preconditioner.kind", "unknown kind \"" + name + "\"");
    }
  }
  if (const json* k = find(v, "k_it")) out.k_it = get_int(*k, "preconditioner.k_it");
  if (const json* p = find(v, "power_iters"))
    out.power_iters = get_int(*p, "preconditioner.power_iters");
  if (const json* c = find(v, "exact_core_cap"))
    out.exact_core_cap = get_int(*c, "preconditioner.exact_core_cap");
}

void parse_inner_solver(const json& v, InnerSolverParams& out) {
  auto mode_of = [](const std::string& s, const std::string& path) {
    if (s == "direct") return InnerSolveMode::Direct;
    if (s == "pcg") return InnerSolveMode::PCG;
    fail(path, "unknown mode \"" + s + "\" (use \"direct\" or \"pcg\")");
  };
  if (v.is_string()) {
    out.mode = mode_of(v.get<std::string>(), "inner_solver");
    return;
  }
  require_object(v, "inner_solver");
  require_known_keys(v, "inner_solver", {"mode", "tol", "maxit"});
  if (const json* mode = find(v, "mode"))
    out.mode = mode_of(get_string(*mode, "inner_solver.mode"), "inner_solver.mode");
  if (const json* tol = find(v, "tol")) out.tol = get_number(*tol, "inner_solver.tol");
  if (const json* maxit = find(v, "maxit")) out.maxit = get_int(*maxit, "inner_solver.maxit");
}

void parse_spectrum(const json& v, SpectrumConfig& out, bool& method_given) {
  require_object(v, "spectrum");
  require_known_keys(v, "spectrum", {"method", "target", "lanczos_iters", "dense_cap"});
  if (const json* method = find(v, "method")) {
    method_given = true;
    const std::string name = get_string(*method, "spectrum.method");
    if (name == "dense") out.method = SpectrumMethod::Dense;
    else if (name == "lanczos") out.method = SpectrumMethod::Lanczos;
    else fail("spectrum.method", "unknown method \"" + name + "\" (use \"dense\" or \"lanczos\")");
  }
  if (const json* target = find(v, "target")) {
    const std::string name = get_string(*target, "spectrum.target");
    if (name == "auto") out.target = SpectrumTarget::Auto;
    else if (name == "schur") out.target = SpectrumTarget::Schur;
    else if (name == "reduced") out.target = SpectrumTarget::Reduced;
    else if (name == "saddle") out.target = SpectrumTarget::Saddle;
    else fail("spectrum.target", "unknown target \"" + name + "\"");
  }
  if (const json* it = find(v, "lanczos_iters"))
    out.lanczos_iters = get_int(*it, "spectrum.lanczos_iters");
  if (const json* cap = find(v, "dense_cap")) out.dense_cap = get_int(*cap, "spectrum.dense_cap");
}

void parse_sweep(const json& v, std::vector<SweepEntry>& out) {
  require_object(v, "sweep");
  for (const auto& item : v.items()) {
    const std::string& param = item.key();
    const auto& names = sweep_param_names();
    if (std::find(names.begin(), names.end(), param) == names.end())
      fail("sweep", "unknown parameter \"" + param + "\"");
    const json& list = item.value();
    const std::string path = "sweep." + param;
    if (!list.is_array()) fail(path, "expected an array");
    if (list.empty()) fail(path, "sweep lists must be nonempty");
    SweepEntry entry;
    entry.param = param;
    for (const json& value : list) {
      if (param == "kind") {
        entry.names.push_back(get_string(value, path));
      } else if (sweep_param_is_integer(param)) {
        entry.numbers.push_back(get_int(value, path));
      } else {
        entry.numbers.push_back(get_number(value, path));
      }
    }
    out.push_back(std::move(entry));
  }
  std::sort(out.begin(), out.end(),
            [](const SweepEntry& a, const SweepEntry& b) { return a.param < b.param; });
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, end);
}

const char* control_space_name(ControlSpace cs) {
  return cs == ControlSpace::L2 ? "L2" : "H1";
}

// Config scalar columns in alphabetical order; spectrum rows carry three
// extra spectrum knobs, merged in at their sorted positions.
std::vector<std::string> config_columns(bool spectrum_row) {
  std::vector<std::string> cols = {
      "beta",        "control_space", "field_corr_len2", "field_m_terms", "field_model",
      "field_sigma2", "gamma",        "inner_solver",    "k_it",          "maxit",
      "mesh_n",      "power_iters",   "precond_kind",    "quad_count",    "quad_m",
      "quad_rule",   "quad_seed",     "tol"};
  if (spectrum_row) {
    cols.insert(std::find(cols.begin(), cols.end(), "maxit"), "lanczos_iters");
    cols.insert(std::find(cols.begin(), cols.end(), "tol"), "spectrum_method");
    cols.insert(std::find(cols.begin(), cols.end(), "tol"), "spectrum_target");
  }
  return cols;
}

void append_config_cells(std::vector<std::string>& row, const ExperimentConfig& c,
                         bool spectrum_row) {
  const bool lognormal = c.field.model == FieldModel::Kind::LogNormal;
  const bool gauss = c.quadrature.rule == QuadratureConfig::Rule::Gauss;
  row.push_back(format_double(c.beta));
  row.push_back(control_space_name(c.control_space));
  row.push_back(lognormal ? format_double(c.field.corr_len2) : "");
  row.push_back(lognormal ? std::to_string(c.field.m_terms) : "");
  row.push_back(lognormal ? "lognormal" : "bounded");
  row.push_back(format_double(c.field.sigma2));
  row.push_back(format_double(c.gamma));
  row.push_back(c.inner.mode == InnerSolveMode::Direct ? "direct" : "pcg");
  row.push_back(std::to_string(c.preconditioner.k_it));
  if (spectrum_row) row.push_back(std::to_string(c.spectrum.lanczos_iters));
  row.push_back(std::to_string(c.maxit));
  row.push_back(std::to_string(c.mesh_n));
  row.push_back(std::to_string(c.preconditioner.power_iters));
  row.push_back(to_string(c.preconditioner.kind));
  row.push_back(gauss ? "" : std::to_string(c.quadrature.count));
  row.push_back(gauss ? std::to_string(c.quadrature.m) : "");
  row.push_back(gauss ? "gauss" : "monte_carlo");
  row.push_back(gauss ? "" : std::to_string(c.quadrature.seed));
  if (spectrum_row) {
    row.push_back(c.spectrum.method == SpectrumMethod::Dense ? "dense" : "lanczos");
    row.push_back(target_name(resolve_target(c)));
  }
  row.push_back(format_double(c.tol));
}

Eigen::MatrixXd densify(const LinOp& op, int dim) {
  Eigen::MatrixXd out(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  for (int c = 0; c < dim; ++c) {
    e[c] = 1.0;
    out.col(c) = op(e);
    e[c] = 0.0;
  }
  return out;
}

// Forward operator, preconditioner apply and dimension of the requested
// spectrum target. Only the Schur forward map is positive definite (it is
// the Lanczos inner product); Reduced and Saddle are indefinite, dense-only.
struct TargetOps {
  LinOp forward;
  LinOp pre;
  int dim = 0;
};

TargetOps make_target_ops(const SaddleSystem& sys, const Preconditioner& prec,
                          SpectrumTarget target) {
  TargetOps ops;
  switch (target) {
    case SpectrumTarget::Schur:
      ops.forward = [&sys](const Eigen::VectorXd& v) { return apply_schur(sys, v); };
      ops.pre = [&prec](const Eigen::VectorXd& v) { return prec.schur_inverse(v); };
      ops.dim = sys.samples() * sys.state_dim();
      break;
    case SpectrumTarget::Reduced: {
      const ReducedSystem red = make_reduced(sys);
      ops.forward = [&sys, red](const Eigen::VectorXd& v) { return apply_reduced(red, v); };
      ops.pre = [&prec](const Eigen::VectorXd& v) { return prec.apply(v); };
      ops.dim = red.total_dim();
      break;
    }
    case SpectrumTarget::Saddle:
      ops.forward = [&sys](const Eigen::VectorXd& v) {
        return to_flat(apply_saddle(sys, from_flat(sys, v)));
      };
      ops.pre = [&prec](const Eigen::VectorXd& v) { return prec.apply(v); };
      ops.dim = sys.total_dim();
      break;
    case SpectrumTarget::Auto:
      throw Error("make_target_ops: target must be resolved");
  }
  return ops;
}

struct Extremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lambda_min_abs = 0.0;
  double lambda_max_abs = 0.0;
};

Extremes from_spectrum(const std::vector<double>& spectrum) {
  if (spectrum.empty()) throw Error("spectrum_extremes: empty spectrum");
  Extremes ext;
  ext.lambda_min = spectrum.front();
  ext.lambda_max = spectrum.front();
  ext.lambda_min_abs = std::abs(spectrum.front());
  ext.lambda_max_abs = std::abs(spectrum.front());
  for (double lam : spectrum) {
    ext.lambda_min = std::min(ext.lambda_min, lam);
    ext.lambda_max = std::max(ext.lambda_max, lam);
    ext.lambda_min_abs = std::min(ext.lambda_min_abs, std::abs(lam));
    ext.lambda_max_abs = std::max(ext.lambda_max_abs, std::abs(lam));
  }
  return ext;
}

Extremes spectrum_extremes(const ExperimentConfig& c, const SaddleSystem& sys) {
  const Preconditioner prec(sys, c.preconditioner);
  const TargetOps ops = make_target_ops(sys, prec, resolve_target(c));
  if (c.spectrum.method == SpectrumMethod::Dense) {
    if (ops.dim > c.spectrum.dense_cap)
      throw SizeCapExceeded("spectrum: operator dimension " + std::to_string(ops.dim) +
                            " > dense_cap " + std::to_string(c.spectrum.dense_cap));
    const Eigen::MatrixXd P_op = densify(
        [&ops](const Eigen::VectorXd& v) { return ops.pre(ops.forward(v)); }, ops.dim);
    const auto rep = dense_spectrum(P_op, Eigen::MatrixXd::Identity(ops.dim, ops.dim),
                                    DensePath::General, c.spectrum.dense_cap);
    return from_spectrum(rep.spectrum);
  }
  auto op = [&ops](const Eigen::VectorXd& v) { return ops.pre(ops.forward(v)); };
  const auto rep =
      lanczos_extremal(op, ops.forward, ops.dim, c.spectrum.lanczos_iters, kSpectrumSeed);
  return from_spectrum(rep.spectrum);
}

}  // namespace

ExperimentConfig validate_config(const std::string& raw_json) {
  json root;
  try {
    root = json::parse(raw_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  require_object(root, "config");
  require_known_keys(root, "config",
                     {"schema_version", "field", "mesh_n", "quadrature", "beta", "gamma",
                      "control_space", "preconditioner", "inner_solver", "mass_solver", "tol",
                      "maxit", "spectrum", "sweep", "output", "timing"});

  ExperimentConfig cfg;
  const json* version = find(root, "schema_version");
  if (!version) fail("config", "missing required key \"schema_version\"");
  cfg.schema_version = get_int(*version, "schema_version");

  const json* field = find(root, "field");
  if (!field) fail("config", "missing required key \"field\"");
  parse_field(*field, cfg.field);

  const json* beta = find(root, "beta");
  if (!beta) fail("config", "missing required key \"beta\"");
  cfg.beta = get_number(*beta, "beta");

  if (const json* n = find(root, "mesh_n")) cfg.mesh_n = get_int(*n, "mesh_n");
  if (const json* quad = find(root, "quadrature")) parse_quadrature(*quad, cfg.quadrature);
  if (const json* gamma = find(root, "gamma")) cfg.gamma = get_number(*gamma, "gamma");
  if (const json* cs = find(root, "control_space")) {
    const std::string name = get_string(*cs, "control_space");
    if (name == "L2") cfg.control_space = ControlSpace::L2;
    else if (name == "H1") cfg.control_space = ControlSpace::H1;
    else fail("control_space", "unknown space \"" + name + "\" (use \"L2\" or \"H1\")");
  }
  if (const json* prec = find(root, "preconditioner")) parse_preconditioner(*prec, cfg.preconditioner);
  if (const json* inner = find(root, "inner_solver")) parse_inner_solver(*inner, cfg.inner);
  if (const json* mass = find(root, "mass_solver")) {
    const std::string name = get_string(*mass, "mass_solver");
    if (name == "direct") cfg.mass_mode = MassSolveMode::Direct;
    else if (name == "chebyshev") cfg.mass_mode = MassSolveMode::Chebyshev;
    else fail("mass_solver", "unknown mode \"" + name + "\" (use \"direct\" or \"chebyshev\")");
  }
  if (const json* tol = find(root, "tol")) cfg.tol = get_number(*tol, "tol");
  if (const json* maxit = find(root, "maxit")) cfg.maxit = get_int(*maxit, "maxit");
  bool method_given = false;
  if (const json* spectrum = find(root, "spectrum"))
    parse_spectrum(*spectrum, cfg.spectrum, method_given);
  // Lanczos is the default only where it applies; indefinite targets fall
  // back to the dense eigensolver unless the user insists.
  if (!method_given && resolve_target(cfg) != SpectrumTarget::Schur)
    cfg.spectrum.method = SpectrumMethod::Dense;
  if (const json* sweep = find(root, "sweep")) parse_sweep(*sweep, cfg.sweep);
  if (const json* output = find(root, "output")) cfg.output = get_string(*output, "output");
  if (const json* timing = find(root, "timing")) cfg.timing = get_bool(*timing, "timing");

  check_ranges(cfg, "");
  check_consistency(cfg, "");
  (void)expand_sweep(cfg);  // forces per-point validation of swept values
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return validate_config(buffer.str());
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
  for (const SweepEntry& entry : cfg.sweep) check_sweep_applicability(cfg, entry.param);
  std::vector<ExperimentConfig> points;
  std::vector<std::size_t> idx(cfg.sweep.size(), 0);
  while (true) {
    ExperimentConfig point = cfg;
    point.sweep.clear();
    for (std::size_t a = 0; a < cfg.sweep.size(); ++a)
      apply_sweep_value(point, cfg.sweep[a], idx[a]);
    const std::string ctx = "sweep point " + std::to_string(points.size() + 1);
    check_ranges(point, ctx);
    check_consistency(point, ctx);
    points.push_back(std::move(point));
    // Odometer increment, last axis fastest.
    std::size_t a = cfg.sweep.size();
    while (a > 0) {
      --a;
      if (++idx[a] < cfg.sweep[a].size()) break;
      idx[a] = 0;
      if (a == 0) return points;
    }
    if (cfg.sweep.empty()) return points;
  }
}

SaddleSystem build_system(const ExperimentConfig& cfg) {
  auto space = FeSpace::on(StructuredMesh::unit_square(cfg.mesh_n));
  FieldModel model =
      cfg.field.model == FieldModel::Kind::Bounded
          ? FieldModel::bounded(cfg.field.sigma2)
          : FieldModel::log_normal(cfg.field.sigma2,
                                   kl_expansion(space.mesh, cfg.field.corr_len2,
                                                cfg.field.m_terms));
  const int dims = model.dim();
  CollocationSet colloc;
  if (cfg.quadrature.rule == QuadratureConfig::Rule::Gauss) {
    const Rule1d rule = cfg.field.model == FieldModel::Kind::Bounded
                            ? gauss_legendre_1d(cfg.quadrature.m)
                            : gauss_hermite_1d(cfg.quadrature.m);
    colloc = tensorize(rule, dims);
  } else {
    const SampleDist dist = cfg.field.model == FieldModel::Kind::Bounded ? SampleDist::Uniform
                                                                         : SampleDist::Normal;
    colloc = monte_carlo(dist, dims, cfg.quadrature.count, cfg.quadrature.seed);
  }
  SystemParams params;
  params.beta = cfg.beta;
  params.gamma = cfg.gamma;
  params.control_space = cfg.control_space;
  params.mass_mode = cfg.mass_mode;
  params.inner = cfg.inner;
  return assemble_system(std::move(space), model, std::move(colloc), params);
}

std::string ExperimentResult::csv() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << "\n";
  }
  return os.str();
}

ExperimentResult run_spectrum_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.columns = config_columns(true);
  result.columns.push_back("lambda_min");
  result.columns.push_back("lambda_max");
  result.columns.push_back("lambda_min_abs");
  result.columns.push_back("lambda_max_abs");
  if (cfg.timing) result.columns.push_back("time");
  for (const ExperimentConfig& point : expand_sweep(cfg)) {
    const auto t0 = std::chrono::steady_clock::now();
    const SaddleSystem sys = build_system(point);
    const Extremes ext = spectrum_extremes(point, sys);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
    std::vector<std::string> row;
    append_config_cells(row, point, true);
    row.push_back(format_double(ext.lambda_min));
    row.push_back(format_double(ext.lambda_max));
    row.push_back(format_double(ext.lambda_min_abs));
    row.push_back(format_double(ext.lambda_max_abs));
    if (cfg.timing) row.push_back(format_double(elapsed.count()));
    result.rows.push_back(std::move(row));
  }
  return result;
}

ExperimentResult run_solve_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.columns = config_columns(false);
  result.columns.push_back("iterations");
  result.columns.push_back("converged");
  result.columns.push_back("final_residual");
  if (cfg.timing) result.columns.push_back("time");
  for (const ExperimentConfig& point : expand_sweep(cfg)) {
    const auto t0 = std::chrono::steady_clock::now();
    const SaddleSystem sys = build_system(point);
    const Preconditioner prec(sys, point.preconditioner);
    LinOp op;
    Eigen::VectorXd b;
    if (full_space_kind(point.preconditioner.kind)) {
      op = [&sys](const Eigen::VectorXd& v) {
        return to_flat(apply_saddle(sys, from_flat(sys, v)));
      };
      b = to_flat(sys.rhs);
    } else {
      const ReducedSystem red = make_reduced(sys);
      op = [&sys, red](const Eigen::VectorXd& v) { return apply_reduced(red, v); };
      b = reduced_rhs(red);
    }
    auto pre = [&prec](const Eigen::VectorXd& v) { return prec.apply(v); };
    auto [x, rep] = minres(op, pre, b, point.tol, point.maxit);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
    std::vector<std::string> row;
    append_config_cells(row, point, false);
    row.push_back(std::to_string(rep.iterations));
    row.push_back(rep.converged ? "true" : "false");
    row.push_back(format_double(rep.final_residual));
    if (cfg.timing) row.push_back(format_double(elapsed.count()));
    result.rows.push_back(std::move(row));
    result.residual_histories.push_back(rep.residuals);
  }
  return result;
}

std::vector<std::string> write_outputs(const ExperimentConfig& cfg,
                                       const ExperimentResult& result) {
  std::vector<std::string> written;
  if (cfg.output.empty()) return written;
  {
    std::ofstream os(cfg.output);
    if (!os) throw Error("write_outputs: cannot open \"" + cfg.output + "\"");
    os << result.csv();
  }
  written.push_back(cfg.output);
  if (result.residual_histories.empty()) return written;
  std::string stem = cfg.output;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
    stem.resize(stem.size() - 4);
  for (std::size_t r = 0; r < result.residual_histories.size(); ++r) {
    std::ostringstream name;
    name << stem << "_res_" << std::setw(3) << std::setfill('0') << (r + 1) << ".csv";
    std::ofstream os(name.str());
    if (!os) throw Error("write_outputs: cannot open \"" + name.str() + "\"");
    os << "iter,relres\n";
    const auto& history = result.residual_histories[r];
    for (std::size_t k = 0; k < history.size(); ++k)
      os << (k + 1) << "," << format_double(history[k]) << "\n";
    written.push_back(name.str());
  }
  return written;
}

std::vector<std::string> export_matrices(const ExperimentConfig& cfg, int cap,
                                         const std::string& prefix) {
  if (!cfg.sweep.empty())
    throw ConfigError("export-matrix: the config must describe a single point, not a sweep");
  const SaddleSystem sys = build_system(cfg);
  auto check_cap = [cap](const char* what, int dim) {
    if (dim > cap)
      throw SizeCapExceeded(std::string("export-matrix: ") + what + " dimension " +
                            std::to_string(dim) + " > cap " + std::to_string(cap));
  };
  std::vector<std::string> written;
  check_cap("saddle operator", sys.total_dim());
  const Eigen::MatrixXd S = densify(
      [&sys](const Eigen::VectorXd& v) { return to_flat(apply_saddle(sys, from_flat(sys, v))); },
      sys.total_dim());
  write_matrix_market(prefix + "_saddle.mtx", S);
  written.push_back(prefix + "_saddle.mtx");
  if (sys.control_space == ControlSpace::L2) {
    const int dim = sys.samples() * sys.state_dim();
    check_cap("Schur complement", dim);
    const Eigen::MatrixXd schur =
        densify([&sys](const Eigen::VectorXd& v) { return apply_schur(sys, v); }, dim);
    write_matrix_market(prefix + "_schur.mtx", schur);
    written.push_back(prefix + "_schur.mtx");
  } else {
    const ReducedSystem red = make_reduced(sys);
    check_cap("reduced operator", red.total_dim());
    const Eigen::MatrixXd reduced = densify(
        [&red](const Eigen::VectorXd& v) { return apply_reduced(red, v); }, red.total_dim());
    write_matrix_market(prefix + "_reduced.mtx", reduced);
    written.push_back(prefix + "_reduced.mtx");
  }
  return written;
}

}  // namespace rocp
