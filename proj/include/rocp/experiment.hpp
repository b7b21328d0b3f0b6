// SPDX-License-Identifier: Apache-2.0
//
// Declarative experiment driver: a JSON config describes one problem family
// (field model, mesh, quadrature, penalty weights, preconditioner, solver
// knobs) plus optional sweep lists over scalar parameters; the driver
// expands the sweep, runs one spectrum or solve study per point, and emits a
// CSV table with a fixed column schema (config scalars in alphabetical
// order, then result columns). With direct inner solves and the pinned
// seeds, re-running a config reproduces the CSV byte for byte; wall-clock
// timing is therefore opt-in via the "timing" key.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rocp/krylov.hpp"
#include "rocp/precond.hpp"
#include "rocp/saddle.hpp"

namespace rocp {

enum class SpectrumMethod { Dense, Lanczos };

// Which preconditioned operator a spectrum run examines. Auto resolves by
// preconditioner family: Schur-approximation kinds study the preconditioned
// Schur complement, weighted-norm kinds the preconditioned reduced operator.
// Only the Schur target is positive definite; Reduced and Saddle keep the
// zero adjoint block and are indefinite, which rules out the Lanczos path
// (no usable inner product), so they are dense-only. All three have real
// spectra; rows carry signed extremes and modulus extremes, the latter being
// what robustness statements about indefinite operators are made of.
enum class SpectrumTarget { Auto, Schur, Reduced, Saddle };

struct FieldConfig {
  FieldModel::Kind model = FieldModel::Kind::Bounded;
  double sigma2 = 0.5;
  double corr_len2 = 0.5;  // LogNormal only
  int m_terms = 3;         // LogNormal only
};

struct QuadratureConfig {
  enum class Rule { Gauss, MonteCarlo };
  Rule rule = Rule::Gauss;
  int m = 3;               // Gauss: nodes per stochastic dimension
  int count = 100;         // MonteCarlo: total samples
  std::uint64_t seed = 1;  // MonteCarlo
};

struct SpectrumConfig {
  SpectrumMethod method = SpectrumMethod::Lanczos;
  SpectrumTarget target = SpectrumTarget::Auto;
  int lanczos_iters = 100;
  int dense_cap = 6000;
};

// One sweep axis: a parameter name from the sweepable set and a nonempty
// value list, numeric for every parameter except the preconditioner kind.
struct SweepEntry {
  std::string param;
  std::vector<double> numbers;
  std::vector<std::string> names;  // "kind" only

  std::size_t size() const { return names.empty() ? numbers.size() : names.size(); }
};

struct ExperimentConfig {
  int schema_version = 1;
  FieldConfig field;
  int mesh_n = 32;
  QuadratureConfig quadrature;
  double beta = 1e-2;
  double gamma = 0.1;
  ControlSpace control_space = ControlSpace::L2;
  PrecondParams preconditioner;
  InnerSolverParams inner;
  MassSolveMode mass_mode = MassSolveMode::Direct;
  double tol = 1e-6;
  int maxit = 200;
  SpectrumConfig spectrum;
  std::vector<SweepEntry> sweep;  // sorted by parameter name
  std::string output;             // CSV path; empty means caller-managed
  bool timing = false;
};

// Parses and validates a JSON config text. Defaults are filled for every
// omitted key; unknown keys are rejected by name with their object path;
// inconsistent combinations (preconditioner family vs control space, PCG
// inner solves where exactness is required, dense-only spectrum targets with
// the Lanczos method) are rejected with a diagnostic. Throws ConfigError.
ExperimentConfig validate_config(const std::string& raw_json);

// validate_config on the contents of a file.
ExperimentConfig load_config(const std::string& path);

// Cartesian expansion of the sweep lists into per-point configs, each
// re-validated; sweep axes are ordered by parameter name, the first axis
// varying slowest. A config without sweeps expands to itself.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);

// Assembles the collocated system of one config point (ignoring any sweep).
SaddleSystem build_system(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  // One relative-residual history per row; solve experiments only.
  std::vector<std::vector<double>> residual_histories;

  std::string csv() const;
};

// One TableRow per sweep point with the extreme eigenvalues of the requested
// preconditioned operator, by dense eigensolve or by Lanczos with full
// reorthogonalization in the operator inner product.
ExperimentResult run_spectrum_experiment(const ExperimentConfig& cfg);

// One TableRow per sweep point with preconditioned MINRES iteration counts;
// non-converged rows are written with converged=false, not dropped.
ExperimentResult run_solve_experiment(const ExperimentConfig& cfg);

// Writes result.csv() to cfg.output and, for solve results, one residual
// history sidecar per row next to it (suffix _res_NNN.csv). No-op when
// cfg.output is empty.
std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

// Dense Matrix Market export of the operators of a sweep-free config point:
// the saddle matrix plus the exact Schur complement (L2 control) or the
// reduced operator (H1 control). Every exported operator must fit the cap;
// throws SizeCapExceeded otherwise. Returns the files written.
std::vector<std::string> export_matrices(const ExperimentConfig& cfg, int cap,
                                         const std::string& prefix);

}  // namespace rocp
