// SPDX-License-Identifier: Apache-2.0
//
// Config parsing, sweep expansion, CSV determinism, and the spectrum/solve
// drivers at tiny scale. Dense spectra act as oracles for the Lanczos path.

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "oracle_utils.hpp"
#include "rocp/errors.hpp"
#include "rocp/experiment.hpp"
#include "rocp/matrix_io.hpp"

using namespace rocp;

namespace {

// Tiny bounded-field base: mesh 4 (N_h = 9), tensor Gauss m=2 (N = 16).
std::string tiny(const std::string& extra) {
  std::string base = R"({
    "schema_version": 1,
    "field": {"model": "bounded", "sigma2": 0.5},
    "mesh_n": 4,
    "quadrature": {"rule": "gauss", "m": 2},
    "beta": 1e-2)";
  return base + (extra.empty() ? "" : ",\n" + extra) + "\n}";
}

}  // namespace

TEST_CASE("minimal config fills the documented defaults") {
  const auto cfg = validate_config(
      R"({"schema_version": 1, "field": {"model": "bounded", "sigma2": 0.5}, "beta": 1e-2})");
  CHECK(cfg.mesh_n == 32);
  CHECK(cfg.gamma == 0.1);
  CHECK(cfg.tol == 1e-6);
  CHECK(cfg.maxit == 200);
  CHECK(cfg.control_space == ControlSpace::L2);
  CHECK(cfg.quadrature.rule == QuadratureConfig::Rule::Gauss);
  CHECK(cfg.quadrature.m == 3);
  CHECK(cfg.preconditioner.kind == PrecondKind::SchurDrop);
  CHECK(cfg.preconditioner.k_it == 2);
  CHECK(cfg.preconditioner.power_iters == 20);
  CHECK(cfg.inner.mode == InnerSolveMode::Direct);
  CHECK(cfg.spectrum.method == SpectrumMethod::Lanczos);
  CHECK(cfg.spectrum.target == SpectrumTarget::Auto);
  CHECK(cfg.timing == false);
  CHECK(cfg.output.empty());
}

TEST_CASE("config rejections name the offending key") {
  auto message_of = [](const std::string& text) {
    try {
      (void)validate_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };

  CHECK(message_of(tiny(R"("betta": 2)")).find("betta") != std::string::npos);
  CHECK(message_of(R"({"schema_version": 1, "beta": 1e-2})").find("field") != std::string::npos);
  CHECK(message_of(tiny(R"("tol": 0)")).find("tol") != std::string::npos);
  CHECK(message_of(tiny(R"("control_space": "h1")")).find("control_space") != std::string::npos);
  CHECK(message_of(tiny(R"("sweep": {"beta": []})")).find("nonempty") != std::string::npos);
  CHECK(message_of(tiny(R"("sweep": {"delta": [1]})")).find("delta") != std::string::npos);
  CHECK(message_of(tiny(R"("sweep": {"mesh_n": [4.5]})")).find("integer") != std::string::npos);
  CHECK(message_of("{ nope").find("config") != std::string::npos);

  // Structural and cross-field inconsistencies.
  CHECK_THROWS_AS((void)validate_config(tiny(R"("schema_version": 2)")), ConfigError);
  CHECK_THROWS_AS((void)validate_config(tiny(R"("field": {"model": "boundd", "sigma2": 1})")),
                  ConfigError);
  CHECK_THROWS_AS(
      (void)validate_config(tiny(R"("field": {"model": "bounded", "sigma2": 1, "m_terms": 3})")),
      ConfigError);
  CHECK_THROWS_AS(
      (void)validate_config(tiny(R"("field": {"model": "lognormal", "sigma2": 1})")),
      ConfigError);
  CHECK_THROWS_AS((void)validate_config(tiny(R"("quadrature": {"rule": "gauss", "count": 5})")),
                  ConfigError);
  CHECK_THROWS_AS((void)validate_config(tiny(R"("quadrature": {"rule": "monte_carlo"})")),
                  ConfigError);
  CHECK_THROWS_AS((void)validate_config(tiny(R"("preconditioner": {"kind": "norm_mean"})")),
                  ConfigError);
  CHECK_THROWS_AS((void)validate_config(tiny(R"("control_space": "H1")")), ConfigError);
  CHECK_THROWS_AS(
      (void)validate_config(
          tiny(R"("preconditioner": {"kind": "matched_exact"}, "inner_solver": "pcg")")),
      ConfigError);
  CHECK_THROWS_AS(
      (void)validate_config(
          tiny(R"("spectrum": {"target": "saddle", "method": "lanczos"})")),
      ConfigError);
  CHECK_THROWS_AS(
      (void)validate_config(tiny(R"("spectrum": {"target": "reduced"})")), ConfigError);
  CHECK_THROWS_AS((void)validate_config(tiny(R"("sweep": {"m": [2], "quadrature": [1]})")),
                  ConfigError);

  // A bad value inside a sweep list surfaces at validation time.
  CHECK(message_of(tiny(R"("sweep": {"beta": [1e-2, 0]})")).find("beta") != std::string::npos);
}

TEST_CASE("inner solver accepts string shorthand and object form") {
  auto cfg = validate_config(tiny(R"("inner_solver": "pcg")"));
  CHECK(cfg.inner.mode == InnerSolveMode::PCG);
  cfg = validate_config(tiny(R"("inner_solver": {"mode": "pcg", "tol": 1e-8, "maxit": 99})"));
  CHECK(cfg.inner.mode == InnerSolveMode::PCG);
  CHECK(cfg.inner.tol == 1e-8);
  CHECK(cfg.inner.maxit == 99);
}

TEST_CASE("sweep expansion is a cartesian product ordered by parameter name") {
  const auto cfg = validate_config(tiny(
      R"("sweep": {"kind": ["matched_mean", "schur_drop"], "beta": [1e-2, 1e-4, 1e-6]})"));
  const auto points = expand_sweep(cfg);
  REQUIRE(points.size() == 6);
  // Axes sorted: beta before kind; beta varies slowest.
  CHECK(points[0].beta == 1e-2);
  CHECK(points[0].preconditioner.kind == PrecondKind::MatchedMean);
  CHECK(points[1].beta == 1e-2);
  CHECK(points[1].preconditioner.kind == PrecondKind::SchurDrop);
  CHECK(points[4].beta == 1e-6);
  CHECK(points[4].preconditioner.kind == PrecondKind::MatchedMean);
  CHECK(points[5].preconditioner.kind == PrecondKind::SchurDrop);
  for (const auto& p : points) CHECK(p.sweep.empty());

  const auto lone = expand_sweep(validate_config(tiny("")));
  CHECK(lone.size() == 1);
}

TEST_CASE("build_system wires field, quadrature and spaces as configured") {
  auto sys = build_system(validate_config(tiny("")));
  CHECK(sys.samples() == 16);  // m = 2 over 4 bounded-field dimensions
  CHECK(sys.state_dim() == 9);
  CHECK(sys.beta == 1e-2);

  const auto mc = validate_config(tiny(
      R"("quadrature": {"rule": "monte_carlo", "count": 7, "seed": 3},
         "field": {"model": "lognormal", "sigma2": 0.3, "corr_len2": 0.5, "m_terms": 3})"));
  auto sys_mc = build_system(mc);
  CHECK(sys_mc.samples() == 7);
  CHECK(sys_mc.colloc.dim() == 3);

  const auto h1 = validate_config(tiny(
      R"("control_space": "H1", "preconditioner": {"kind": "norm_mean"})"));
  auto sys_h1 = build_system(h1);
  CHECK(sys_h1.control_space == ControlSpace::H1);
}

TEST_CASE("solve experiment: stable schema, deterministic bytes, honest failures") {
  const auto cfg = validate_config(tiny(
      R"("preconditioner": {"kind": "matched_mean"}, "sweep": {"beta": [1e-2, 1e-6]})"));
  const auto result = run_solve_experiment(cfg);
  REQUIRE(result.rows.size() == 2);
  REQUIRE(result.residual_histories.size() == 2);
  CHECK(result.columns.front() == "beta");
  CHECK(result.columns.back() == "final_residual");

  const std::string header =
      "beta,control_space,field_corr_len2,field_m_terms,field_model,field_sigma2,gamma,"
      "inner_solver,k_it,maxit,mesh_n,power_iters,precond_kind,quad_count,quad_m,quad_rule,"
      "quad_seed,tol,iterations,converged,final_residual";
  CHECK(result.csv().substr(0, header.size()) == header);

  // Byte-identical rerun.
  CHECK(run_solve_experiment(cfg).csv() == result.csv());

  // Row cells: swept beta in column 0, converged flag set, history matches.
  CHECK(result.rows[0][0] == "0.01");
  CHECK(result.rows[1][0] == "1e-06");
  const auto conv_col = result.columns.size() - 2;
  CHECK(result.rows[0][conv_col] == "true");
  CHECK(result.residual_histories[0].size() ==
        static_cast<std::size_t>(std::stoi(result.rows[0][conv_col - 1])));

  // Starved maxit writes a converged=false row instead of dropping it.
  const auto starved = validate_config(tiny(R"("maxit": 3)"));
  const auto failed = run_solve_experiment(starved);
  REQUIRE(failed.rows.size() == 1);
  CHECK(failed.rows[0][conv_col] == "false");

  // Opt-in timing appends a column and breaks byte-identity, so it is off by
  // default.
  const auto timed = run_solve_experiment(validate_config(tiny(R"("timing": true)")));
  CHECK(timed.columns.back() == "time");
}

TEST_CASE("spectrum experiment: dense path matches the reduced-eigenproblem oracle") {
  const auto cfg = validate_config(tiny(R"("spectrum": {"method": "dense"})"));
  const auto result = run_spectrum_experiment(cfg);
  REQUIRE(result.rows.size() == 1);

  const auto sys = build_system(cfg);
  const Eigen::VectorXd mu = reduced_spectrum(sys);
  const double expect_max = 1.0 + mu.maxCoeff() / cfg.beta;
  const auto cols = result.columns;
  const auto lmin_at = std::find(cols.begin(), cols.end(), "lambda_min") - cols.begin();
  const double lmin = std::stod(result.rows[0][lmin_at]);
  const double lmax = std::stod(result.rows[0][lmin_at + 1]);
  CHECK(lmin == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(lmax == doctest::Approx(expect_max).epsilon(1e-8));
  // Positive spectrum: modulus extremes coincide with the signed ones.
  CHECK(result.rows[0][lmin_at + 2] == result.rows[0][lmin_at]);
  CHECK(result.rows[0][lmin_at + 3] == result.rows[0][lmin_at + 1]);

  // Lanczos agrees with the dense extremes within 1%.
  const auto lcz = run_spectrum_experiment(validate_config(
      tiny(R"("spectrum": {"method": "lanczos", "lanczos_iters": 60})")));
  CHECK(std::stod(lcz.rows[0][lmin_at]) == doctest::Approx(lmin).epsilon(1e-2));
  CHECK(std::stod(lcz.rows[0][lmin_at + 1]) == doctest::Approx(lmax).epsilon(1e-2));

  // Identical bytes on rerun.
  CHECK(run_spectrum_experiment(cfg).csv() == result.csv());
}

TEST_CASE("spectrum experiment covers the reduced and saddle targets") {
  const auto h1 = validate_config(tiny(
      R"("control_space": "H1",
         "preconditioner": {"kind": "norm_mean"},
         "spectrum": {"method": "dense"})"));
  const auto red = run_spectrum_experiment(h1);
  const auto cols = red.columns;
  const auto lmin_at = std::find(cols.begin(), cols.end(), "lambda_min") - cols.begin();
  const double lmin = std::stod(red.rows[0][lmin_at]);
  const double lmax = std::stod(red.rows[0][lmin_at + 1]);
  const double lmin_abs = std::stod(red.rows[0][lmin_at + 2]);
  const double lmax_abs = std::stod(red.rows[0][lmin_at + 3]);
  // The reduced operator keeps the zero adjoint block, so the preconditioned
  // spectrum has a negative branch; its moduli are what stay bounded.
  CHECK(lmin < 0.0);
  CHECK(lmax > 0.0);
  CHECK(lmin_abs > 0.0);
  CHECK(lmax_abs >= lmin_abs);
  CHECK(lmax_abs < 10.0);
  const auto target_at = std::find(cols.begin(), cols.end(), "spectrum_target") - cols.begin();
  CHECK(red.rows[0][target_at] == "reduced");

  // Indefinite targets have no Lanczos inner product; only dense works.
  CHECK_THROWS_AS((void)validate_config(tiny(
                      R"("control_space": "H1",
                         "preconditioner": {"kind": "norm_mean"},
                         "spectrum": {"method": "lanczos"})")),
                  ConfigError);

  // The full saddle operator is indefinite: its preconditioned spectrum has
  // the negative branch (1 - sqrt(1 + 4 sigma))/2 <= (1 - sqrt(5))/2 < 0.
  const auto saddle = run_spectrum_experiment(validate_config(tiny(
      R"("spectrum": {"method": "dense", "target": "saddle"})")));
  CHECK(std::stod(saddle.rows[0][lmin_at]) < -0.5);

  // Dense refuses instances above the cap.
  CHECK_THROWS_AS((void)run_spectrum_experiment(validate_config(tiny(
                      R"("spectrum": {"method": "dense", "dense_cap": 10})"))),
                  SizeCapExceeded);
}

TEST_CASE("write_outputs emits the CSV and one residual sidecar per row") {
  auto cfg = validate_config(tiny(R"("output": "exp_out_test.csv")"));
  const auto result = run_solve_experiment(cfg);
  const auto files = write_outputs(cfg, result);
  REQUIRE(files.size() == 2);
  CHECK(files[0] == "exp_out_test.csv");
  CHECK(files[1] == "exp_out_test_res_001.csv");

  std::ifstream csv(files[0]);
  std::stringstream buf;
  buf << csv.rdbuf();
  CHECK(buf.str() == result.csv());

  std::ifstream sidecar(files[1]);
  std::string line;
  std::getline(sidecar, line);
  CHECK(line == "iter,relres");
  std::size_t data_lines = 0;
  while (std::getline(sidecar, line)) ++data_lines;
  CHECK(data_lines == result.residual_histories[0].size());

  for (const auto& f : files) std::remove(f.c_str());

  ExperimentConfig no_output = cfg;
  no_output.output.clear();
  CHECK(write_outputs(no_output, result).empty());
}

TEST_CASE("matrix export round-trips through Matrix Market") {
  const auto cfg = validate_config(tiny(""));
  const auto files = export_matrices(cfg, 400, "exp_mtx_test");
  REQUIRE(files.size() == 2);

  const auto sys = build_system(cfg);
  const Eigen::MatrixXd S_file = read_matrix_market_dense(files[0]);
  CHECK((S_file - fixtures::densify_saddle(sys)).norm() <= 1e-12 * S_file.norm());

  const Eigen::MatrixXd schur_file = read_matrix_market_dense(files[1]);
  const Eigen::MatrixXd schur_ref = oracle::densify(
      [&](const Eigen::VectorXd& v) { return apply_schur(sys, v); },
      sys.samples() * sys.state_dim());
  CHECK((schur_file - schur_ref).norm() <= 1e-12 * schur_ref.norm());
  for (const auto& f : files) std::remove(f.c_str());

  // H1 exports the reduced operator instead of the Schur complement.
  const auto h1 = validate_config(tiny(
      R"("control_space": "H1", "preconditioner": {"kind": "norm_mean"})"));
  const auto files_h1 = export_matrices(h1, 400, "exp_mtx_test_h1");
  REQUIRE(files_h1.size() == 2);
  CHECK(files_h1[1].find("reduced") != std::string::npos);
  const Eigen::MatrixXd red_file = read_matrix_market_dense(files_h1[1]);
  const auto sys_h1 = build_system(h1);
  const auto red = make_reduced(sys_h1);
  const Eigen::MatrixXd red_ref = oracle::densify(
      [&](const Eigen::VectorXd& v) { return apply_reduced(red, v); }, red.total_dim());
  CHECK((red_file - red_ref).norm() <= 1e-9 * red_ref.norm());
  for (const auto& f : files_h1) std::remove(f.c_str());

  CHECK_THROWS_AS((void)export_matrices(cfg, 10, "exp_mtx_small"), SizeCapExceeded);
  const auto swept = validate_config(tiny(R"("sweep": {"beta": [1e-2, 1e-4]})"));
  CHECK_THROWS_AS((void)export_matrices(swept, 400, "exp_mtx_sweep"), ConfigError);
}

TEST_CASE("monte carlo configs are reproducible across runs") {
  const auto cfg = validate_config(tiny(
      R"("quadrature": {"rule": "monte_carlo", "count": 6, "seed": 11},
         "spectrum": {"method": "dense"})"));
  const auto a = run_spectrum_experiment(cfg);
  const auto b = run_spectrum_experiment(cfg);
  CHECK(a.csv() == b.csv());
  const auto sys = build_system(cfg);
  CHECK(sys.samples() == 6);
}
