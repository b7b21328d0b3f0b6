// SPDX-License-Identifier: Apache-2.0
//
// Exercises the C API through the shared library alone. This binary must not
// link rocp_core; everything it needs has to come through rocp.h.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "rocp.h"

namespace {

const char* kTinyConfig = R"json({
  "schema_version": 1,
  "field": {"model": "bounded", "sigma2": 0.5},
  "mesh_n": 4,
  "quadrature": {"rule": "gauss", "m": 2},
  "beta": 1e-2,
  "preconditioner": {"kind": "schur_drop"}
})json";

const char* kStarvedConfig = R"json({
  "schema_version": 1,
  "field": {"model": "bounded", "sigma2": 0.5},
  "mesh_n": 4,
  "quadrature": {"rule": "gauss", "m": 2},
  "beta": 1e-6,
  "maxit": 2,
  "preconditioner": {"kind": "schur_drop"}
})json";

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("version and error strings are always valid pointers") {
  CHECK(rocp_version() != nullptr);
  CHECK(std::string(rocp_version()) == "0.1.0");
  CHECK(rocp_last_error() != nullptr);
}

TEST_CASE("create, inspect and run a spectrum experiment") {
  rocp_experiment* exp = nullptr;
  REQUIRE(rocp_experiment_create(kTinyConfig, &exp) == ROCP_OK);
  REQUIRE(exp != nullptr);

  size_t points = 0;
  CHECK(rocp_experiment_points(exp, &points) == ROCP_OK);
  CHECK(points == 1);
  CHECK(std::string(rocp_experiment_output_path(exp)).empty());

  CHECK(rocp_experiment_csv(exp) == nullptr);
  CHECK(rocp_experiment_rows(exp) == 0);

  REQUIRE(rocp_experiment_run_spectrum(exp) == ROCP_OK);
  const char* csv = rocp_experiment_csv(exp);
  REQUIRE(csv != nullptr);
  const std::string text(csv);
  CHECK(text.find("lambda_max") != std::string::npos);
  CHECK(rocp_experiment_rows(exp) == 1);

  rocp_experiment_destroy(exp);
}

TEST_CASE("invalid configs are reported with the offending key") {
  rocp_experiment* exp = reinterpret_cast<rocp_experiment*>(0x1);
  CHECK(rocp_experiment_create("{\"schema_version\": 1, \"betta\": 0.1}", &exp) ==
        ROCP_INVALID_CONFIG);
  CHECK(exp == nullptr);
  CHECK(std::string(rocp_last_error()).find("betta") != std::string::npos);

  CHECK(rocp_experiment_create("not json at all", &exp) == ROCP_INVALID_CONFIG);
  CHECK(exp == nullptr);

  CHECK(rocp_experiment_create_from_file("/no/such/file.json", &exp) != ROCP_OK);
  CHECK(exp == nullptr);
}

TEST_CASE("a starved solve reports non-convergence but keeps its rows") {
  rocp_experiment* exp = nullptr;
  REQUIRE(rocp_experiment_create(kStarvedConfig, &exp) == ROCP_OK);
  CHECK(rocp_experiment_run_solve(exp) == ROCP_NOT_CONVERGED);
  CHECK(std::string(rocp_last_error()).find("converge") != std::string::npos);
  REQUIRE(rocp_experiment_csv(exp) != nullptr);
  CHECK(rocp_experiment_rows(exp) == 1);
  CHECK(std::string(rocp_experiment_csv(exp)).find("false") != std::string::npos);
  rocp_experiment_destroy(exp);
}

TEST_CASE("a well-posed solve converges and the CSV says so") {
  rocp_experiment* exp = nullptr;
  REQUIRE(rocp_experiment_create(kTinyConfig, &exp) == ROCP_OK);
  REQUIRE(rocp_experiment_run_solve(exp) == ROCP_OK);
  const std::string text(rocp_experiment_csv(exp));
  CHECK(text.find("true") != std::string::npos);
  rocp_experiment_destroy(exp);
}

TEST_CASE("matrix export writes MatrixMarket files") {
  rocp_experiment* exp = nullptr;
  REQUIRE(rocp_experiment_create(kTinyConfig, &exp) == ROCP_OK);
  REQUIRE(rocp_experiment_export_matrices(exp, 6000, "capi_export") == ROCP_OK);
  CHECK(first_line("capi_export_saddle.mtx").find("%%MatrixMarket") == 0);
  CHECK(first_line("capi_export_schur.mtx").find("%%MatrixMarket") == 0);
  std::remove("capi_export_saddle.mtx");
  std::remove("capi_export_schur.mtx");

  CHECK(rocp_experiment_export_matrices(exp, 10, "capi_export") == ROCP_INVALID_CONFIG);
  rocp_experiment_destroy(exp);
}

TEST_CASE("null arguments are rejected, destroy tolerates null") {
  CHECK(rocp_experiment_create(nullptr, nullptr) == ROCP_ERROR);
  CHECK(std::string(rocp_last_error()).find("null") != std::string::npos);
  CHECK(rocp_experiment_points(nullptr, nullptr) == ROCP_ERROR);
  CHECK(rocp_experiment_run_spectrum(nullptr) == ROCP_ERROR);
  CHECK(rocp_experiment_run_solve(nullptr) == ROCP_ERROR);
  CHECK(rocp_experiment_csv(nullptr) == nullptr);
  CHECK(rocp_experiment_rows(nullptr) == 0);
  CHECK(rocp_experiment_output_path(nullptr) == nullptr);
  CHECK(rocp_experiment_write_outputs(nullptr) == ROCP_ERROR);
  CHECK(rocp_experiment_export_matrices(nullptr, 100, nullptr) == ROCP_ERROR);
  rocp_experiment_destroy(nullptr);
}
