// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the library exclusively through the C API
// so it doubles as a smoke test for the shared-library boundary.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "rocp.h"

namespace {

// Exit codes: 0 ok, 1 internal error, 2 invalid config, 3 non-convergence
// under --strict.
int exit_code_for(rocp_status status, bool strict) {
  switch (status) {
    case ROCP_OK:
      return 0;
    case ROCP_INVALID_CONFIG:
      return 2;
    case ROCP_NOT_CONVERGED:
      return strict ? 3 : 0;
    default:
      return 1;
  }
}

int fail(rocp_status status, bool strict = true) {
  std::fprintf(stderr, "error: %s\n", rocp_last_error());
  return exit_code_for(status, strict);
}

struct Handle {
  rocp_experiment* exp = nullptr;
  ~Handle() { rocp_experiment_destroy(exp); }
};

int open_config(const std::string& path, Handle& handle) {
  const rocp_status status = rocp_experiment_create_from_file(path.c_str(), &handle.exp);
  if (status != ROCP_OK) return fail(status);
  return 0;
}

// Shared body of `spectrum` and `solve`: run, then either print the CSV to
// stdout (no output configured) or write the configured files.
int report(const Handle& handle, rocp_status run_status, bool strict, bool has_output) {
  if (run_status != ROCP_OK && run_status != ROCP_NOT_CONVERGED) return fail(run_status);
  if (run_status == ROCP_NOT_CONVERGED)
    std::fprintf(stderr, "warning: %s\n", rocp_last_error());
  if (has_output) {
    const rocp_status ws = rocp_experiment_write_outputs(handle.exp);
    if (ws != ROCP_OK) return fail(ws);
    std::printf("wrote %s\n", rocp_experiment_output_path(handle.exp));
  } else {
    std::fputs(rocp_experiment_csv(handle.exp), stdout);
  }
  return exit_code_for(run_status, strict);
}

bool config_has_output(const Handle& handle) {
  const char* path = rocp_experiment_output_path(handle.exp);
  return path != nullptr && path[0] != '\0';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust PDE-constrained control: solves and spectra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rocp_version()));

  std::string config_path;
  bool strict = false;
  int cap = 6000;
  std::string prefix = "matrices";

  auto* validate = app.add_subcommand("validate", "Check a config file and report the sweep size");
  validate->add_option("config", config_path, "JSON config file")->required();

  auto* spectrum = app.add_subcommand("spectrum", "Compute extremal eigenvalues per sweep point");
  spectrum->add_option("config", config_path, "JSON config file")->required();

  auto* solve = app.add_subcommand("solve", "Run preconditioned MINRES per sweep point");
  solve->add_option("config", config_path, "JSON config file")->required();
  solve->add_flag("--strict", strict, "Exit 3 if any sweep point fails to converge");

  auto* exportm = app.add_subcommand("export-matrix", "Write assembled operators as MatrixMarket");
  exportm->add_option("config", config_path, "JSON config file")->required();
  exportm->add_option("--cap", cap, "Refuse to densify matrices larger than this");
  exportm->add_option("--prefix", prefix, "Output file prefix");

  CLI11_PARSE(app, argc, argv);

  Handle handle;
  if (int rc = open_config(config_path, handle); rc != 0) return rc;

  if (validate->parsed()) {
    size_t points = 0;
    const rocp_status status = rocp_experiment_points(handle.exp, &points);
    if (status != ROCP_OK) return fail(status);
    std::printf("ok: %zu sweep point%s\n", points, points == 1 ? "" : "s");
    return 0;
  }
  if (spectrum->parsed()) {
    return report(handle, rocp_experiment_run_spectrum(handle.exp), /*strict=*/false,
                  config_has_output(handle));
  }
  if (solve->parsed()) {
    return report(handle, rocp_experiment_run_solve(handle.exp), strict,
                  config_has_output(handle));
  }
  const rocp_status status = rocp_experiment_export_matrices(handle.exp, cap, prefix.c_str());
  if (status != ROCP_OK) return fail(status);
  std::printf("wrote matrices with prefix %s\n", prefix.c_str());
  return 0;
}
