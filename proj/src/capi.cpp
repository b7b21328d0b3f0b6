// SPDX-License-Identifier: Apache-2.0

#include "rocp.h"

#include <algorithm>
#include <memory>
#include <string>

#include "rocp/errors.hpp"
#include "rocp/experiment.hpp"

struct rocp_experiment {
  rocp::ExperimentConfig config;
  rocp::ExperimentResult result;
  std::string csv;
  bool has_result = false;
};

namespace {

thread_local std::string g_last_error;

// User-input failures map to ROCP_INVALID_CONFIG, everything else to
// ROCP_ERROR. Runs any callable and translates exceptions to a status.
template <typename Fn>
rocp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ROCP_OK;
  } catch (const rocp::ConfigError& e) {
    g_last_error = e.what();
    return ROCP_INVALID_CONFIG;
  } catch (const rocp::SizeCapExceeded& e) {
    g_last_error = e.what();
    return ROCP_INVALID_CONFIG;
  } catch (const rocp::BudgetExceeded& e) {
    g_last_error = e.what();
    return ROCP_INVALID_CONFIG;
  } catch (const rocp::TruncationTooLarge& e) {
    g_last_error = e.what();
    return ROCP_INVALID_CONFIG;
  } catch (const rocp::DimensionMismatch& e) {
    g_last_error = e.what();
    return ROCP_INVALID_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ROCP_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return ROCP_ERROR;
  }
}

rocp_status null_argument(const char* what) {
  g_last_error = std::string(what) + ": null argument";
  return ROCP_ERROR;
}

bool all_rows_converged(const rocp::ExperimentResult& result) {
  const auto it = std::find(result.columns.begin(), result.columns.end(), "converged");
  if (it == result.columns.end()) return true;
  const std::size_t at = static_cast<std::size_t>(it - result.columns.begin());
  return std::all_of(result.rows.begin(), result.rows.end(),
                     [at](const std::vector<std::string>& row) { return row[at] == "true"; });
}

}  // namespace

extern "C" {

const char* rocp_version(void) { return "0.1.0"; }

const char* rocp_last_error(void) { return g_last_error.c_str(); }

rocp_status rocp_experiment_create(const char* config_json, rocp_experiment** out) {
  if (!config_json || !out) return null_argument("rocp_experiment_create");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<rocp_experiment>();
    handle->config = rocp::validate_config(config_json);
    *out = handle.release();
  });
}

rocp_status rocp_experiment_create_from_file(const char* path, rocp_experiment** out) {
  if (!path || !out) return null_argument("rocp_experiment_create_from_file");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<rocp_experiment>();
    handle->config = rocp::load_config(path);
    *out = handle.release();
  });
}

void rocp_experiment_destroy(rocp_experiment* exp) { delete exp; }

rocp_status rocp_experiment_points(const rocp_experiment* exp, size_t* out) {
  if (!exp || !out) return null_argument("rocp_experiment_points");
  return guarded([&] { *out = rocp::expand_sweep(exp->config).size(); });
}

const char* rocp_experiment_output_path(const rocp_experiment* exp) {
  if (!exp) return nullptr;
  return exp->config.output.c_str();
}

rocp_status rocp_experiment_run_spectrum(rocp_experiment* exp) {
  if (!exp) return null_argument("rocp_experiment_run_spectrum");
  return guarded([&] {
    exp->result = rocp::run_spectrum_experiment(exp->config);
    exp->csv = exp->result.csv();
    exp->has_result = true;
  });
}

rocp_status rocp_experiment_run_solve(rocp_experiment* exp) {
  if (!exp) return null_argument("rocp_experiment_run_solve");
  const rocp_status status = guarded([&] {
    exp->result = rocp::run_solve_experiment(exp->config);
    exp->csv = exp->result.csv();
    exp->has_result = true;
  });
  if (status != ROCP_OK) return status;
  if (!all_rows_converged(exp->result)) {
    g_last_error = "one or more sweep points did not converge within maxit";
    return ROCP_NOT_CONVERGED;
  }
  return ROCP_OK;
}

const char* rocp_experiment_csv(const rocp_experiment* exp) {
  if (!exp || !exp->has_result) return nullptr;
  return exp->csv.c_str();
}

size_t rocp_experiment_rows(const rocp_experiment* exp) {
  if (!exp || !exp->has_result) return 0;
  return exp->result.rows.size();
}

rocp_status rocp_experiment_write_outputs(const rocp_experiment* exp) {
  if (!exp) return null_argument("rocp_experiment_write_outputs");
  if (!exp->has_result) {
    g_last_error = "rocp_experiment_write_outputs: nothing has been run yet";
    return ROCP_ERROR;
  }
  return guarded([&] { rocp::write_outputs(exp->config, exp->result); });
}

rocp_status rocp_experiment_export_matrices(const rocp_experiment* exp, int cap,
                                            const char* prefix) {
  if (!exp || !prefix) return null_argument("rocp_experiment_export_matrices");
  return guarded([&] { rocp::export_matrices(exp->config, cap, prefix); });
}

}  // extern "C"
