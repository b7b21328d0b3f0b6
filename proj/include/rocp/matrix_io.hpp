// SPDX-License-Identifier: Apache-2.0
//
// Matrix Market serialization. Sparse matrices use the coordinate format
// (1-based indices), dense matrices the array format. Values are written
// with 17 significant digits so round trips are exact.

#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "rocp/fem.hpp"

namespace rocp {

void write_matrix_market(std::ostream& os, const SparseMat& m);
void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& m);
void write_matrix_market(const std::string& path, const SparseMat& m);
void write_matrix_market(const std::string& path, const Eigen::MatrixXd& m);

SparseMat read_matrix_market_sparse(std::istream& is);
Eigen::MatrixXd read_matrix_market_dense(std::istream& is);
SparseMat read_matrix_market_sparse(const std::string& path);
Eigen::MatrixXd read_matrix_market_dense(const std::string& path);

}  // namespace rocp
