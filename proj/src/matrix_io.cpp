// SPDX-License-Identifier: Apache-2.0

#include "rocp/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "rocp/errors.hpp"

namespace rocp {

namespace {

void open_or_throw(std::ofstream& os, const std::string& path) {
  os.open(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
}

void skip_comments(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') return;
  }
  throw Error("matrix market stream ended before data");
}

}  // namespace

void write_matrix_market(std::ostream& os, const SparseMat& m) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  os << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it)
      os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& m) {
  os << "%%MatrixMarket matrix array real general\n";
  os << m.rows() << " " << m.cols() << "\n";
  os << std::setprecision(17);
  // Array format is column-major.
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      os << m(i, j) << "\n";
}

void write_matrix_market(const std::string& path, const SparseMat& m) {
  std::ofstream os;
  open_or_throw(os, path);
  write_matrix_market(os, m);
}

void write_matrix_market(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream os;
  open_or_throw(os, path);
  write_matrix_market(os, m);
}

SparseMat read_matrix_market_sparse(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.find("coordinate") == std::string::npos)
    throw Error("expected a matrix market coordinate header");
  std::string line;
  skip_comments(is, line);
  std::istringstream dims(line);
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  dims >> rows >> cols >> nnz;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nnz);
  for (Eigen::Index k = 0; k < nnz; ++k) {
    Eigen::Index i = 0, j = 0;
    double v = 0;
    if (!(is >> i >> j >> v)) throw Error("matrix market stream truncated");
    trip.emplace_back(i - 1, j - 1, v);
  }
  SparseMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

Eigen::MatrixXd read_matrix_market_dense(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.find("array") == std::string::npos)
    throw Error("expected a matrix market array header");
  std::string line;
  skip_comments(is, line);
  std::istringstream dims(line);
  Eigen::Index rows = 0, cols = 0;
  dims >> rows >> cols;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      if (!(is >> m(i, j))) throw Error("matrix market stream truncated");
  return m;
}

SparseMat read_matrix_market_sparse(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_matrix_market_sparse(is);
}

Eigen::MatrixXd read_matrix_market_dense(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_matrix_market_dense(is);
}

}  // namespace rocp
