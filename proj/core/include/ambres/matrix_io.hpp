#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "ambres/decoder.hpp"
#include "ambres/lattice.hpp"

namespace ambres {

// Plain-text matrix: first line p, then p rows of p reals. Lines starting
// with '#' carry "key: value" metadata and may appear anywhere.
struct MatrixFile {
  Matrix entries;
  std::map<std::string, std::string> metadata;
};

MatrixFile read_matrix(std::istream& in);
MatrixFile read_matrix_file(const std::string& path);

void write_matrix(std::ostream& out, const Matrix& m,
                  const std::map<std::string, std::string>& metadata = {});
void write_matrix_file(const std::string& path, const Matrix& m,
                       const std::map<std::string, std::string>& metadata = {});

// Model file: the form plus p, p0, n0_dim and separability metadata. A plain
// matrix without metadata reads as a separable model.
void write_model_file(const std::string& path, const AmbiguityModel& model,
                      std::map<std::string, std::string> extra = {});
AmbiguityModel read_model_file(const std::string& path);
AmbiguityModel model_from_file(const MatrixFile& f);

}  // namespace ambres
