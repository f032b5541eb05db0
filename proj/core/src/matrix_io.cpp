#include "ambres/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <vector>

namespace ambres {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

MatrixFile read_matrix(std::istream& in) {
  MatrixFile out;
  std::vector<double> values;
  long p = -1;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(t.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string::npos) {
        out.metadata[trim(body.substr(0, colon))] = trim(body.substr(colon + 1));
      }
      continue;
    }
    std::istringstream row(t);
    if (p < 0) {
      if (!(row >> p) || p <= 0) throw Error(ErrorCode::ParseError, "first line must be a positive dimension");
      std::string extra;
      if (row >> extra) throw Error(ErrorCode::ParseError, "unexpected token after dimension");
      continue;
    }
    std::string tok;
    while (row >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "not a number: " + tok);
      }
      if (used != tok.size()) throw Error(ErrorCode::ParseError, "not a number: " + tok);
      values.push_back(v);
    }
  }
  if (p < 0) throw Error(ErrorCode::ParseError, "empty matrix file");
  if (static_cast<long>(values.size()) != p * p) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(p * p) + " entries, found " + std::to_string(values.size()));
  }
  out.entries.resize(p, p);
  for (long i = 0; i < p; ++i)
    for (long j = 0; j < p; ++j) out.entries(i, j) = values[i * p + j];
  return out;
}

MatrixFile read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const Matrix& m, const std::map<std::string, std::string>& metadata) {
  for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << '\n';
  out << m.rows() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

void write_matrix_file(const std::string& path, const Matrix& m,
                       const std::map<std::string, std::string>& metadata) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  write_matrix(out, m, metadata);
}

void write_model_file(const std::string& path, const AmbiguityModel& model,
                      std::map<std::string, std::string> extra) {
  extra["p"] = std::to_string(model.p());
  extra["p0"] = std::to_string(model.p0());
  extra["n0_dim"] = std::to_string(model.n0_dim());
  extra["separability"] = to_string(model.separability());
  write_matrix_file(path, model.form().entries(), extra);
}

AmbiguityModel model_from_file(const MatrixFile& f) {
  auto get = [&](const std::string& key, int fallback) {
    const auto it = f.metadata.find(key);
    if (it == f.metadata.end()) return fallback;
    try {
      return std::stoi(it->second);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "metadata '" + key + "' is not an integer");
    }
  };
  SpdForm form(f.entries);
  const int d = form.dim();
  const int n0 = get("n0_dim", 0);
  Separability sep = n0 == 0 ? Separability::Separable : Separability::Nonseparable;
  if (const auto it = f.metadata.find("separability"); it != f.metadata.end()) {
    if (it->second == "separable") {
      sep = Separability::Separable;
    } else if (it->second == "intermediate") {
      sep = Separability::Intermediate;
    } else if (it->second == "nonseparable") {
      sep = Separability::Nonseparable;
    } else {
      throw Error(ErrorCode::ParseError, "unknown separability '" + it->second + "'");
    }
  }
  return AmbiguityModel(std::move(form), get("p", d), get("p0", n0), sep, n0);
}

AmbiguityModel read_model_file(const std::string& path) { return model_from_file(read_matrix_file(path)); }

}  // namespace ambres
