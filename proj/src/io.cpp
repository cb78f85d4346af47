#include "poissparse/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace psr {

using nlohmann::json;

nlohmann::json model_to_json(const AffineRateModel& model) {
  json j;
  j["base_rates"] = std::vector<double>(
      model.base_rates.data(), model.base_rates.data() + model.n());
  json rows = json::array();
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < model.p(); ++c) row.push_back(model.matrix(i, c));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j;
}

AffineRateModel model_from_json(const nlohmann::json& j) {
  auto base = j.at("base_rates").get<std::vector<double>>();
  const auto& rows = j.at("matrix");
  if (!rows.is_array() || rows.empty())
    throw std::invalid_argument("model_from_json: matrix must be a non-empty array");
  Eigen::Index n = Eigen::Index(rows.size());
  Eigen::Index p = Eigen::Index(rows[0].size());
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (Eigen::Index(rows[std::size_t(i)].size()) != p)
      throw std::invalid_argument("model_from_json: ragged matrix rows");
    for (Eigen::Index c = 0; c < p; ++c)
      m(i, c) = rows[std::size_t(i)][std::size_t(c)].get<double>();
  }
  return AffineRateModel(
      Eigen::Map<Eigen::VectorXd>(base.data(), Eigen::Index(base.size())), m);
}

AffineRateModel load_model(const std::string& path) {
  return model_from_json(json::parse(read_file(path)));
}

namespace {

const char* kind_name(MatrixSpec::Kind kind) {
  switch (kind) {
    case MatrixSpec::Kind::Uniform01: return "uniform01";
    case MatrixSpec::Kind::Beta: return "beta";
    case MatrixSpec::Kind::AltDist: return "altdist";
    case MatrixSpec::Kind::ShiftedSubgaussian: return "shifted_subgaussian";
  }
  throw std::logic_error("kind_name: unknown kind");
}

MatrixSpec::Kind kind_from_name(const std::string& name) {
  if (name == "uniform01") return MatrixSpec::Kind::Uniform01;
  if (name == "beta") return MatrixSpec::Kind::Beta;
  if (name == "altdist") return MatrixSpec::Kind::AltDist;
  if (name == "shifted_subgaussian") return MatrixSpec::Kind::ShiftedSubgaussian;
  throw std::invalid_argument("MatrixSpec: unknown kind '" + name + "'");
}

}  // namespace

nlohmann::json matrix_spec_to_json(const MatrixSpec& spec) {
  json j;
  j["kind"] = kind_name(spec.kind);
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["seed"] = spec.seed;
  switch (spec.kind) {
    case MatrixSpec::Kind::Beta:
      j["alpha"] = spec.alpha;
      j["beta"] = spec.beta;
      break;
    case MatrixSpec::Kind::AltDist:
      j["mu"] = spec.mu;
      j["sigma"] = spec.sigma;
      break;
    case MatrixSpec::Kind::ShiftedSubgaussian:
      j["a_wedge"] = spec.a_wedge;
      j["a_vee"] = spec.a_vee;
      break;
    case MatrixSpec::Kind::Uniform01:
      break;
  }
  return j;
}

MatrixSpec matrix_spec_from_json(const nlohmann::json& j) {
  MatrixSpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("n")) spec.n = j.at("n").get<Eigen::Index>();
  if (j.contains("p")) spec.p = j.at("p").get<Eigen::Index>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
  if (j.contains("mu")) spec.mu = j.at("mu").get<double>();
  if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
  if (j.contains("a_wedge")) spec.a_wedge = j.at("a_wedge").get<double>();
  if (j.contains("a_vee")) spec.a_vee = j.at("a_vee").get<double>();
  return spec;
}

std::string format_double(double x) {
  char buf[40];
  // shortest representation that round-trips exactly
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("matrix_from_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("matrix_from_csv: empty input");
  Eigen::MatrixXd m(Eigen::Index(rows.size()), Eigen::Index(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[std::size_t(i)][std::size_t(j)];
  return m;
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  return matrix_from_csv(read_file(path));
}

Eigen::VectorXd load_vector_csv(const std::string& path) {
  Eigen::MatrixXd m = matrix_from_csv(read_file(path));
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw std::invalid_argument("load_vector_csv: expected a single row or column");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace psr
