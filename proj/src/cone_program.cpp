#include "cran/cone_program.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cran/errors.hpp"

namespace cran {

using nlohmann::json;

void ConeProgram::validate() const {
  cone.validate();
  if (b.size() != A.rows()) throw InvalidArgument("b has length " + std::to_string(b.size()) +
                                                  ", expected m = " + std::to_string(A.rows()));
  if (c.size() != A.cols()) throw InvalidArgument("c has length " + std::to_string(c.size()) +
                                                  ", expected n = " + std::to_string(A.cols()));
  if (cone.total_dim() != A.rows())
    throw InvalidArgument("cone dimension " + std::to_string(cone.total_dim()) +
                          " does not match m = " + std::to_string(A.rows()));
  if (!b.allFinite() || !c.allFinite()) throw InvalidArgument("b or c contains non-finite values");
  for (double v : A.values())
    if (!std::isfinite(v)) throw InvalidArgument("A contains non-finite values");
}

bool ConeProgram::operator==(const ConeProgram& o) const {
  if (!(cone == o.cone) || !(A == o.A)) return false;
  if (b.size() != o.b.size() || c.size() != o.c.size()) return false;
  return std::memcmp(b.data(), o.b.data(), sizeof(double) * b.size()) == 0 &&
         std::memcmp(c.data(), o.c.data(), sizeof(double) * c.size()) == 0;
}

namespace {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("cone program JSON: missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("cone program JSON: bad value for '") + key + "': " + e.what());
  }
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ConeProgram program_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("cone program JSON: ") + e.what());
  }
  const int m = required<int>(j, "m");
  const int n = required<int>(j, "n");
  const json& a = j.contains("A") ? j.at("A") : throw InvalidArgument("cone program JSON: missing key 'A'");
  const auto rows = required<std::vector<int>>(a, "rows");
  const auto cols = required<std::vector<int>>(a, "cols");
  const auto vals = required<std::vector<double>>(a, "vals");
  if (rows.size() != cols.size() || rows.size() != vals.size())
    throw InvalidArgument("cone program JSON: A.rows, A.cols, A.vals differ in length");

  std::vector<Triplet> trips;
  trips.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) trips.push_back({rows[i], cols[i], vals[i]});

  ConeProgram prog;
  prog.A = CscMatrix::from_triplets(m, n, trips);
  prog.b = to_vec(required<std::vector<double>>(j, "b"));
  prog.c = to_vec(required<std::vector<double>>(j, "c"));
  const json& cone = j.contains("cone") ? j.at("cone") : throw InvalidArgument("cone program JSON: missing key 'cone'");
  prog.cone.zero_dim = cone.value("zero", 0);
  prog.cone.nonneg_dim = cone.value("nonneg", 0);
  prog.cone.soc_dims = cone.value("soc", std::vector<int>{});
  prog.validate();
  return prog;
}

std::string program_to_json(const ConeProgram& prog) {
  json j;
  j["m"] = prog.m();
  j["n"] = prog.n();
  std::vector<int> rows, cols;
  const auto& cp = prog.A.col_ptr();
  for (int col = 0; col < prog.n(); ++col)
    for (int p = cp[col]; p < cp[col + 1]; ++p) {
      rows.push_back(prog.A.row_idx()[p]);
      cols.push_back(col);
    }
  j["A"] = {{"rows", rows}, {"cols", cols}, {"vals", prog.A.values()}};
  j["b"] = std::vector<double>(prog.b.data(), prog.b.data() + prog.b.size());
  j["c"] = std::vector<double>(prog.c.data(), prog.c.data() + prog.c.size());
  j["cone"] = {{"zero", prog.cone.zero_dim},
               {"nonneg", prog.cone.nonneg_dim},
               {"soc", prog.cone.soc_dims}};
  // nlohmann serializes doubles with round-trip precision.
  return j.dump();
}

ConeProgram read_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open cone program file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return program_from_json(ss.str());
}

void write_program_file(const ConeProgram& prog, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write cone program file: " + path);
  out << program_to_json(prog) << '\n';
}

}  // namespace cran
