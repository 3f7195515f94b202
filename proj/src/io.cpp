#include "qtelelab/io.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace qtl {

// Generated at configure time from data/.
const std::map<std::string, std::string>& embedded_files();

nlohmann::json matrix_to_json(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");
  int n = 0;
  while ((Eigen::Index{1} << n) < m.rows()) ++n;
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return {{"n", n}, {"re", re}, {"im", im}};
}

Mat matrix_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  if (n < 1 || n > 12) throw std::invalid_argument("matrix JSON: n out of range");
  const auto d = Eigen::Index{1} << n;
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<Eigen::Index>(re.size()) != d * d || static_cast<Eigen::Index>(im.size()) != d * d)
    throw std::invalid_argument("matrix JSON: expected 4^n entries in re and im");
  Mat m(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto k = static_cast<std::size_t>(r * d + c);
      m(r, c) = cplx(re[k].get<double>(), im[k].get<double>());
    }
  return m;
}

nlohmann::json to_json(const DensityOperator& rho) { return matrix_to_json(rho.matrix()); }

DensityOperator density_from_json(const nlohmann::json& j) {
  const Mat m = matrix_from_json(j);
  return {j.at("n").get<int>(), m};
}

bool has_embedded_file(const std::string& path) { return embedded_files().count(path) != 0; }

const std::string& embedded_file(const std::string& path) {
  const auto& files = embedded_files();
  auto it = files.find(path);
  if (it == files.end()) throw std::out_of_range("no embedded data file: " + path);
  return it->second;
}

const nlohmann::json& reference_values() {
  static const nlohmann::json j = nlohmann::json::parse(embedded_file("reference_values.json"));
  return j;
}

Mat fixture_matrix(const std::string& name) {
  return matrix_from_json(nlohmann::json::parse(embedded_file("fixtures/" + name + ".json")));
}

}  // namespace qtl
