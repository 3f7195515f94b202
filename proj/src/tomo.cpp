#include "qtelelab/tomo.hpp"

#include "qtelelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtl {

namespace {

std::string outcome_bits(std::size_t v, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if ((v >> (n - 1 - i)) & 1U) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

std::vector<std::string> words(const std::string& alphabet, int n) {
  std::vector<std::string> out{""};
  for (int q = 0; q < n; ++q) {
    std::vector<std::string> next;
    for (const auto& w : out)
      for (char c : alphabet) next.push_back(w + c);
    out = std::move(next);
  }
  return out;
}

std::uint64_t setting_stream(const MeasurementSetting& s) {
  std::uint64_t h = 0;
  for (char c : s.bases) h = h * 4 + static_cast<std::uint64_t>(c == 'X' ? 1 : c == 'Y' ? 2 : 3);
  return h;
}

}  // namespace

std::vector<MeasurementSetting> settings_for(int n) {
  if (n < 1) throw std::invalid_argument("settings_for needs n >= 1");
  std::vector<MeasurementSetting> out;
  for (auto& w : words("XYZ", n)) out.push_back({w});
  return out;
}

CountsRecord simulate_counts(const DensityOperator& rho, const MeasurementSetting& s, std::uint64_t shots,
                             std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be positive");
  if (s.n() != rho.n()) throw std::invalid_argument("setting width does not match the state");
  Mat m = rho.matrix();
  for (int q = 0; q < s.n(); ++q) {
    const char b = s.bases[static_cast<std::size_t>(q)];
    std::vector<Mat> ops;
    if (b == 'X') ops = {gates::H()};
    else if (b == 'Y') ops = {gates::Sdg(), gates::H()};
    else if (b != 'Z') throw std::invalid_argument("measurement basis must be X, Y or Z");
    for (const Mat& u : ops) {
      kernel::left(m, s.n(), u, {q});
      kernel::right_adjoint(m, s.n(), u, {q});
    }
  }
  std::vector<double> cdf(static_cast<std::size_t>(m.rows()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    acc += std::max(0.0, m(i, i).real());
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  CountsRecord rec{s, shots, {}};
  CounterRng rng(seed, setting_stream(s));
  for (std::uint64_t k = 0; k < shots; ++k) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++rec.histogram[outcome_bits(static_cast<std::size_t>(it - cdf.begin()), s.n())];
  }
  return rec;
}

std::vector<CountsRecord> simulate_all(const DensityOperator& rho, std::uint64_t shots, std::uint64_t seed) {
  std::vector<CountsRecord> out;
  for (const auto& s : settings_for(rho.n())) out.push_back(simulate_counts(rho, s, shots, seed));
  return out;
}

std::vector<std::string> pauli_strings(int n) {
  auto all = words("IXYZ", n);
  all.erase(all.begin());
  return all;
}

Mat pauli_matrix(const std::string& p) {
  Mat m = Mat::Identity(1, 1);
  for (char c : p) {
    switch (c) {
      case 'I': m = kron(m, gates::I()); break;
      case 'X': m = kron(m, gates::X()); break;
      case 'Y': m = kron(m, gates::Y()); break;
      case 'Z': m = kron(m, gates::Z()); break;
      default: throw std::invalid_argument("Pauli label must be I, X, Y or Z");
    }
  }
  return m;
}

std::map<std::string, double> exact_expectations(const DensityOperator& rho) {
  std::map<std::string, double> out;
  for (const auto& p : pauli_strings(rho.n())) out[p] = (rho.matrix() * pauli_matrix(p)).trace().real();
  return out;
}

std::map<std::string, double> expectations_from_counts(const std::vector<CountsRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no counts records");
  const int n = records.front().setting.n();
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& rec : records) {
    std::uint64_t total = 0;
    for (const auto& [_, c] : rec.histogram) total += c;
    if (total != rec.shots) throw std::invalid_argument("histogram does not sum to shots");
    for (const auto& p : pauli_strings(n)) {
      bool ok = true;
      for (int q = 0; q < n && ok; ++q) {
        const char c = p[static_cast<std::size_t>(q)];
        ok = c == 'I' || c == rec.setting.bases[static_cast<std::size_t>(q)];
      }
      if (!ok) continue;
      double e = 0.0;
      for (const auto& [bits, c] : rec.histogram) {
        int parity = 0;
        for (int q = 0; q < n; ++q)
          if (p[static_cast<std::size_t>(q)] != 'I' && bits[static_cast<std::size_t>(q)] == '1') parity ^= 1;
        e += (parity ? -1.0 : 1.0) * static_cast<double>(c);
      }
      auto& slot = acc[p];
      slot.first += e / static_cast<double>(rec.shots);
      slot.second += 1;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [p, v] : acc) out[p] = v.first / v.second;
  return out;
}

Reconstruction reconstruct(const std::map<std::string, double>& expectations, int n, bool project_psd) {
  const auto d = Eigen::Index{1} << n;
  Mat rho = Mat::Identity(d, d);
  for (const auto& p : pauli_strings(n)) {
    auto it = expectations.find(p);
    if (it == expectations.end()) throw std::invalid_argument("missing expectation for " + p);
    rho += it->second * pauli_matrix(p);
  }
  rho /= static_cast<double>(d);
  rho = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  Reconstruction r{rho, es.eigenvalues().minCoeff(), true};
  r.psd = r.min_eigenvalue >= -1e-9;
  if (project_psd && !r.psd) {
    Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
    w /= w.sum();
    r.rho = es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    r.min_eigenvalue = w.minCoeff();
    r.psd = true;
  }
  return r;
}

Deviations deviations(const Mat& rhoT, const Mat& rhoE) {
  if (rhoT.rows() != rhoE.rows() || rhoT.cols() != rhoE.cols())
    throw std::invalid_argument("deviations: dimension mismatch");
  const Eigen::MatrixXd diff = (rhoT - rhoE).cwiseAbs();
  return {diff.mean(), diff.maxCoeff()};
}

nlohmann::json to_json(const CountsRecord& c) {
  nlohmann::json h = nlohmann::json::object();
  for (const auto& [k, v] : c.histogram) h[k] = v;
  return {{"setting", c.setting.bases}, {"shots", c.shots}, {"histogram", h}};
}

CountsRecord counts_from_json(const nlohmann::json& j) {
  CountsRecord c{{j.at("setting").get<std::string>()}, j.at("shots").get<std::uint64_t>(), {}};
  for (const auto& [k, v] : j.at("histogram").items()) c.histogram[k] = v.get<std::uint64_t>();
  return c;
}

}  // namespace qtl
