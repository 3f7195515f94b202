#include "qtelelab/channels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtl {

void KrausChannel::validate() const {
  if (operators.empty()) throw std::invalid_argument("Kraus channel has no operators");
  Mat sum = Mat::Zero(2, 2);
  for (const Mat& e : operators) {
    if (e.rows() != 2 || e.cols() != 2) throw std::invalid_argument("Kraus operators must be 2x2");
    sum += e.adjoint() * e;
  }
  if ((sum - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() > kBuildTol)
    throw std::invalid_argument("Kraus operators are not trace preserving");
}

namespace {
void check_rate(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("decoherence rate must lie in [0,1]");
}
}  // namespace

KrausChannel kraus_ad(double eta) {
  check_rate(eta);
  Mat e0 = Mat::Zero(2, 2), e1 = Mat::Zero(2, 2);
  e0(0, 0) = 1;
  e0(1, 1) = std::sqrt(1 - eta);
  e1(0, 1) = std::sqrt(eta);
  return {{e0, e1}, NoiseModel::AD, eta};
}

KrausChannel kraus_pd(double eta) {
  check_rate(eta);
  Mat e0 = Mat::Zero(2, 2), e1 = Mat::Zero(2, 2);
  e0(0, 0) = 1;
  e0(1, 1) = std::sqrt(1 - eta);
  e1(1, 1) = std::sqrt(eta);
  return {{e0, e1}, NoiseModel::PD, eta};
}

KrausChannel kraus(NoiseModel model, double eta) {
  return model == NoiseModel::AD ? kraus_ad(eta) : kraus_pd(eta);
}

DensityOperator apply_channel(const DensityOperator& rho, const KrausChannel& ch, const std::vector<int>& targets) {
  ch.validate();
  if (targets.empty()) return rho;
  kernel::check_targets(rho.n(), targets);
  Mat m = rho.matrix();
  for (int t : targets) {
    Mat acc = Mat::Zero(m.rows(), m.cols());
    for (const Mat& e : ch.operators) {
      Mat term = m;
      kernel::left(term, rho.n(), e, {t});
      kernel::right_adjoint(term, rho.n(), e, {t});
      acc += term;
    }
    m = 0.5 * (acc + acc.adjoint());
  }
  return {rho.n(), m};
}

NoiseScenario::NoiseScenario(NoiseModel m, double eta, std::set<Role> roles)
    : model(m), rate(eta), exposed(std::move(roles)) {
  check_rate(eta);
  if (exposed.empty()) throw std::invalid_argument("noise scenario must expose at least one role");
}

std::string to_string(NoiseModel m) { return m == NoiseModel::AD ? "AD" : "PD"; }

NoiseModel noise_model_from_string(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "ad") return NoiseModel::AD;
  if (l == "pd") return NoiseModel::PD;
  throw std::invalid_argument("unknown noise model: " + s);
}

std::set<Role> exposure_from_label(const std::string& label) {
  if (label == "b") return {Role::Bob};
  if (label == "ab") return {Role::Alice, Role::Bob};
  if (label == "all") return {Role::Input, Role::Alice, Role::Bob};
  throw std::invalid_argument("unknown exposure label: " + label);
}

NoiseScenario NoiseScenario::parse(const std::string& noise, double eta, const std::string& exposed) {
  return {noise_model_from_string(noise), eta, exposure_from_label(exposed)};
}

std::string NoiseScenario::exposed_label() const {
  if (exposed == std::set<Role>{Role::Bob}) return "b";
  if (exposed == std::set<Role>{Role::Alice, Role::Bob}) return "ab";
  if (exposed == std::set<Role>{Role::Input, Role::Alice, Role::Bob}) return "all";
  std::string s;
  if (exposes(Role::Input)) s += "i";
  if (exposes(Role::Alice)) s += "a";
  if (exposes(Role::Bob)) s += "b";
  return s;
}

}  // namespace qtl
