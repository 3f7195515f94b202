#pragma once

#include "qtelelab/qcore.hpp"

#include <set>
#include <string>
#include <vector>

namespace qtl {

enum class NoiseModel { AD, PD };

/// Parties whose qubits may decohere in a teleportation run.
enum class Role { Input, Alice, Bob };

struct KrausChannel {
  std::vector<Mat> operators;
  NoiseModel label = NoiseModel::AD;
  double rate = 0.0;

  /// Throws unless sum E^dagger E = I within 1e-10.
  void validate() const;
};

KrausChannel kraus_ad(double eta);
KrausChannel kraus_pd(double eta);
KrausChannel kraus(NoiseModel model, double eta);

DensityOperator apply_channel(const DensityOperator& rho, const KrausChannel& ch, const std::vector<int>& targets);

struct NoiseScenario {
  NoiseModel model = NoiseModel::AD;
  double rate = 0.0;
  std::set<Role> exposed;

  NoiseScenario() = default;
  NoiseScenario(NoiseModel m, double eta, std::set<Role> roles);

  /// Parses the command-line triple --noise {ad|pd} --eta <f> --exposed {b|ab|all}.
  static NoiseScenario parse(const std::string& noise, double eta, const std::string& exposed);

  bool exposes(Role r) const { return exposed.count(r) != 0; }
  KrausChannel channel() const { return kraus(model, rate); }
  std::string exposed_label() const;
};

std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string& s);
std::set<Role> exposure_from_label(const std::string& label);

}  // namespace qtl
