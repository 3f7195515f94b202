#pragma once

#include "qtelelab/qcore.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qtl {

/// One basis label per qubit, qubit 0 first, e.g. "XZY".
struct MeasurementSetting {
  std::string bases;

  int n() const { return static_cast<int>(bases.size()); }
  bool operator==(const MeasurementSetting& o) const { return bases == o.bases; }
};

struct CountsRecord {
  MeasurementSetting setting;
  std::uint64_t shots = 0;
  std::map<std::string, std::uint64_t> histogram;
};

/// All 3^n settings, X < Y < Z, qubit 0 varying slowest.
std::vector<MeasurementSetting> settings_for(int n);

/// Rotates into the Z basis (H for X; S^dagger then H for Y) and samples `shots` outcomes.
CountsRecord simulate_counts(const DensityOperator& rho, const MeasurementSetting& s, std::uint64_t shots,
                             std::uint64_t seed);
std::vector<CountsRecord> simulate_all(const DensityOperator& rho, std::uint64_t shots, std::uint64_t seed);

/// Pauli strings over {I,X,Y,Z}; the all-identity string is omitted.
std::vector<std::string> pauli_strings(int n);
Mat pauli_matrix(const std::string& p);
std::map<std::string, double> exact_expectations(const DensityOperator& rho);
/// Each Pauli string is averaged over every setting that measures its non-identity factors.
std::map<std::string, double> expectations_from_counts(const std::vector<CountsRecord>& records);

struct Reconstruction {
  Mat rho;
  double min_eigenvalue = 0.0;
  bool psd = true;  // min eigenvalue >= -1e-9
};

/// rho = 2^-n (I + sum_P c_P P). With project_psd, negative eigenvalues are clipped and the trace restored.
Reconstruction reconstruct(const std::map<std::string, double>& expectations, int n, bool project_psd = false);

struct Deviations {
  double avg = 0.0;
  double max = 0.0;
};
/// Elementwise modulus of the difference: mean and maximum.
Deviations deviations(const Mat& rhoT, const Mat& rhoE);

nlohmann::json to_json(const CountsRecord& c);
CountsRecord counts_from_json(const nlohmann::json& j);

}  // namespace qtl
