#pragma once

#include "qtelelab/channels.hpp"
#include "qtelelab/circuits.hpp"
#include "qtelelab/qcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qtl {

struct SparseTerm {
  Vec basis;  // unit vector of length 2^n
  cplx amplitude;
};

/// An n-qubit state written over m orthonormal vectors.
struct SparseTarget {
  int n = 1;
  std::vector<SparseTerm> terms;

  SparseTarget(int n, std::vector<SparseTerm> terms);
  /// Terms over computational basis labels, e.g. {{"000", a}, {"111", b}}.
  static SparseTarget computational(const std::vector<std::pair<std::string, cplx>>& terms);
  static SparseTarget from_indices(int n, const std::vector<std::pair<std::size_t, cplx>>& terms);

  std::size_t m() const { return terms.size(); }
  Vec amplitudes() const;
  StateVector state() const { return {n, amplitudes()}; }
};

struct CompressionPlan {
  Mat U;
  int m_prime = 0;
  /// y_i as computational indices, one per supplied term.
  std::vector<std::size_t> y_basis;
};

int compute_m_prime(const SparseTarget& t);
CompressionPlan build_compression_plan(const SparseTarget& t);

/// Bob's correction for a given shared Bell channel and sender outcome (reverse-EPR bits).
Mat tel_u(Bell channel, int smo);
std::string tel_u_name(Bell channel, int smo);

struct TeleportBranch {
  std::vector<Bell> outcomes;
  std::vector<std::string> corrections;
  double probability = 0.0;
  double fidelity = 0.0;
  DensityOperator received;
};

struct TeleportTranscript {
  std::size_t m = 0;
  int m_prime = 0;
  Bell channel = Bell::PsiPlus;
  std::vector<TeleportBranch> branches;
  double fidelity = 0.0;      // probability-weighted
  double min_fidelity = 1.0;  // over branches with nonzero probability

  int bell_pairs() const { return m_prime; }
};

struct TeleportResult {
  DensityOperator received;  // branch average
  TeleportTranscript transcript;
};

/// Noise roles: Input acts on the compressed register, Alice and Bob on their halves of the pairs.
TeleportResult teleport_sparse(const SparseTarget& t, const std::optional<NoiseScenario>& noise = std::nullopt,
                               Bell channel = Bell::PsiPlus);
TeleportResult teleport_two_qubit_arbitrary(const StateVector& s);
TeleportResult standard_single_qubit_teleport(const StateVector& s, Bell channel);

/// CNOT a->e..h, then CNOT a->d, CNOT a->b, SWAP b,c on wires a..h = 0..7.
Circuit eight_qubit_compressor();
StateVector eight_qubit_state(cplx alpha, cplx beta, cplx gamma, cplx delta);
TeleportResult eight_qubit_pipeline(cplx alpha, cplx beta, cplx gamma, cplx delta);

/// Single-qubit gates on q0, then CNOT, H, CNOT; prepares the two-unknown state of the hardware run.
Circuit ch2_preparation_circuit();
/// CNOT(0->1) H(0) CNOT(0->1): sends the prepared state to alpha|00> + beta|10>.
Circuit ch2_compression_circuit();
StateVector ch2_state();
/// The same state over the basis {(|00>+|11>)/sqrt2, (|01>-|10>)/sqrt2}.
SparseTarget ch2_target();

}  // namespace qtl
