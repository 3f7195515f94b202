#pragma once

#include "qtelelab/channels.hpp"
#include "qtelelab/qcore.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qtl {

enum class GateKind { X, Y, Z, H, S, Sdg, T, Tdg, P, CNOT, SWAP };

struct Gate {
  GateKind kind = GateKind::X;
  std::vector<int> qubits;
  double param = 0.0;

  static Gate make(GateKind kind, std::vector<int> qubits, double param = 0.0);
  int arity() const;
  Mat matrix() const;
  std::string name() const;
  bool operator==(const Gate& o) const { return kind == o.kind && qubits == o.qubits && param == o.param; }
};

int arity_of(GateKind k);
GateKind gate_kind_from_string(const std::string& name);

class Circuit {
 public:
  explicit Circuit(int n = 1);

  int n() const { return n_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  std::size_t count(GateKind k) const;

  Circuit& add(const Gate& g);
  Circuit& add(GateKind k, std::vector<int> qubits, double param = 0.0);
  Circuit& append(const Circuit& other);
  Circuit& x(int q) { return add(GateKind::X, {q}); }
  Circuit& z(int q) { return add(GateKind::Z, {q}); }
  Circuit& h(int q) { return add(GateKind::H, {q}); }
  Circuit& cnot(int c, int t) { return add(GateKind::CNOT, {c, t}); }
  Circuit& swap(int a, int b) { return add(GateKind::SWAP, {a, b}); }

  Circuit inverse() const;
  /// One gate per line: NAME q0 [q1] [param].
  std::string to_text() const;
  static Circuit parse(const std::string& text, std::optional<int> n = std::nullopt);

 private:
  int n_;
  std::vector<Gate> gates_;
};

struct CouplingMap {
  int n = 0;
  std::set<std::pair<int, int>> edges;

  CouplingMap() = default;
  CouplingMap(int n, std::set<std::pair<int, int>> edges);

  bool allows(int control, int target) const { return edges.count({control, target}) != 0; }
  bool adjacent(int a, int b) const { return allows(a, b) || allows(b, a); }
  std::vector<int> shortest_path(int from, int to) const;

  static CouplingMap qx2_old();
  static CouplingMap qx2_new();
  static CouplingMap qx4_old();
  static CouplingMap qx4_new();
  /// qx2old | qx2new | qx4old | qx4new | file:<path>
  static CouplingMap named(const std::string& spec);
  /// Lines of the form "c t" or "c->t"; an optional "qubits N" line fixes n.
  static CouplingMap parse(const std::string& text);
};

Mat unitary_of(const Circuit& c);
StateVector run(const Circuit& c, const StateVector& psi);
DensityOperator run(const Circuit& c, const DensityOperator& rho);

/// H on both wires, the CNOT with roles exchanged, H on both wires.
Circuit reverse_cnot(const Gate& g, int n);
/// Removes adjacent cancelling pairs until none remain.
Circuit peephole(const Circuit& c);
bool equal_up_to_phase(const Mat& a, const Mat& b, double tol);

struct RoutedCircuit {
  Circuit circuit;
  std::vector<int> initial_layout;  // logical -> physical
  std::vector<int> final_layout;
  std::vector<std::size_t> source;  // index of the input gate each output gate came from

  std::size_t gates_from(std::size_t first, std::size_t last) const;
  bool legal_on(const CouplingMap& m) const;
};

RoutedCircuit route(const Circuit& c, const CouplingMap& m, std::optional<std::vector<int>> initial_layout = std::nullopt);
/// Tries every injective placement of the logical qubits and keeps the shortest result.
RoutedCircuit route_best_layout(const Circuit& c, const CouplingMap& m);
/// Permutation matrix sending logical basis states to physical positions.
Mat layout_permutation(const std::vector<int>& layout);
/// Checks P_final^-1 U_routed P_initial == U_input (input widened with identities) up to phase.
bool routed_equivalent(const Circuit& input, const RoutedCircuit& routed, double tol);

Circuit epr_circuit();
/// Qubits 0,1 system; 2 ancilla.
Circuit parity_circuit();
Circuit phase_circuit();
/// Qubits 0,1 system; 2 phase ancilla; 3 parity ancilla. Phase block first.
Circuit combined_circuit();
inline constexpr std::size_t kCombinedPhaseGates = 4;

enum class Discriminator { Parity, Phase, Combined };

struct DiscriminationResult {
  std::map<std::string, double> ancilla_outcomes;
  /// Reverse-EPR system bits followed by ancilla bits.
  std::map<std::string, double> strings;
  std::map<std::string, DensityOperator> post_states;
  double nondestructive_fidelity = 0.0;
};

/// Noise roles: Alice and Bob map to system qubits 0 and 1, Input to the ancillas.
DiscriminationResult run_discrimination(Bell input, Discriminator which,
                                        const std::optional<NoiseScenario>& noise = std::nullopt);

}  // namespace qtl
