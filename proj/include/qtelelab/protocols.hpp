#pragma once

#include "qtelelab/qcore.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qtl {

enum class PartyRole { Alice, Bob, Charlie };
std::string to_string(PartyRole r);

struct PartyScript {
  PartyRole role = PartyRole::Alice;
  std::vector<int> message;  // bits; empty for a pure controller
  double decoy_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate(bool needs_message) const;
};

struct EveModel {
  enum class Kind { None, InterceptResend };
  enum class Basis { RandomBB84, Computational };
  Kind kind = Kind::None;
  Basis basis = Basis::RandomBB84;
  std::uint64_t seed = 0;
  std::vector<std::string> legs;  // e.g. "C->A"; empty means every leg
};

struct ProtocolConfig {
  double qber_threshold = 0.11;
  bool withhold_disclosure = false;                // CQD: Charlie never announces the preparation basis
  std::array<char, 3> rotation_axes{'X', 'X', 'X'};  // five-stage: Charlie, Alice, Bob
  double rotation_scale = 1.0;                     // five-stage: 0 turns every rotation off
};

struct Frame {
  std::string leg;
  std::size_t message_qubits = 0;
  std::size_t decoys = 0;
  std::vector<std::size_t> decoy_positions;  // disclosed after the shuffled string arrives
};

struct DecoyCheck {
  std::string leg;
  std::size_t checked = 0;
  std::size_t errors = 0;
  double rate() const { return checked ? static_cast<double>(errors) / static_cast<double>(checked) : 0.0; }
};

struct ProtocolTrace {
  std::string protocol;
  std::vector<std::string> events;
  std::vector<Frame> frames;
  std::vector<DecoyCheck> checks;
  double qber = 0.0;
  bool abort = false;
  std::vector<int> decoded_by_alice;  // Bob's message as recovered by Alice
  std::vector<int> decoded_by_bob;    // Alice's message as recovered by Bob

  std::size_t decoys_checked() const;
  std::size_t decoy_errors() const;
};

ProtocolTrace run_qd(const PartyScript& alice, const PartyScript& bob, const EveModel& eve,
                     const ProtocolConfig& cfg = {});
ProtocolTrace run_cqd_single(const PartyScript& alice, const PartyScript& bob, const PartyScript& charlie,
                             const EveModel& eve, const ProtocolConfig& cfg = {});
ProtocolTrace run_cqd_five_stage(const PartyScript& alice, const PartyScript& bob, const PartyScript& charlie,
                                 const EveModel& eve, const ProtocolConfig& cfg = {});
ProtocolTrace run_cdsqc_swap(const PartyScript& alice, const PartyScript& bob, const PartyScript& charlie,
                             const EveModel& eve = {}, const ProtocolConfig& cfg = {});

/// Charlie's four-qubit resource state on (2', 3', 1, 4).
StateVector cdsqc_resource_state();

struct CdsqcBranch {
  bool charlie_minus = false;
  int alice_bit = 0;
  Bell b1 = Bell::PsiPlus;  // Bell outcome on (A1, 1)
  Bell b2 = Bell::PsiPlus;  // Bell outcome on (A2, 4)
  double p_bob0 = 0.0;      // conditioned on Charlie's outcome and Alice's bit
  double p_bob1 = 0.0;
};

/// All 2 x 2 x 16 (Charlie, Alice, Bell pair) combinations by statevector enumeration.
std::vector<CdsqcBranch> cdsqc_enumerate();
/// Alice's bit from the announced outcomes and Bob's computational-basis bit.
int cdsqc_decode(bool charlie_minus, Bell b1, Bell b2, int bob_bit);

double bit_accuracy(const std::vector<int>& expected, const std::vector<int>& decoded);

nlohmann::json to_json(const ProtocolTrace& t);

}  // namespace qtl
