#include "qtelelab/protocols.hpp"

#include "qtelelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtl {

namespace {

// Streams keep each party's draws independent of every other purpose.
constexpr std::uint64_t kPartyStream = 0x5041525459ULL;
constexpr std::uint64_t kEveStream = 0x455645ULL;
constexpr std::uint64_t kNatureStream = 0x4E4154555245ULL;

Vec ket(int basis, int value) {
  const double s = 1.0 / std::sqrt(2.0);
  Vec v(2);
  if (basis == 0) v << (value ? 0.0 : 1.0), (value ? 1.0 : 0.0);
  else v << s, (value ? -s : s);
  return v;
}

int measure(Vec& q, int basis, CounterRng& rng) {
  const double p0 = std::norm(ket(basis, 0).dot(q));
  const int out = rng.uniform() < p0 ? 0 : 1;
  q = ket(basis, out);
  return out;
}

Mat rotation(char axis, double theta) {
  Mat sigma;
  switch (axis) {
    case 'X': sigma = gates::X(); break;
    case 'Y': sigma = gates::Y(); break;
    case 'Z': sigma = gates::Z(); break;
    default: throw std::invalid_argument("rotation axis must be X, Y or Z");
  }
  return std::cos(theta / 2) * gates::I() - cplx(0, 1) * std::sin(theta / 2) * sigma;
}

std::uint64_t nature_seed(std::initializer_list<std::uint64_t> seeds) {
  std::uint64_t h = 0;
  for (auto s : seeds) h = CounterRng::mix(h ^ s);
  return h;
}

class Session {
 public:
  Session(std::string name, const EveModel& eve, const ProtocolConfig& cfg, std::uint64_t nature)
      : eve_(eve), cfg_(cfg), eve_rng_(eve.seed, kEveStream), nature_(nature, kNatureStream) {
    trace_.protocol = std::move(name);
  }

  CounterRng& nature() { return nature_; }
  Frame& last_frame() { return trace_.frames.back(); }
  void event(std::string e) { trace_.events.push_back(std::move(e)); }

  // Decoys are appended, the string is shuffled, Eve acts, then the sender discloses
  // decoy positions and bases and the receiver measures them.
  void transit(std::vector<Vec>& message, const std::string& leg, CounterRng& sender, double decoy_fraction) {
    const std::size_t L = message.size();
    const auto d = static_cast<std::size_t>(
        std::ceil(static_cast<double>(L) * decoy_fraction / (1.0 - decoy_fraction) - 1e-12));
    std::vector<Vec> string = message;
    std::vector<std::pair<int, int>> prep;
    for (std::size_t i = 0; i < d; ++i) {
      const int basis = sender.bit(), value = sender.bit();
      prep.emplace_back(basis, value);
      string.push_back(ket(basis, value));
    }
    std::vector<std::size_t> perm(string.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[sender.below(i)]);
    std::vector<Vec> wire(string.size());
    for (std::size_t i = 0; i < perm.size(); ++i) wire[i] = string[perm[i]];

    if (eve_attacks(leg))
      for (auto& q : wire) {
        const int basis = eve_.basis == EveModel::Basis::Computational ? 0 : static_cast<int>(eve_rng_.bit());
        measure(q, basis, eve_rng_);
      }

    Frame frame{leg, L, d, {}};
    DecoyCheck check{leg, 0, 0};
    for (std::size_t i = 0; i < wire.size(); ++i) {
      if (perm[i] < L) {
        message[perm[i]] = wire[i];
        continue;
      }
      frame.decoy_positions.push_back(i);
      const auto [basis, value] = prep[perm[i] - L];
      ++check.checked;
      if (measure(wire[i], basis, nature_) != value) ++check.errors;
    }
    trace_.frames.push_back(std::move(frame));
    trace_.checks.push_back(check);
    event("transit " + leg + " + decoy check");
  }

  // Computes the QBER and applies the abort policy; returns false on abort.
  bool conclude() {
    const auto checked = trace_.decoys_checked();
    trace_.qber = checked ? static_cast<double>(trace_.decoy_errors()) / static_cast<double>(checked) : 0.0;
    trace_.abort = trace_.qber > cfg_.qber_threshold;
    if (trace_.abort) event("abort: QBER above threshold");
    return !trace_.abort;
  }

  ProtocolTrace finish(std::vector<int> by_alice, std::vector<int> by_bob) {
    if (conclude()) {
      trace_.decoded_by_alice = std::move(by_alice);
      trace_.decoded_by_bob = std::move(by_bob);
    }
    return std::move(trace_);
  }

 private:
  bool eve_attacks(const std::string& leg) const {
    if (eve_.kind == EveModel::Kind::None) return false;
    return eve_.legs.empty() || std::find(eve_.legs.begin(), eve_.legs.end(), leg) != eve_.legs.end();
  }

  EveModel eve_;
  ProtocolConfig cfg_;
  CounterRng eve_rng_;
  CounterRng nature_;
  ProtocolTrace trace_;
};

void require_equal_lengths(const PartyScript& a, const PartyScript& b) {
  a.validate(true);
  b.validate(true);
  if (a.message.size() != b.message.size()) throw std::invalid_argument("message length mismatch");
}

bool psi_type(Bell b) { return b == Bell::PsiPlus || b == Bell::PsiMinus; }

}  // namespace

std::string to_string(PartyRole r) {
  switch (r) {
    case PartyRole::Alice: return "Alice";
    case PartyRole::Bob: return "Bob";
    case PartyRole::Charlie: return "Charlie";
  }
  return "?";
}

void PartyScript::validate(bool needs_message) const {
  if (!(decoy_fraction > 0.0 && decoy_fraction < 1.0)) throw std::invalid_argument("decoy fraction must lie in (0,1)");
  if (needs_message && message.empty()) throw std::invalid_argument("message must contain at least one bit");
  for (int b : message)
    if (b != 0 && b != 1) throw std::invalid_argument("message bits must be 0 or 1");
}

std::size_t ProtocolTrace::decoys_checked() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.checked;
  return n;
}

std::size_t ProtocolTrace::decoy_errors() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.errors;
  return n;
}

ProtocolTrace run_qd(const PartyScript& alice, const PartyScript& bob, const EveModel& eve,
                     const ProtocolConfig& cfg) {
  require_equal_lengths(alice, bob);
  const std::size_t L = alice.message.size();
  CounterRng ra(alice.seed, kPartyStream), rb(bob.seed, kPartyStream + 1);
  Session s("qd", eve, cfg, nature_seed({alice.seed, bob.seed}));

  std::vector<int> basis(L), value(L);
  std::vector<Vec> q(L);
  for (std::size_t i = 0; i < L; ++i) {
    basis[i] = ra.bit();
    value[i] = ra.bit();
    q[i] = ket(basis[i], value[i]);
    if (alice.message[i]) q[i] = gates::iY() * q[i];
  }
  s.event("Alice prepares BB84 string and encodes with I/iY");
  s.transit(q, "A->B", ra, alice.decoy_fraction);
  for (std::size_t i = 0; i < L; ++i)
    if (bob.message[i]) q[i] = gates::iY() * q[i];
  s.event("Bob encodes with I/iY");
  s.transit(q, "B->A", rb, bob.decoy_fraction);

  std::vector<int> by_alice(L), by_bob(L);
  for (std::size_t i = 0; i < L; ++i) {
    const int o = measure(q[i], basis[i], s.nature());
    by_alice[i] = o ^ value[i] ^ alice.message[i];
    by_bob[i] = (o ^ value[i]) ^ bob.message[i];
  }
  s.event("Alice measures in her preparation basis and announces o xor v");
  return s.finish(std::move(by_alice), std::move(by_bob));
}

ProtocolTrace run_cqd_single(const PartyScript& alice, const PartyScript& bob, const PartyScript& charlie,
                             const EveModel& eve, const ProtocolConfig& cfg) {
  require_equal_lengths(alice, bob);
  charlie.validate(false);
  const std::size_t L = alice.message.size();
  CounterRng ra(alice.seed, kPartyStream), rb(bob.seed, kPartyStream + 1), rc(charlie.seed, kPartyStream + 2);
  Session s("cqd", eve, cfg, nature_seed({alice.seed, bob.seed, charlie.seed}));

  std::vector<int> basis(L), value(L);
  std::vector<Vec> q(L);
  for (std::size_t i = 0; i < L; ++i) {
    basis[i] = rc.bit();
    value[i] = rc.bit();
    q[i] = ket(basis[i], value[i]);
  }
  s.event("Charlie prepares BB84 string");
  s.transit(q, "C->A", rc, charlie.decoy_fraction);
  for (std::size_t i = 0; i < L; ++i)
    if (alice.message[i]) q[i] = gates::iY() * q[i];
  s.event("Alice encodes with I/iY");
  s.transit(q, "A->B", ra, alice.decoy_fraction);
  for (std::size_t i = 0; i < L; ++i)
    if (bob.message[i]) q[i] = gates::iY() * q[i];
  s.event("Bob encodes with I/iY");

  std::vector<int> by_alice(L), by_bob(L);
  if (!cfg.withhold_disclosure) {
    s.event("Charlie discloses preparation basis and value");
    for (std::size_t i = 0; i < L; ++i) {
      const int o = measure(q[i], basis[i], s.nature());
      by_alice[i] = o ^ value[i] ^ alice.message[i];
      by_bob[i] = o ^ value[i] ^ bob.message[i];
    }
    s.event("Bob measures in the disclosed basis and announces the outcome");
  } else {
    s.event("Charlie withholds disclosure");
    for (std::size_t i = 0; i < L; ++i) {
      const int o = measure(q[i], static_cast<int>(rb.bit()), s.nature());
      by_alice[i] = o ^ static_cast<int>(ra.bit()) ^ alice.message[i];
      by_bob[i] = o ^ static_cast<int>(rb.bit()) ^ bob.message[i];
    }
    s.event("Bob measures in a guessed basis; both parties guess the preparation value");
  }
  return s.finish(std::move(by_alice), std::move(by_bob));
}

ProtocolTrace run_cqd_five_stage(const PartyScript& alice, const PartyScript& bob, const PartyScript& charlie,
                                 const EveModel& eve, const ProtocolConfig& cfg) {
  require_equal_lengths(alice, bob);
  charlie.validate(false);
  const auto& ax = cfg.rotation_axes;
  if (ax[0] != ax[1] || ax[1] != ax[2]) throw std::invalid_argument("rotations about different axes do not commute");
  if (ax[0] != 'X') throw std::invalid_argument("rotations must be about X to commute with the I/X encoding");
  const std::size_t L = alice.message.size();
  CounterRng ra(alice.seed, kPartyStream), rb(bob.seed, kPartyStream + 1), rc(charlie.seed, kPartyStream + 2);
  Session s("cqd5", eve, cfg, nature_seed({alice.seed, bob.seed, charlie.seed}));

  auto angle = [&](CounterRng& r) { return cfg.rotation_scale * 2.0 * kPi * r.uniform(); };
  std::vector<int> value(L);
  std::vector<Mat> uc(L), ua(L), ub(L);
  std::vector<Vec> q(L);
  for (std::size_t i = 0; i < L; ++i) {
    value[i] = rc.bit();
    uc[i] = rotation(ax[0], angle(rc));
    q[i] = uc[i] * ket(0, value[i]);
  }
  s.event("Charlie prepares computational-basis string and rotates it");
  s.transit(q, "C->A", rc, charlie.decoy_fraction);
  for (std::size_t i = 0; i < L; ++i) {
    ua[i] = rotation(ax[1], angle(ra));
    q[i] = ua[i] * q[i];
  }
  s.event("Alice rotates");
  s.transit(q, "A->B", ra, alice.decoy_fraction);
  for (std::size_t i = 0; i < L; ++i) {
    ub[i] = rotation(ax[2], angle(rb));
    q[i] = ub[i] * q[i];
  }
  s.event("Bob rotates");
  s.transit(q, "B->C", rb, bob.decoy_fraction);
  for (std::size_t i = 0; i < L; ++i) q[i] = uc[i].adjoint() * q[i];
  s.event("Charlie undoes his rotation");
  s.transit(q, "C->A", rc, charlie.decoy_fraction);
  for (std::size_t i = 0; i < L; ++i) {
    q[i] = ua[i].adjoint() * q[i];
    if (alice.message[i]) q[i] = gates::X() * q[i];
  }
  s.event("Alice undoes her rotation and encodes with I/X");
  s.transit(q, "A->B", ra, alice.decoy_fraction);

  std::vector<int> by_alice(L), by_bob(L);
  for (std::size_t i = 0; i < L; ++i) {
    q[i] = ub[i].adjoint() * q[i];
    if (bob.message[i]) q[i] = gates::X() * q[i];
    const int o = measure(q[i], 0, s.nature());
    by_alice[i] = o ^ value[i] ^ alice.message[i];
    by_bob[i] = o ^ value[i] ^ bob.message[i];
  }
  s.event("Bob undoes his rotation, encodes with I/X, measures and announces");
  s.event("Charlie reveals the initial states");
  return s.finish(std::move(by_alice), std::move(by_bob));
}

StateVector cdsqc_resource_state() {
  const StateVector plus = StateVector::normalized(1, ket(1, 0)), minus = StateVector::normalized(1, ket(1, 1));
  const StateVector z0 = StateVector::basis(1, 0), z1 = StateVector::basis(1, 1);
  const StateVector psi = bell_state(Bell::PsiPlus), phi = bell_state(Bell::PhiPlus);
  Vec v = tensor(plus, tensor(z0, psi)).amplitudes() + tensor(plus, tensor(z1, phi)).amplitudes() +
          tensor(minus, tensor(z0, phi)).amplitudes() + tensor(minus, tensor(z1, psi)).amplitudes();
  return StateVector(4, 0.5 * v);
}

namespace {

// Wires: 0 = A1, 1 = A2, 2 = Charlie (2'), 3 = Bob (3'), 4 = qubit 1, 5 = qubit 4.
// Joint probabilities indexed by [charlie_minus][b1][b2][bob].
using CdsqcJoint = std::array<std::array<std::array<std::array<double, 2>, 4>, 4>, 2>;

CdsqcJoint cdsqc_joint(int alice_bit) {
  StateVector pair = bell_state(Bell::PsiPlus);
  if (alice_bit) pair = apply_unitary(pair, gates::X(), {1});
  const Vec full = tensor(pair, cdsqc_resource_state()).amplitudes();
  const Mat pc[2] = {ket(1, 0) * ket(1, 0).adjoint(), ket(1, 1) * ket(1, 1).adjoint()};
  CdsqcJoint j{};
  for (int c = 0; c < 2; ++c) {
    Vec vc = full;
    kernel::left(vc, 6, pc[c], {2});
    for (int b1 = 0; b1 < 4; ++b1) {
      Vec v1 = vc;
      kernel::left(v1, 6, bell_projector(kAllBell[b1]), {0, 4});
      for (int b2 = 0; b2 < 4; ++b2) {
        Vec v2 = v1;
        kernel::left(v2, 6, bell_projector(kAllBell[b2]), {1, 5});
        for (int z = 0; z < 2; ++z) {
          Vec v3 = v2;
          kernel::left(v3, 6, computational_projectors(1)[static_cast<std::size_t>(z)], {3});
          j[c][b1][b2][z] = v3.squaredNorm();
        }
      }
    }
  }
  return j;
}

}  // namespace

std::vector<CdsqcBranch> cdsqc_enumerate() {
  std::vector<CdsqcBranch> out;
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a) {
      const CdsqcJoint j = cdsqc_joint(a);
      double pc = 0.0;
      for (const auto& r1 : j[c])
        for (const auto& r2 : r1) pc += r2[0] + r2[1];
      for (int b1 = 0; b1 < 4; ++b1)
        for (int b2 = 0; b2 < 4; ++b2)
          out.push_back({c == 1, a, kAllBell[b1], kAllBell[b2], j[c][b1][b2][0] / pc, j[c][b1][b2][1] / pc});
    }
  return out;
}

int cdsqc_decode(bool charlie_minus, Bell b1, Bell b2, int bob_bit) {
  return bob_bit ^ static_cast<int>(psi_type(b1) != psi_type(b2)) ^ static_cast<int>(charlie_minus);
}

ProtocolTrace run_cdsqc_swap(const PartyScript& alice, const PartyScript& bob, const PartyScript& charlie,
                             const EveModel& eve, const ProtocolConfig& cfg) {
  alice.validate(true);
  bob.validate(false);
  charlie.validate(false);
  const std::size_t L = alice.message.size();
  CounterRng rc(charlie.seed, kPartyStream + 2);
  Session s("cdsqc", eve, cfg, nature_seed({alice.seed, bob.seed, charlie.seed}));

  // Resource qubits 1, 4 go to Alice and 3' to Bob; their decoys are checked per leg.
  s.event("Charlie prepares four-qubit resource states");
  std::vector<Vec> decoy_only;
  s.transit(decoy_only, "C->A", rc, charlie.decoy_fraction);
  s.last_frame().message_qubits = 2 * L;
  s.transit(decoy_only, "C->B", rc, charlie.decoy_fraction);
  s.last_frame().message_qubits = L;
  s.event("Alice encodes with I/X on her Bell pair");

  const CdsqcJoint joint[2] = {cdsqc_joint(0), cdsqc_joint(1)};
  std::vector<int> by_bob(L);
  for (std::size_t i = 0; i < L; ++i) {
    const auto& j = joint[alice.message[i]];
    double u = s.nature().uniform(), acc = 0.0;
    int c = 1, b1 = 3, b2 = 3, z = 1;
    for (int ci = 0; ci < 2; ++ci)
      for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
          for (int zi = 0; zi < 2; ++zi) {
            acc += j[ci][x][y][zi];
            if (u < acc) {
              c = ci, b1 = x, b2 = y, z = zi;
              u = 2.0;
            }
          }
    by_bob[i] = cdsqc_decode(c == 1, kAllBell[b1], kAllBell[b2], z);
  }
  s.event("Alice double Bell measurement, Charlie X-basis and Bob Z-basis measurements announced");
  return s.finish({}, std::move(by_bob));
}

double bit_accuracy(const std::vector<int>& expected, const std::vector<int>& decoded) {
  if (expected.size() != decoded.size() || expected.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) ok += expected[i] == decoded[i];
  return static_cast<double>(ok) / static_cast<double>(expected.size());
}

nlohmann::json to_json(const ProtocolTrace& t) {
  auto bits = [](const std::vector<int>& v) {
    std::string s;
    for (int b : v) s += static_cast<char>('0' + b);
    return s;
  };
  nlohmann::json frames = nlohmann::json::array(), checks = nlohmann::json::array();
  for (const auto& f : t.frames)
    frames.push_back({{"leg", f.leg},
                      {"message_qubits", f.message_qubits},
                      {"decoys", f.decoys},
                      {"decoy_positions", f.decoy_positions}});
  for (const auto& c : t.checks)
    checks.push_back({{"leg", c.leg}, {"checked", c.checked}, {"errors", c.errors}, {"rate", c.rate()}});
  return {{"protocol", t.protocol},
          {"events", t.events},
          {"frames", frames},
          {"decoy_checks", checks},
          {"qber", t.qber},
          {"abort", t.abort},
          {"decoded", {{"alice", bits(t.decoded_by_alice)}, {"bob", bits(t.decoded_by_bob)}}}};
}

}  // namespace qtl
