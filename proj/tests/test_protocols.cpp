#include "qtelelab/protocols.hpp"
#include "qtelelab/io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace qtl;

namespace {

std::vector<int> bits(std::size_t n, std::uint64_t seed) {
  CounterRng r(seed);
  std::vector<int> v(n);
  for (auto& b : v) b = r.bit();
  return v;
}

PartyScript party(PartyRole role, std::vector<int> msg, std::uint64_t seed, double f = 0.5) {
  return {role, std::move(msg), f, seed};
}

// Born-rule enumeration over prep basis, prep value, Eve basis and Eve outcome.
double intercept_resend_error_oracle() {
  double err = 0;
  const double r = 1 / std::sqrt(2.0);
  auto ket = [&](int basis, int v) { return basis == 0 ? test::ket({v ? 0.0 : 1.0, v ? 1.0 : 0.0}) : test::ket({r, v ? -r : r}); };
  for (int pb = 0; pb < 2; ++pb)
    for (int pv = 0; pv < 2; ++pv)
      for (int eb = 0; eb < 2; ++eb)
        for (int eo = 0; eo < 2; ++eo) {
          const double p_eve = std::norm(ket(eb, eo).dot(ket(pb, pv)));
          const double p_wrong = std::norm(ket(pb, 1 - pv).dot(ket(eb, eo)));
          err += 0.25 * 0.5 * p_eve * p_wrong;
        }
  return err;
}

}  // namespace

TEST_CASE("QD decodes both messages without Eve") {
  const auto t = run_qd(party(PartyRole::Alice, {1, 0, 1, 1}, 1), party(PartyRole::Bob, {0, 1, 1, 0}, 2), {});
  CHECK(t.decoded_by_bob == std::vector<int>{1, 0, 1, 1});
  CHECK(t.decoded_by_alice == std::vector<int>{0, 1, 1, 0});
  CHECK(t.qber == 0.0);
  CHECK(!t.abort);
}

TEST_CASE("all protocols decode exactly without Eve") {
  const auto a = bits(300, 10), b = bits(300, 11);
  const PartyScript alice = party(PartyRole::Alice, a, 3), bob = party(PartyRole::Bob, b, 4),
                    charlie = party(PartyRole::Charlie, {}, 5);
  for (const ProtocolTrace& t : {run_qd(alice, bob, {}), run_cqd_single(alice, bob, charlie, {}),
                                 run_cqd_five_stage(alice, bob, charlie, {})}) {
    CHECK(t.decoded_by_bob == a);
    CHECK(t.decoded_by_alice == b);
    CHECK(t.qber == 0.0);
  }
  const auto cd = run_cdsqc_swap(alice, party(PartyRole::Bob, {}, 4), charlie);
  CHECK(cd.decoded_by_bob == a);
}

TEST_CASE("decoy counts follow the decoy fraction") {
  const auto t = run_qd(party(PartyRole::Alice, bits(90, 1), 1, 0.25), party(PartyRole::Bob, bits(90, 2), 2, 0.25), {});
  REQUIRE(t.frames.size() == 2);
  CHECK(t.frames[0].decoys == 30);
  CHECK(t.frames[0].decoy_positions.size() == 30);
  std::set<std::size_t> pos(t.frames[0].decoy_positions.begin(), t.frames[0].decoy_positions.end());
  CHECK(pos.size() == 30);
  CHECK(*pos.rbegin() < 120);
}

TEST_CASE("intercept-resend detection matches the Born-rule oracle") {
  CHECK(std::abs(intercept_resend_error_oracle() - 0.25) < 1e-12);
  EveModel eve{EveModel::Kind::InterceptResend, EveModel::Basis::RandomBB84, 99, {}};
  const auto t = run_qd(party(PartyRole::Alice, bits(2000, 1), 1), party(PartyRole::Bob, bits(2000, 2), 2), eve);
  CHECK(t.decoys_checked() >= 4000);
  CHECK(std::abs(t.qber - 0.25) < 0.02);
  CHECK(t.abort);
  CHECK(t.decoded_by_alice.empty());
  CHECK(t.decoded_by_bob.empty());
}

TEST_CASE("Eve on a single leg is seen only on that leg") {
  EveModel eve{EveModel::Kind::InterceptResend, EveModel::Basis::RandomBB84, 5, {"C->A"}};
  const auto t = run_cqd_single(party(PartyRole::Alice, bits(2000, 1), 1), party(PartyRole::Bob, bits(2000, 2), 2),
                                party(PartyRole::Charlie, {}, 3), eve);
  REQUIRE(t.checks.size() == 2);
  CHECK(std::abs(t.checks[0].rate() - 0.25) < 0.03);
  CHECK(t.checks[1].errors == 0);
}

TEST_CASE("QBER below the threshold does not abort") {
  EveModel eve{EveModel::Kind::InterceptResend, EveModel::Basis::RandomBB84, 5, {}};
  ProtocolConfig cfg;
  cfg.qber_threshold = 0.5;
  const auto t = run_qd(party(PartyRole::Alice, bits(200, 1), 1), party(PartyRole::Bob, bits(200, 2), 2), eve, cfg);
  CHECK(!t.abort);
  CHECK(t.decoded_by_bob.size() == 200);
}

TEST_CASE("CQD without Charlie's disclosure is a coin toss") {
  const auto a = bits(2000, 7), b = bits(2000, 8);
  ProtocolConfig cfg;
  cfg.withhold_disclosure = true;
  const auto t = run_cqd_single(party(PartyRole::Alice, a, 1), party(PartyRole::Bob, b, 2),
                                party(PartyRole::Charlie, {}, 3), {}, cfg);
  const double sigma = std::sqrt(0.25 / 2000.0);
  CHECK(bit_accuracy(a, t.decoded_by_bob) <= 0.5 + 3 * sigma);
  CHECK(bit_accuracy(b, t.decoded_by_alice) <= 0.5 + 3 * sigma);
  CHECK(bit_accuracy(a, t.decoded_by_bob) >= 0.5 - 3 * sigma);
}

TEST_CASE("five-stage protocol") {
  const auto a = bits(200, 1), b = bits(200, 2);
  ProtocolConfig zero;
  zero.rotation_scale = 0.0;
  const auto relay = run_cqd_five_stage(party(PartyRole::Alice, a, 1), party(PartyRole::Bob, b, 2),
                                        party(PartyRole::Charlie, {}, 3), {}, zero);
  CHECK(relay.decoded_by_bob == a);
  CHECK(relay.frames.size() == 5);
  ProtocolConfig mixed;
  mixed.rotation_axes = {'Y', 'X', 'Y'};
  CHECK_THROWS(run_cqd_five_stage(party(PartyRole::Alice, a, 1), party(PartyRole::Bob, b, 2),
                                  party(PartyRole::Charlie, {}, 3), {}, mixed));
  ProtocolConfig about_y;
  about_y.rotation_axes = {'Y', 'Y', 'Y'};
  CHECK_THROWS(run_cqd_five_stage(party(PartyRole::Alice, a, 1), party(PartyRole::Bob, b, 2),
                                  party(PartyRole::Charlie, {}, 3), {}, about_y));
  // A computational-basis Eve disturbs the rotated message qubits.
  EveModel eve{EveModel::Kind::InterceptResend, EveModel::Basis::Computational, 4, {"A->B"}};
  ProtocolConfig lax;
  lax.qber_threshold = 1.0;
  const auto t = run_cqd_five_stage(party(PartyRole::Alice, a, 1), party(PartyRole::Bob, b, 2),
                                    party(PartyRole::Charlie, {}, 3), eve, lax);
  CHECK(bit_accuracy(a, t.decoded_by_bob) < 0.95);
}

TEST_CASE("five-stage rotations leave intermediate states away from the prepared state") {
  // R_y(theta) |0> keeps |<0|.>|^2 = cos^2(theta/2); averaged over theta this is 1/2.
  CounterRng rng(3);
  double mean = 0;
  for (int i = 0; i < 4000; ++i) mean += std::pow(std::cos(kPi * rng.uniform()), 2);
  CHECK(std::abs(mean / 4000 - 0.5) < 0.02);
}

TEST_CASE("traces are reproducible byte for byte") {
  EveModel eve{EveModel::Kind::InterceptResend, EveModel::Basis::RandomBB84, 17, {}};
  auto run = [&] {
    return to_json(run_cqd_single(party(PartyRole::Alice, bits(50, 1), 1), party(PartyRole::Bob, bits(50, 2), 2),
                                  party(PartyRole::Charlie, {}, 3), eve))
        .dump();
  };
  CHECK(run() == run());
}

TEST_CASE("invalid scripts are rejected") {
  CHECK_THROWS(run_qd(party(PartyRole::Alice, {1, 0}, 1), party(PartyRole::Bob, {1}, 2), {}));
  CHECK_THROWS(run_qd(party(PartyRole::Alice, {}, 1), party(PartyRole::Bob, {}, 2), {}));
  CHECK_THROWS(run_qd(party(PartyRole::Alice, {1}, 1, 1.0), party(PartyRole::Bob, {1}, 2), {}));
  CHECK_THROWS(run_qd(party(PartyRole::Alice, {2}, 1), party(PartyRole::Bob, {1}, 2), {}));
}

TEST_CASE("CDSQC enumeration reproduces the printed outcome sets") {
  const auto branches = cdsqc_enumerate();
  REQUIRE(branches.size() == 64);
  const auto& ref = reference_values().at("cdsqc");
  for (const auto& c : ref.at("cases")) {
    const bool minus = c.at("charlie").get<std::string>() == "-";
    const int a = c.at("alice").get<int>();
    std::set<std::pair<std::string, std::string>> bob0, bob1;
    for (const auto& p : c.at("bob0")) bob0.insert({p[0].get<std::string>(), p[1].get<std::string>()});
    for (const auto& p : c.at("bob1")) bob1.insert({p[0].get<std::string>(), p[1].get<std::string>()});
    for (const auto& br : branches) {
      if (br.charlie_minus != minus || br.alice_bit != a) continue;
      const std::pair key{to_string(br.b1), to_string(br.b2)};
      CHECK(std::abs(br.p_bob0 - (bob0.count(key) ? 0.125 : 0.0)) < 1e-12);
      CHECK(std::abs(br.p_bob1 - (bob1.count(key) ? 0.125 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("CDSQC decode rule agrees with every nonzero branch") {
  for (const auto& br : cdsqc_enumerate()) {
    if (br.p_bob0 > 0) CHECK(cdsqc_decode(br.charlie_minus, br.b1, br.b2, 0) == br.alice_bit);
    if (br.p_bob1 > 0) CHECK(cdsqc_decode(br.charlie_minus, br.b1, br.b2, 1) == br.alice_bit);
  }
  CHECK(cdsqc_decode(false, Bell::PsiPlus, Bell::PsiPlus, 0) == 0);
  CHECK(cdsqc_decode(true, Bell::PsiPlus, Bell::PhiPlus, 1) == 1);
}

TEST_CASE("CDSQC resource state in the diagonal frame of Bob's qubit") {
  const double r = 1 / std::sqrt(2.0);
  const StateVector P(1, test::ket({r, r})), M(1, test::ket({r, -r}));
  const StateVector psi = bell_state(Bell::PsiPlus), phi = bell_state(Bell::PhiPlus);
  const Vec optical = 0.5 * (tensor(P, tensor(P, psi)).amplitudes() + tensor(P, tensor(M, phi)).amplitudes() +
                             tensor(M, tensor(P, phi)).amplitudes() + tensor(M, tensor(M, psi)).amplitudes());
  const StateVector rotated = apply_unitary(cdsqc_resource_state(), gates::H(), {1});
  CHECK(std::abs(std::abs(rotated.amplitudes().dot(optical)) - 1.0) < 1e-12);
}
