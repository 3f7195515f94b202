#include "qtelelab/circuits.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace qtl;

TEST_CASE("CNOT matrix and qubit order") {
  Circuit c(2);
  c.cnot(0, 1);
  Mat expect = Mat::Zero(4, 4);
  expect(0, 0) = expect(1, 1) = expect(2, 3) = expect(3, 2) = 1;
  CHECK((unitary_of(c) - expect).norm() < 1e-12);
}

TEST_CASE("circuit text round trip and inverse") {
  Circuit c(3);
  c.h(0).cnot(0, 2).add(GateKind::T, {1}).add(GateKind::P, {2}, 0.25).swap(1, 2).add(GateKind::Sdg, {0});
  const Circuit back = Circuit::parse(c.to_text(), 3);
  CHECK(back.gates() == c.gates());
  Circuit both = c;
  both.append(c.inverse());
  CHECK(equal_up_to_phase(unitary_of(both), Mat::Identity(8, 8), 1e-12));
  CHECK(Circuit::parse("# comment\ncx 0 1\nh 1\n").size() == 2);
  CHECK_THROWS(Circuit::parse("FOO 0"));
  CHECK_THROWS(Circuit::parse("CNOT 0 0"));
}

TEST_CASE("reversed CNOT implements the original gate with the opposite orientation") {
  const Circuit r = reverse_cnot(Gate::make(GateKind::CNOT, {0, 1}), 2);
  Circuit original(2);
  original.cnot(0, 1);
  CHECK(equal_up_to_phase(unitary_of(r), unitary_of(original), 1e-12));
  for (const Gate& g : r.gates())
    if (g.kind == GateKind::CNOT) CHECK(g.qubits == std::vector<int>{1, 0});
}

TEST_CASE("peephole removes cancelling neighbours only") {
  Circuit c(2);
  c.h(0).h(0).cnot(0, 1).cnot(0, 1).add(GateKind::S, {1}).add(GateKind::Sdg, {1}).x(1);
  const Circuit p = peephole(c);
  CHECK(p.size() == 1);
  Circuit keep(2);
  keep.cnot(0, 1).cnot(1, 0);
  CHECK(peephole(keep).size() == 2);
  Circuit nested(2);
  nested.h(0).x(1).h(0);
  CHECK(peephole(nested).size() == 1);
  CHECK(equal_up_to_phase(unitary_of(peephole(nested)), unitary_of(nested), 1e-12));
}

TEST_CASE("coupling map shortest paths and parsing") {
  const CouplingMap m = CouplingMap::qx2_old();
  CHECK(m.allows(0, 1));
  CHECK(!m.allows(1, 0));
  CHECK(m.adjacent(1, 0));
  const auto p = m.shortest_path(0, 4);
  CHECK(p.size() == 3);
  const CouplingMap parsed = CouplingMap::parse("qubits 3\n0 1\n1->2\n");
  CHECK(parsed.n == 3);
  CHECK(parsed.allows(1, 2));
  CHECK_THROWS(CouplingMap::named("nope"));
}

TEST_CASE("routing respects the coupling map and preserves the unitary") {
  for (const char* name : {"qx2old", "qx2new", "qx4old", "qx4new"}) {
    const CouplingMap m = CouplingMap::named(name);
    for (const Circuit& c : {parity_circuit(), phase_circuit(), combined_circuit()}) {
      const RoutedCircuit r = route(c, m);
      CHECK(r.legal_on(m));
      CHECK(routed_equivalent(c, r, 1e-8));
      const RoutedCircuit best = route_best_layout(c, m);
      CHECK(best.legal_on(m));
      CHECK(routed_equivalent(c, best, 1e-8));
      CHECK(best.circuit.size() <= r.circuit.size());
    }
  }
}

TEST_CASE("routing a long-range CNOT inserts swaps") {
  Circuit c(5);
  c.cnot(1, 3).h(3).cnot(4, 0);
  const CouplingMap m = CouplingMap::qx2_old();
  const RoutedCircuit r = route(c, m, std::vector<int>{0, 1, 2, 3, 4});
  CHECK(r.legal_on(m));
  CHECK(routed_equivalent(c, r, 1e-8));
  CHECK(r.circuit.size() > c.size());
}

TEST_CASE("Bell discrimination outcomes are deterministic and nondestructive") {
  std::set<std::string> combined;
  for (Bell b : kAllBell) {
    for (Discriminator d : {Discriminator::Parity, Discriminator::Phase, Discriminator::Combined}) {
      const DiscriminationResult res = run_discrimination(b, d);
      REQUIRE(res.strings.size() == 1);
      CHECK(std::abs(res.strings.begin()->second - 1.0) < 1e-10);
      CHECK(std::abs(res.nondestructive_fidelity - 1.0) < 1e-10);
      if (d == Discriminator::Combined) combined.insert(res.ancilla_outcomes.begin()->first);
    }
    const std::string bits = run_discrimination(b, Discriminator::Parity).strings.begin()->first;
    CHECK(bits.substr(0, 2) == std::string{char('0' + (bell_bits(b) >> 1)), char('0' + (bell_bits(b) & 1))});
  }
  CHECK(combined.size() == 4);
}

TEST_CASE("parity ancilla flags phi, phase ancilla flags the minus sign") {
  auto anc = [](Bell b, Discriminator d) { return run_discrimination(b, d).ancilla_outcomes.begin()->first; };
  CHECK(anc(Bell::PsiPlus, Discriminator::Parity) == "0");
  CHECK(anc(Bell::PhiMinus, Discriminator::Parity) == "1");
  CHECK(anc(Bell::PsiMinus, Discriminator::Phase) == "1");
  CHECK(anc(Bell::PhiPlus, Discriminator::Phase) == "0");
}

TEST_CASE("noisy discrimination degrades fidelity") {
  const auto res = run_discrimination(Bell::PsiPlus, Discriminator::Parity, NoiseScenario::parse("ad", 0.3, "ab"));
  CHECK(res.nondestructive_fidelity < 1.0 - 1e-3);
  double total = 0;
  for (const auto& [_, p] : res.strings) total += p;
  CHECK(std::abs(total - 1.0) < 1e-10);
}

TEST_CASE("CQDE resource state: product and Bell expansions agree") {
  // Wires: 0 = 2', 1 = photon 1, 2 = 3', 3 = photon 4; H = |0>, V = |1>.
  const double r = 1 / std::sqrt(2.0);
  const StateVector H = StateVector::basis(1, 0), V = StateVector::basis(1, 1);
  const StateVector P = StateVector::normalized(1, test::ket({r, r})), M = StateVector::normalized(1, test::ket({r, -r}));
  auto t4 = [](const StateVector& a, const StateVector& b, const StateVector& c, const StateVector& d) {
    return tensor(a, tensor(b, tensor(c, d))).amplitudes();
  };
  const Vec product = t4(P, H, H, P) + t4(P, H, V, M) + t4(P, V, H, P) - t4(P, V, V, M) + t4(M, H, H, P) -
                      t4(M, H, V, M) + t4(M, V, H, P) + t4(M, V, V, M);
  // |x>_{2'} |y>_{3'} |Bell>_{14}: reorder the Bell pair around wire 2.
  auto bell_form = [&](const StateVector& x, const StateVector& y, Bell b) {
    const Vec full = tensor(x, tensor(bell_state(b), y)).amplitudes();  // 2', 1, 4, 3'
    Circuit sw(4);
    sw.swap(2, 3);
    return run(sw, StateVector(4, full)).amplitudes();
  };
  const Vec bell = bell_form(P, P, Bell::PsiPlus) + bell_form(P, M, Bell::PhiPlus) + bell_form(M, P, Bell::PhiPlus) +
                   bell_form(M, M, Bell::PsiPlus);
  CHECK(std::abs(std::abs(product.normalized().dot(bell.normalized())) - 1.0) < 1e-12);
}
