#include "qtelelab/teleport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtl {

namespace {

std::size_t dim_of(int n) { return std::size_t{1} << n; }

Vec basis_vec(int n, std::size_t i) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

std::size_t parse_label(const std::string& bits) {
  std::size_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("basis label must be a bit string: " + bits);
    v = (v << 1) | static_cast<std::size_t>(c - '0');
  }
  return v;
}

}  // namespace

SparseTarget::SparseTarget(int n_, std::vector<SparseTerm> terms_) : n(n_), terms(std::move(terms_)) {
  if (n < 1 || n > 12) throw std::invalid_argument("sparse target needs 1..12 qubits");
  if (terms.empty()) throw std::invalid_argument("sparse target needs at least one term");
  if (terms.size() > dim_of(n)) throw std::invalid_argument("more terms than basis vectors");
  double norm = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Vec& x = terms[i].basis;
    if (static_cast<std::size_t>(x.size()) != dim_of(n)) throw std::invalid_argument("basis vector length must be 2^n");
    if (std::abs(x.squaredNorm() - 1.0) > kBuildTol) throw std::invalid_argument("basis vectors must be unit length");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(terms[j].basis.dot(x)) > kBuildTol) throw std::invalid_argument("basis vectors are not orthogonal");
    norm += std::norm(terms[i].amplitude);
  }
  if (std::abs(norm - 1.0) > kBuildTol) throw std::invalid_argument("amplitudes are not normalized");
}

SparseTarget SparseTarget::computational(const std::vector<std::pair<std::string, cplx>>& terms) {
  if (terms.empty()) throw std::invalid_argument("sparse target needs at least one term");
  const int n = static_cast<int>(terms.front().first.size());
  std::vector<SparseTerm> out;
  for (const auto& [label, a] : terms) {
    if (static_cast<int>(label.size()) != n) throw std::invalid_argument("basis labels differ in length");
    out.push_back({basis_vec(n, parse_label(label)), a});
  }
  return {n, std::move(out)};
}

SparseTarget SparseTarget::from_indices(int n, const std::vector<std::pair<std::size_t, cplx>>& terms) {
  std::vector<SparseTerm> out;
  for (const auto& [i, a] : terms) {
    if (i >= dim_of(n)) throw std::out_of_range("basis index");
    out.push_back({basis_vec(n, i), a});
  }
  return {n, std::move(out)};
}

Vec SparseTarget::amplitudes() const {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
  for (const auto& t : terms) v += t.amplitude * t.basis;
  return v;
}

int compute_m_prime(const SparseTarget& t) {
  int k = 0;
  while ((std::size_t{1} << k) < t.m()) ++k;
  return k;
}

CompressionPlan build_compression_plan(const SparseTarget& t) {
  const std::size_t d = dim_of(t.n);
  std::vector<Vec> xs;
  xs.reserve(d);
  for (const auto& term : t.terms) xs.push_back(term.basis);
  for (std::size_t k = 0; k < d && xs.size() < d; ++k) {
    Vec v = basis_vec(t.n, k);
    for (const Vec& x : xs) v -= x.dot(v) * x;
    for (const Vec& x : xs) v -= x.dot(v) * x;
    const double r = v.norm();
    if (r < 1e-8) continue;
    xs.push_back(v / r);
  }
  if (xs.size() != d) throw std::runtime_error("Gram-Schmidt completion failed");

  CompressionPlan plan;
  plan.m_prime = compute_m_prime(t);
  plan.U = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) plan.U.row(static_cast<Eigen::Index>(i)) = xs[i].adjoint();
  for (std::size_t i = 0; i < t.m(); ++i) plan.y_basis.push_back(i);
  if (!is_unitary(plan.U, 1e-9)) throw std::runtime_error("compression unitary is not unitary");
  return plan;
}

std::string tel_u_name(Bell channel, int smo) {
  static const char* table[4][4] = {
      {"I", "X", "Z", "iY"},
      {"Z", "iY", "I", "X"},
      {"X", "I", "iY", "Z"},
      {"iY", "Z", "X", "I"},
  };
  return table[static_cast<int>(channel)][smo & 3];
}

Mat tel_u(Bell channel, int smo) {
  const std::string name = tel_u_name(channel, smo);
  if (name == "I") return gates::I();
  if (name == "X") return gates::X();
  if (name == "Z") return gates::Z();
  return gates::iY();
}

namespace {

// Wires: data 0..k-1, then (A_j, B_j) = (k+2j, k+2j+1).
int alice_wire(int k, int j) { return k + 2 * j; }
int bob_wire(int k, int j) { return k + 2 * j + 1; }

DensityOperator reduce(const StateVector& s, const std::vector<int>& keep) { return reduced_state(s, keep); }
DensityOperator reduce(const DensityOperator& s, const std::vector<int>& keep) { return partial_trace(s, keep); }

template <class State, class Finish>
void measure_pairs(const State& state, int k, int j, Bell channel, std::vector<Bell>& outcomes, double prob,
                   const Finish& finish) {
  if (j == k) {
    finish(state, outcomes, prob);
    return;
  }
  std::vector<Mat> projectors;
  for (Bell b : kAllBell) projectors.push_back(bell_projector(b));
  const auto branches = measure_projective(state, projectors, {j, alice_wire(k, j)});
  for (std::size_t b = 0; b < branches.size(); ++b) {
    if (!branches[b].state) continue;
    outcomes.push_back(kAllBell[b]);
    measure_pairs(*branches[b].state, k, j + 1, channel, outcomes, prob * branches[b].probability, finish);
    outcomes.pop_back();
  }
}

// Teleports a k-qubit register over k copies of `channel`; `rebuild` turns Bob's corrected
// k-qubit state into the final received state, compared against `target`.
template <class Rebuild>
TeleportTranscript teleport_register(const Vec& psi, int k, Bell channel, const std::optional<NoiseScenario>& noise,
                                     const StateVector& target, const Rebuild& rebuild) {
  TeleportTranscript tr;
  tr.channel = channel;
  tr.m_prime = k;
  StateVector full(k, psi);
  for (int j = 0; j < k; ++j) full = tensor(full, bell_state(channel));

  std::vector<int> bob;
  for (int j = 0; j < k; ++j) bob.push_back(bob_wire(k, j));

  auto finish = [&](const auto& state, const std::vector<Bell>& outcomes, double prob) {
    DensityOperator b = reduce(state, bob);
    std::vector<std::string> names;
    for (int j = 0; j < k; ++j) {
      const int smo = bell_bits(outcomes[static_cast<std::size_t>(j)]);
      b = apply_unitary(b, tel_u(channel, smo), {j});
      names.push_back(tel_u_name(channel, smo));
    }
    TeleportBranch br{outcomes, std::move(names), prob, 0.0, rebuild(b)};
    const double ov = (target.amplitudes().adjoint() * br.received.matrix() * target.amplitudes())(0, 0).real();
    br.fidelity = std::sqrt(std::clamp(ov, 0.0, 1.0));
    tr.branches.push_back(std::move(br));
  };

  std::vector<Bell> outcomes;
  if (!noise) {
    measure_pairs(full, k, 0, channel, outcomes, 1.0, finish);
  } else {
    DensityOperator rho = DensityOperator::from_state(full);
    std::vector<int> targets;
    for (int j = 0; j < k; ++j) {
      if (noise->exposes(Role::Input)) targets.push_back(j);
      if (noise->exposes(Role::Alice)) targets.push_back(alice_wire(k, j));
      if (noise->exposes(Role::Bob)) targets.push_back(bob_wire(k, j));
    }
    rho = apply_channel(rho, noise->channel(), targets);
    measure_pairs(rho, k, 0, channel, outcomes, 1.0, finish);
  }

  tr.fidelity = 0.0;
  tr.min_fidelity = 1.0;
  for (const auto& br : tr.branches) {
    tr.fidelity += br.probability * br.fidelity;
    tr.min_fidelity = std::min(tr.min_fidelity, br.fidelity);
  }
  return tr;
}

DensityOperator branch_average(const TeleportTranscript& tr) {
  Mat acc = Mat::Zero(tr.branches.front().received.matrix().rows(), tr.branches.front().received.matrix().cols());
  double total = 0.0;
  for (const auto& br : tr.branches) {
    acc += br.probability * br.received.matrix();
    total += br.probability;
  }
  acc /= total;
  return {tr.branches.front().received.n(), 0.5 * (acc + acc.adjoint())};
}

}  // namespace

TeleportResult teleport_sparse(const SparseTarget& t, const std::optional<NoiseScenario>& noise, Bell channel) {
  const CompressionPlan plan = build_compression_plan(t);
  const StateVector target = t.state();
  const Vec compressed = plan.U * target.amplitudes();
  const int k = plan.m_prime;
  const std::size_t tail = dim_of(k);
  const Vec head = compressed.head(static_cast<Eigen::Index>(tail));
  if (std::abs(head.squaredNorm() - 1.0) > 1e-9) throw std::runtime_error("compressed state leaks outside the register");

  const Mat udg = plan.U.adjoint();
  auto rebuild = [&](const DensityOperator& bob) {
    Mat full = Mat::Zero(static_cast<Eigen::Index>(dim_of(t.n)), static_cast<Eigen::Index>(dim_of(t.n)));
    full.topLeftCorner(static_cast<Eigen::Index>(tail), static_cast<Eigen::Index>(tail)) = bob.matrix();
    Mat out = udg * full * plan.U;
    return DensityOperator(t.n, 0.5 * (out + out.adjoint()));
  };

  TeleportResult res{DensityOperator::from_state(target), {}};
  if (k == 0) {
    TeleportTranscript tr;
    tr.m = t.m();
    tr.channel = channel;
    // A single known basis vector: Bob prepares U^dagger|0...0> locally.
    const StateVector local(t.n, udg.col(0));
    TeleportBranch br{{}, {}, 1.0, 0.0, DensityOperator::from_state(local)};
    br.fidelity = overlap(local, target);
    tr.fidelity = tr.min_fidelity = br.fidelity;
    tr.branches.push_back(std::move(br));
    res.received = tr.branches.front().received;
    res.transcript = std::move(tr);
    return res;
  }

  res.transcript = teleport_register(head, k, channel, noise, target, rebuild);
  res.transcript.m = t.m();
  res.received = branch_average(res.transcript);
  return res;
}

TeleportResult teleport_two_qubit_arbitrary(const StateVector& s) {
  if (s.n() != 2) throw std::invalid_argument("expected a two-qubit state");
  auto rebuild = [](const DensityOperator& bob) { return bob; };
  TeleportResult res{DensityOperator::from_state(s), {}};
  res.transcript = teleport_register(s.amplitudes(), 2, Bell::PsiPlus, std::nullopt, s, rebuild);
  res.transcript.m = 4;
  res.received = branch_average(res.transcript);
  return res;
}

TeleportResult standard_single_qubit_teleport(const StateVector& s, Bell channel) {
  if (s.n() != 1) throw std::invalid_argument("expected a single-qubit state");
  auto rebuild = [](const DensityOperator& bob) { return bob; };
  TeleportResult res{DensityOperator::from_state(s), {}};
  res.transcript = teleport_register(s.amplitudes(), 1, channel, std::nullopt, s, rebuild);
  res.transcript.m = 2;
  res.received = branch_average(res.transcript);
  return res;
}

Circuit eight_qubit_compressor() {
  Circuit c(8);
  for (int q = 4; q < 8; ++q) c.cnot(0, q);
  c.cnot(0, 3).cnot(0, 1).swap(1, 2);
  return c;
}

StateVector eight_qubit_state(cplx alpha, cplx beta, cplx gamma, cplx delta) {
  const double norm = std::norm(alpha) + std::norm(beta) + std::norm(gamma) + std::norm(delta);
  if (std::abs(norm - 1.0) > kBuildTol) throw std::invalid_argument("coefficients are not normalized");
  Vec v = Vec::Zero(256);
  v(0b00000000) = alpha;
  v(0b00100000) = beta;
  v(0b11011111) = gamma;
  v(0b11111111) = delta;
  return {8, v};
}

TeleportResult eight_qubit_pipeline(cplx alpha, cplx beta, cplx gamma, cplx delta) {
  const StateVector phi = eight_qubit_state(alpha, beta, gamma, delta);
  const Circuit comp = eight_qubit_compressor();
  const StateVector squeezed = run(comp, phi);
  Vec pair(4);
  for (std::size_t i = 0; i < 4; ++i) pair(static_cast<Eigen::Index>(i)) = squeezed[i << 6];
  if (std::abs(pair.squaredNorm() - 1.0) > 1e-9) throw std::runtime_error("compressor left amplitude outside wires 0,1");

  const Circuit undo = comp.inverse();
  const DensityOperator ancillas = DensityOperator::from_state(StateVector::basis(6, 0));
  auto rebuild = [&](const DensityOperator& bob) { return run(undo, tensor(bob, ancillas)); };

  TeleportResult res{DensityOperator::from_state(phi), {}};
  res.transcript = teleport_register(pair, 2, Bell::PsiPlus, std::nullopt, phi, rebuild);
  res.transcript.m = 4;
  res.received = branch_average(res.transcript);
  return res;
}

Circuit ch2_preparation_circuit() {
  Circuit c(2);
  c.h(0).add(GateKind::T, {0}).h(0).add(GateKind::S, {0}).add(GateKind::Tdg, {0}).x(0).h(0);
  c.cnot(0, 1).h(0).cnot(0, 1);
  return c;
}

Circuit ch2_compression_circuit() {
  Circuit c(2);
  c.cnot(0, 1).h(0).cnot(0, 1);
  return c;
}

StateVector ch2_state() { return run(ch2_preparation_circuit(), StateVector::basis(2, 0)); }

SparseTarget ch2_target() {
  const StateVector s = ch2_state();
  const double r = 1.0 / std::sqrt(2.0);
  Vec x1 = Vec::Zero(4), x2 = Vec::Zero(4);
  x1(0) = r;
  x1(3) = r;
  x2(1) = r;
  x2(2) = -r;
  return {2, {{x1, x1.dot(s.amplitudes())}, {x2, x2.dot(s.amplitudes())}}};
}

}  // namespace qtl
