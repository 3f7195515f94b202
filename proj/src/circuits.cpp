#include "qtelelab/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace qtl {

int arity_of(GateKind k) { return (k == GateKind::CNOT || k == GateKind::SWAP) ? 2 : 1; }

Gate Gate::make(GateKind kind, std::vector<int> qubits, double param) {
  if (static_cast<int>(qubits.size()) != arity_of(kind)) throw std::invalid_argument("gate arity mismatch");
  if (qubits.size() == 2 && qubits[0] == qubits[1]) throw std::invalid_argument("two-qubit gate on one wire");
  return Gate{kind, std::move(qubits), param};
}

int Gate::arity() const { return arity_of(kind); }

Mat Gate::matrix() const {
  switch (kind) {
    case GateKind::X: return gates::X();
    case GateKind::Y: return gates::Y();
    case GateKind::Z: return gates::Z();
    case GateKind::H: return gates::H();
    case GateKind::S: return gates::S();
    case GateKind::Sdg: return gates::Sdg();
    case GateKind::T: return gates::T();
    case GateKind::Tdg: return gates::Tdg();
    case GateKind::P: return gates::P(param);
    case GateKind::CNOT: return gates::CNOT();
    case GateKind::SWAP: return gates::SWAP();
  }
  throw std::logic_error("unknown gate");
}

std::string Gate::name() const {
  switch (kind) {
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "Sdg";
    case GateKind::T: return "T";
    case GateKind::Tdg: return "Tdg";
    case GateKind::P: return "P";
    case GateKind::CNOT: return "CNOT";
    case GateKind::SWAP: return "SWAP";
  }
  return "?";
}

GateKind gate_kind_from_string(const std::string& name) {
  std::string u = name;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  if (u == "X") return GateKind::X;
  if (u == "Y") return GateKind::Y;
  if (u == "Z") return GateKind::Z;
  if (u == "H") return GateKind::H;
  if (u == "S") return GateKind::S;
  if (u == "SDG") return GateKind::Sdg;
  if (u == "T") return GateKind::T;
  if (u == "TDG") return GateKind::Tdg;
  if (u == "P") return GateKind::P;
  if (u == "CNOT" || u == "CX") return GateKind::CNOT;
  if (u == "SWAP") return GateKind::SWAP;
  throw std::invalid_argument("unknown gate name: " + name);
}

Circuit::Circuit(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("circuit needs at least one qubit");
}

std::size_t Circuit::count(GateKind k) const {
  return static_cast<std::size_t>(
      std::count_if(gates_.begin(), gates_.end(), [k](const Gate& g) { return g.kind == k; }));
}

Circuit& Circuit::add(const Gate& g) {
  if (static_cast<int>(g.qubits.size()) != g.arity()) throw std::invalid_argument("gate arity mismatch");
  for (int q : g.qubits)
    if (q < 0 || q >= n_) throw std::out_of_range("gate qubit index out of range");
  gates_.push_back(g);
  return *this;
}

Circuit& Circuit::add(GateKind k, std::vector<int> qubits, double param) {
  return add(Gate::make(k, std::move(qubits), param));
}

Circuit& Circuit::append(const Circuit& other) {
  for (const Gate& g : other.gates()) add(g);
  return *this;
}

namespace {
Gate inverse_gate(const Gate& g) {
  Gate out = g;
  switch (g.kind) {
    case GateKind::S: out.kind = GateKind::Sdg; break;
    case GateKind::Sdg: out.kind = GateKind::S; break;
    case GateKind::T: out.kind = GateKind::Tdg; break;
    case GateKind::Tdg: out.kind = GateKind::T; break;
    case GateKind::P: out.param = -g.param; break;
    default: break;
  }
  return out;
}
}  // namespace

Circuit Circuit::inverse() const {
  Circuit out(n_);
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.add(inverse_gate(*it));
  return out;
}

std::string Circuit::to_text() const {
  std::ostringstream os;
  os.precision(17);
  for (const Gate& g : gates_) {
    os << g.name();
    for (int q : g.qubits) os << ' ' << q;
    if (g.kind == GateKind::P) os << ' ' << g.param;
    os << '\n';
  }
  return os.str();
}

Circuit Circuit::parse(const std::string& text, std::optional<int> n) {
  std::vector<Gate> gs;
  int max_q = -1;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    const GateKind k = gate_kind_from_string(name);
    std::vector<int> qs;
    for (int i = 0; i < arity_of(k); ++i) {
      int q;
      if (!(ls >> q)) throw std::invalid_argument("line " + std::to_string(lineno) + ": missing qubit index");
      qs.push_back(q);
      max_q = std::max(max_q, q);
    }
    double param = 0.0;
    if (k == GateKind::P && !(ls >> param))
      throw std::invalid_argument("line " + std::to_string(lineno) + ": P needs an angle");
    std::string extra;
    if (ls >> extra) throw std::invalid_argument("line " + std::to_string(lineno) + ": trailing tokens");
    gs.push_back(Gate::make(k, qs, param));
  }
  Circuit c(n.value_or(std::max(1, max_q + 1)));
  for (const Gate& g : gs) c.add(g);
  return c;
}

CouplingMap::CouplingMap(int n_, std::set<std::pair<int, int>> edges_) : n(n_), edges(std::move(edges_)) {
  if (n < 1) throw std::invalid_argument("coupling map needs qubits");
  for (auto [c, t] : edges) {
    if (c == t) throw std::invalid_argument("coupling map self-loop");
    if (c < 0 || t < 0 || c >= n || t >= n) throw std::out_of_range("coupling edge out of range");
  }
}

std::vector<int> CouplingMap::shortest_path(int from, int to) const {
  std::vector<int> prev(static_cast<std::size_t>(n), -1);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> q;
  q.push(from);
  seen[static_cast<std::size_t>(from)] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (u == to) break;
    for (int v = 0; v < n; ++v) {
      if (!seen[static_cast<std::size_t>(v)] && adjacent(u, v)) {
        seen[static_cast<std::size_t>(v)] = true;
        prev[static_cast<std::size_t>(v)] = u;
        q.push(v);
      }
    }
  }
  if (!seen[static_cast<std::size_t>(to)]) return {};
  std::vector<int> path{to};
  while (path.back() != from) path.push_back(prev[static_cast<std::size_t>(path.back())]);
  std::reverse(path.begin(), path.end());
  return path;
}

CouplingMap CouplingMap::qx2_old() { return {5, {{0, 1}, {0, 2}, {4, 2}, {3, 2}, {3, 4}, {1, 2}}}; }
CouplingMap CouplingMap::qx2_new() { return {5, {{0, 1}, {0, 2}, {4, 2}, {4, 3}, {3, 2}, {1, 2}}}; }
CouplingMap CouplingMap::qx4_old() { return {5, {{2, 0}, {2, 1}, {2, 4}, {3, 2}, {3, 4}, {1, 0}}}; }
CouplingMap CouplingMap::qx4_new() { return {5, {{2, 0}, {2, 1}, {4, 2}, {3, 2}, {3, 4}, {2, 1}}}; }

CouplingMap CouplingMap::named(const std::string& spec) {
  if (spec == "qx2old") return qx2_old();
  if (spec == "qx2new") return qx2_new();
  if (spec == "qx4old") return qx4_old();
  if (spec == "qx4new") return qx4_new();
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream f(spec.substr(5));
    if (!f) throw std::invalid_argument("cannot open coupling map file: " + spec.substr(5));
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }
  throw std::invalid_argument("unknown coupling map: " + spec);
}

CouplingMap CouplingMap::parse(const std::string& text) {
  std::set<std::pair<int, int>> edges;
  int n = -1, max_q = -1;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto pos = line.find("->"); pos != std::string::npos; pos = line.find("->")) line.replace(pos, 2, " ");
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "qubits") {
      if (!(ls >> n)) throw std::invalid_argument("qubits line needs a count");
      continue;
    }
    int c = std::stoi(first), t;
    if (!(ls >> t)) throw std::invalid_argument("coupling edge needs two qubits");
    edges.insert({c, t});
    max_q = std::max({max_q, c, t});
  }
  return {n > 0 ? n : max_q + 1, edges};
}

Mat unitary_of(const Circuit& c) {
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << c.n());
  Mat u = Mat::Identity(d, d);
  for (const Gate& g : c.gates()) kernel::left(u, c.n(), g.matrix(), g.qubits);
  return u;
}

StateVector run(const Circuit& c, const StateVector& psi) {
  if (c.n() != psi.n()) throw std::invalid_argument("circuit/state width mismatch");
  Vec v = psi.amplitudes();
  for (const Gate& g : c.gates()) kernel::left(v, c.n(), g.matrix(), g.qubits);
  return StateVector::normalized(c.n(), v);
}

DensityOperator run(const Circuit& c, const DensityOperator& rho) {
  if (c.n() != rho.n()) throw std::invalid_argument("circuit/state width mismatch");
  Mat m = rho.matrix();
  for (const Gate& g : c.gates()) {
    const Mat u = g.matrix();
    kernel::left(m, c.n(), u, g.qubits);
    kernel::right_adjoint(m, c.n(), u, g.qubits);
  }
  return {c.n(), 0.5 * (m + m.adjoint())};
}

Circuit reverse_cnot(const Gate& g, int n) {
  if (g.kind != GateKind::CNOT) throw std::invalid_argument("reverse_cnot expects a CNOT");
  const int c = g.qubits[0], t = g.qubits[1];
  Circuit out(n);
  out.h(c).h(t).cnot(t, c).h(c).h(t);
  return out;
}

namespace {

using Tagged = std::vector<std::pair<Gate, std::size_t>>;

bool cancels(const Gate& a, const Gate& b) {
  if (a.qubits != b.qubits) {
    return a.kind == GateKind::SWAP && b.kind == GateKind::SWAP && a.qubits[0] == b.qubits[1] &&
           a.qubits[1] == b.qubits[0];
  }
  switch (a.kind) {
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::H:
    case GateKind::CNOT:
    case GateKind::SWAP: return b.kind == a.kind;
    case GateKind::S: return b.kind == GateKind::Sdg;
    case GateKind::Sdg: return b.kind == GateKind::S;
    case GateKind::T: return b.kind == GateKind::Tdg;
    case GateKind::Tdg: return b.kind == GateKind::T;
    case GateKind::P: return b.kind == GateKind::P && std::abs(a.param + b.param) < 1e-15;
  }
  return false;
}

bool touches(const Gate& g, const std::vector<int>& qs) {
  for (int q : g.qubits)
    if (std::find(qs.begin(), qs.end(), q) != qs.end()) return true;
  return false;
}

Tagged peephole_tagged(Tagged gs) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < gs.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < gs.size(); ++j) {
        if (!touches(gs[j].first, gs[i].first.qubits)) continue;
        if (cancels(gs[i].first, gs[j].first)) {
          gs.erase(gs.begin() + static_cast<std::ptrdiff_t>(j));
          gs.erase(gs.begin() + static_cast<std::ptrdiff_t>(i));
          changed = true;
        }
        break;
      }
    }
  }
  return gs;
}

}  // namespace

Circuit peephole(const Circuit& c) {
  Tagged gs;
  for (const Gate& g : c.gates()) gs.emplace_back(g, 0);
  Circuit out(c.n());
  for (auto& [g, s] : peephole_tagged(gs)) out.add(g);
  return out;
}

bool equal_up_to_phase(const Mat& a, const Mat& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  Eigen::Index r = 0, c = 0;
  b.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(b(r, c)) < 1e-12) return a.cwiseAbs().maxCoeff() <= tol;
  const cplx ph = a(r, c) / b(r, c);
  if (std::abs(std::abs(ph) - 1.0) > tol) return false;
  return (a - ph * b).cwiseAbs().maxCoeff() <= tol;
}

std::size_t RoutedCircuit::gates_from(std::size_t first, std::size_t last) const {
  return static_cast<std::size_t>(
      std::count_if(source.begin(), source.end(), [&](std::size_t s) { return s >= first && s < last; }));
}

bool RoutedCircuit::legal_on(const CouplingMap& m) const {
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::SWAP) return false;
    if (g.kind == GateKind::CNOT && !m.allows(g.qubits[0], g.qubits[1])) return false;
  }
  return true;
}

namespace {

std::vector<int> complete_layout(int logical_n, int physical_n, const std::vector<int>& partial) {
  if (static_cast<int>(partial.size()) < logical_n) throw std::invalid_argument("layout too short");
  std::vector<int> layout(partial.begin(), partial.begin() + logical_n);
  std::vector<bool> used(static_cast<std::size_t>(physical_n), false);
  for (int p : layout) {
    if (p < 0 || p >= physical_n || used[static_cast<std::size_t>(p)])
      throw std::invalid_argument("layout is not injective onto physical qubits");
    used[static_cast<std::size_t>(p)] = true;
  }
  for (int p = 0; p < physical_n; ++p)
    if (!used[static_cast<std::size_t>(p)]) layout.push_back(p);
  return layout;
}

void emit_cnot(Tagged& out, int c, int t, const CouplingMap& m, std::size_t src) {
  if (m.allows(c, t)) {
    out.emplace_back(Gate::make(GateKind::CNOT, {c, t}), src);
  } else if (m.allows(t, c)) {
    const Circuit rev = reverse_cnot(Gate::make(GateKind::CNOT, {c, t}), m.n);
    for (const Gate& g : rev.gates()) out.emplace_back(g, src);
  } else {
    throw std::logic_error("emit_cnot on non-adjacent pair");
  }
}

void emit_swap(Tagged& out, int a, int b, const CouplingMap& m, std::size_t src) {
  if (!m.allows(a, b)) std::swap(a, b);
  emit_cnot(out, a, b, m, src);
  emit_cnot(out, b, a, m, src);
  emit_cnot(out, a, b, m, src);
}

}  // namespace

RoutedCircuit route(const Circuit& c, const CouplingMap& m, std::optional<std::vector<int>> initial_layout) {
  if (c.n() > m.n) throw std::invalid_argument("circuit wider than coupling map");
  std::vector<int> init = initial_layout ? *initial_layout : std::vector<int>{};
  if (!initial_layout) {
    init.resize(static_cast<std::size_t>(c.n()));
    std::iota(init.begin(), init.end(), 0);
  }
  std::vector<int> layout = complete_layout(c.n(), m.n, init);
  RoutedCircuit result{Circuit(m.n), layout, {}, {}};
  std::vector<int> phys_to_log(static_cast<std::size_t>(m.n));
  for (int l = 0; l < m.n; ++l) phys_to_log[static_cast<std::size_t>(layout[static_cast<std::size_t>(l)])] = l;

  auto swap_physical = [&](int a, int b) {
    const int la = phys_to_log[static_cast<std::size_t>(a)], lb = phys_to_log[static_cast<std::size_t>(b)];
    std::swap(layout[static_cast<std::size_t>(la)], layout[static_cast<std::size_t>(lb)]);
    std::swap(phys_to_log[static_cast<std::size_t>(a)], phys_to_log[static_cast<std::size_t>(b)]);
  };

  Tagged out;
  for (std::size_t idx = 0; idx < c.gates().size(); ++idx) {
    const Gate& g = c.gates()[idx];
    if (g.arity() == 1) {
      Gate pg = g;
      pg.qubits = {layout[static_cast<std::size_t>(g.qubits[0])]};
      out.emplace_back(pg, idx);
      continue;
    }
    const int pa = layout[static_cast<std::size_t>(g.qubits[0])];
    const int pb = layout[static_cast<std::size_t>(g.qubits[1])];
    if (g.kind == GateKind::SWAP) {
      swap_physical(pa, pb);
      continue;
    }
    if (!m.adjacent(pa, pb)) {
      const auto path = m.shortest_path(pa, pb);
      if (path.empty()) throw std::runtime_error("coupling map cannot connect qubits " + std::to_string(pa) +
                                                 " and " + std::to_string(pb));
      for (std::size_t k = 0; k + 2 < path.size(); ++k) {
        emit_swap(out, path[k], path[k + 1], m, idx);
        swap_physical(path[k], path[k + 1]);
      }
    }
    emit_cnot(out, layout[static_cast<std::size_t>(g.qubits[0])], layout[static_cast<std::size_t>(g.qubits[1])], m,
              idx);
  }
  for (auto& [g, s] : peephole_tagged(out)) {
    result.circuit.add(g);
    result.source.push_back(s);
  }
  result.final_layout = layout;
  return result;
}

RoutedCircuit route_best_layout(const Circuit& c, const CouplingMap& m) {
  if (c.n() > m.n) throw std::invalid_argument("circuit wider than coupling map");
  std::vector<int> phys(static_cast<std::size_t>(m.n));
  std::iota(phys.begin(), phys.end(), 0);
  std::optional<RoutedCircuit> best;
  std::set<std::vector<int>> tried;
  do {
    std::vector<int> cand(phys.begin(), phys.begin() + c.n());
    if (!tried.insert(cand).second) continue;
    try {
      RoutedCircuit r = route(c, m, cand);
      if (!best || r.circuit.size() < best->circuit.size()) best = std::move(r);
    } catch (const std::runtime_error&) {
    }
  } while (std::next_permutation(phys.begin(), phys.end()));
  if (!best) throw std::runtime_error("no layout routes the circuit on this coupling map");
  return *best;
}

Mat layout_permutation(const std::vector<int>& layout) {
  const int n = static_cast<int>(layout.size());
  const std::size_t d = std::size_t{1} << n;
  Mat p = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t x = 0; x < d; ++x) {
    std::size_t y = 0;
    for (int q = 0; q < n; ++q)
      if ((x >> (n - 1 - q)) & 1U) y |= std::size_t{1} << (n - 1 - layout[static_cast<std::size_t>(q)]);
    p(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = 1;
  }
  return p;
}

bool routed_equivalent(const Circuit& input, const RoutedCircuit& routed, double tol) {
  Circuit wide(routed.circuit.n());
  for (const Gate& g : input.gates()) wide.add(g);
  const Mat u_in = unitary_of(wide);
  const Mat u_out = unitary_of(routed.circuit);
  const Mat lhs = layout_permutation(routed.final_layout).adjoint() * u_out * layout_permutation(routed.initial_layout);
  return equal_up_to_phase(lhs, u_in, tol);
}

Circuit epr_circuit() {
  Circuit c(2);
  c.h(0).cnot(0, 1);
  return c;
}

Circuit parity_circuit() {
  Circuit c(3);
  c.cnot(0, 2).cnot(1, 2);
  return c;
}

Circuit phase_circuit() {
  Circuit c(3);
  c.h(2).cnot(2, 0).cnot(2, 1).h(2);
  return c;
}

Circuit combined_circuit() {
  Circuit c(4);
  c.h(2).cnot(2, 0).cnot(2, 1).h(2);
  c.cnot(0, 3).cnot(1, 3);
  return c;
}

namespace {
std::string bits_of(std::size_t value, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i)
    if ((value >> (width - 1 - i)) & 1U) s[static_cast<std::size_t>(i)] = '1';
  return s;
}
}  // namespace

DiscriminationResult run_discrimination(Bell input, Discriminator which, const std::optional<NoiseScenario>& noise) {
  const Circuit circ = which == Discriminator::Parity  ? parity_circuit()
                       : which == Discriminator::Phase ? phase_circuit()
                                                       : combined_circuit();
  const int n = circ.n();
  std::vector<int> ancillas;
  for (int q = 2; q < n; ++q) ancillas.push_back(q);

  const DensityOperator bell = DensityOperator::from_state(bell_state(input));
  DensityOperator rho = tensor(bell, DensityOperator::from_state(StateVector::basis(n - 2, 0)));
  if (noise) {
    std::vector<int> targets;
    if (noise->exposes(Role::Alice)) targets.push_back(0);
    if (noise->exposes(Role::Bob)) targets.push_back(1);
    if (noise->exposes(Role::Input)) targets.insert(targets.end(), ancillas.begin(), ancillas.end());
    rho = apply_channel(rho, noise->channel(), targets);
  }
  rho = run(circ, rho);

  Circuit rev(n);
  rev.cnot(0, 1).h(0);

  DiscriminationResult res;
  const auto branches = measure_projective(rho, computational_projectors(n - 2), ancillas);
  for (std::size_t a = 0; a < branches.size(); ++a) {
    const auto& br = branches[a];
    if (!br.state) continue;
    const std::string label = bits_of(a, n - 2);
    res.ancilla_outcomes[label] += br.probability;
    const DensityOperator sys = partial_trace(*br.state, {0, 1});
    res.post_states.emplace(label, sys);
    res.nondestructive_fidelity += br.probability * fidelity(bell, sys);
    const DensityOperator decoded = run(rev, *br.state);
    const auto sys_branches = measure_projective(decoded, computational_projectors(2), {0, 1});
    for (std::size_t s = 0; s < sys_branches.size(); ++s) {
      if (sys_branches[s].probability <= 1e-14) continue;
      res.strings[bits_of(s, 2) + label] += br.probability * sys_branches[s].probability;
    }
  }
  return res;
}

}  // namespace qtl
