#include "qtelelab/circuits.hpp"
#include "qtelelab/io.hpp"
#include "qtelelab/protocols.hpp"
#include "qtelelab/quasibell.hpp"
#include "qtelelab/reproduce.hpp"
#include "qtelelab/rng.hpp"
#include "qtelelab/teleport.hpp"
#include "qtelelab/tomo.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

using namespace qtl;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kTolerance = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("QTELELAB_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw UsageError(fmt::format("QTELELAB_SEED is not an unsigned integer: '{}'", env));
    }
  }
  return flag;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + out_path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::optional<NoiseScenario> noise_from_flags(const std::string& model, double eta, const std::string& exposed) {
  if (model == "none") return std::nullopt;
  return NoiseScenario::parse(model, eta, exposed);
}

std::vector<int> random_bits(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  std::vector<int> v(n);
  for (auto& b : v) b = rng.bit();
  return v;
}

// -- reproduce ---------------------------------------------------------------

int cmd_reproduce(const std::string& id, std::uint64_t seed, const std::string& out) {
  const auto& ids = reproduce_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw UsageError("unknown table id: " + id);
  const ReproTable t = reproduce(id);
  emit(out, fmt::format("# qtelelab reproduce {} seed={} compared={} failed={}\n", id, seed, t.compared, t.failed) +
                t.to_csv());
  if (!t.ok) fmt::print(stderr, "{}: {} of {} comparisons outside tolerance\n", id, t.failed, t.compared);
  return t.ok ? kOk : kTolerance;
}

// -- quasibell sweep ---------------------------------------------------------

struct SweepArgs {
  std::string kind = "all";
  int r_steps = 11;
  std::vector<double> thetas{0.0};
  std::string noise = "none";
  std::vector<double> etas{0.0};
  std::string exposed = "b";
  int threads = 0;
};

int cmd_sweep(const SweepArgs& a, std::uint64_t seed, const std::string& out) {
  if (a.r_steps < 2) throw UsageError("--r-steps must be at least 2");
  std::vector<Bell> kinds;
  if (a.kind == "all") kinds.assign(std::begin(kAllBell), std::end(kAllBell));
  else kinds.push_back(bell_from_string(a.kind));

  struct Job {
    QuasiBellSpec spec;
    double eta;
  };
  std::vector<Job> jobs;
  for (Bell k : kinds)
    for (double th : a.thetas)
      for (int i = 0; i < a.r_steps; ++i)
        for (double eta : a.etas) jobs.push_back({{k, static_cast<double>(i) / (a.r_steps - 1), th}, eta});
  if (a.noise != "none") noise_from_flags(a.noise, 0.0, a.exposed);  // validates flags before spawning

  std::vector<std::string> lines(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& [spec, eta] = jobs[i];
      const std::string scenario = a.noise == "none" ? "none" : a.noise + "/" + a.exposed;
      if (spec.kind == Bell::PsiMinus && spec.r == 1.0 && std::cos(spec.theta) == 1.0) {
        lines[i] = fmt::format("{},{},{},{},{},nan,nan,nan,nan,nan,nan\n", to_string(spec.kind),
                               format_fixed(spec.r, 4), format_fixed(spec.theta, 6), format_fixed(eta, 4), scenario);
        continue;
      }
      const double fave = average_fidelity(spec, noise_from_flags(a.noise, eta, a.exposed));
      const double c = concurrence(quasi_state(spec));
      lines[i] = fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", to_string(spec.kind), format_fixed(spec.r, 4),
                             format_fixed(spec.theta, 6), format_fixed(eta, 4), scenario, format_fixed(fave, 8),
                             format_fixed(mfi(spec).value, 8), format_fixed(masfi(spec), 8), format_fixed(c, 8),
                             format_fixed(singlet_fraction(spec), 8), format_fixed(optimal_fidelity(spec), 8));
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n = a.threads > 0 ? static_cast<unsigned>(a.threads) : std::min(hw, 8u);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string text = fmt::format("# qtelelab quasibell sweep seed={}\n", seed);
  text += "kind,r,theta,eta,scenario,F_ave,MFI,MASFI,C,f,F_opt\n";
  for (const auto& l : lines) text += l;
  emit(out, text);
  return kOk;
}

// -- teleport ----------------------------------------------------------------

SparseTarget target_from_json(const json& j) {
  std::vector<std::pair<std::string, cplx>> terms;
  for (const auto& t : j.at("terms"))
    terms.emplace_back(t.at("bits").get<std::string>(), cplx(t.value("re", 0.0), t.value("im", 0.0)));
  return SparseTarget::computational(terms);
}

int cmd_teleport(const std::string& state_path, const std::string& channel, const std::string& noise, double eta,
                 const std::string& exposed, std::uint64_t seed, const std::string& out) {
  const json in = json::parse(read_file(state_path));
  const SparseTarget t = target_from_json(in);
  const TeleportResult res = teleport_sparse(t, noise_from_flags(noise, eta, exposed), bell_from_string(channel));
  const auto& tr = res.transcript;
  json branches = json::array();
  for (const auto& b : tr.branches) {
    json outcomes = json::array();
    for (Bell o : b.outcomes) outcomes.push_back(to_string(o));
    branches.push_back(
        {{"outcomes", outcomes}, {"corrections", b.corrections}, {"probability", b.probability}, {"fidelity", b.fidelity}});
  }
  const json doc{{"seed", seed},
                 {"n", t.n},
                 {"m", tr.m},
                 {"m_prime", tr.m_prime},
                 {"bell_pairs", tr.bell_pairs()},
                 {"channel", to_string(tr.channel)},
                 {"fidelity", tr.fidelity},
                 {"min_fidelity", tr.min_fidelity},
                 {"branches", branches}};
  emit(out, doc.dump(2) + "\n");
  return noise == "none" && tr.min_fidelity < 1.0 - 1e-10 ? kTolerance : kOk;
}

// -- protocol ----------------------------------------------------------------

struct ProtocolArgs {
  std::string name = "qd";
  std::size_t bits = 1000;
  double decoy_frac = 0.5;
  std::string eve = "none";
  bool withhold = false;
  double qber_threshold = 0.11;
};

int cmd_protocol(const ProtocolArgs& a, std::uint64_t seed, const std::string& out) {
  if (a.bits < 1) throw UsageError("--bits must be positive");
  const PartyScript alice{PartyRole::Alice, random_bits(a.bits, seed, 1), a.decoy_frac, seed};
  const PartyScript bob{PartyRole::Bob, random_bits(a.bits, seed, 2), a.decoy_frac, seed + 1};
  const PartyScript charlie{PartyRole::Charlie, {}, a.decoy_frac, seed + 2};
  EveModel eve;
  eve.seed = seed + 3;
  if (a.eve == "ir") eve.kind = EveModel::Kind::InterceptResend;
  ProtocolConfig cfg;
  cfg.qber_threshold = a.qber_threshold;
  cfg.withhold_disclosure = a.withhold;

  ProtocolTrace tr;
  if (a.name == "qd") tr = run_qd(alice, bob, eve, cfg);
  else if (a.name == "cqd") tr = run_cqd_single(alice, bob, charlie, eve, cfg);
  else if (a.name == "cqd5") tr = run_cqd_five_stage(alice, bob, charlie, eve, cfg);
  else tr = run_cdsqc_swap(alice, PartyScript{PartyRole::Bob, {}, a.decoy_frac, seed + 1}, charlie, eve, cfg);

  json doc = to_json(tr);
  doc["seed"] = seed;
  doc["bits"] = a.bits;
  doc["decoy_fraction"] = a.decoy_frac;
  doc["eve"] = a.eve;
  const bool two_way = a.name != "cdsqc";
  const double acc_bob = tr.abort ? 0.0 : bit_accuracy(alice.message, tr.decoded_by_bob);
  const double acc_alice = tr.abort || !two_way ? 0.0 : bit_accuracy(bob.message, tr.decoded_by_alice);
  doc["accuracy"] = {{"bob_decodes_alice", acc_bob}, {"alice_decodes_bob", two_way ? json(acc_alice) : json(nullptr)}};
  emit(out, doc.dump(2) + "\n");
  const bool exact = acc_bob == 1.0 && (!two_way || acc_alice == 1.0);
  return a.eve == "none" && !a.withhold && !exact ? kTolerance : kOk;
}

// -- tomo --------------------------------------------------------------------

int cmd_tomo(const std::string& state, std::uint64_t shots, bool project, double min_fidelity,
             const std::string& counts_out, std::uint64_t seed, const std::string& out) {
  Mat target;
  int n = 0;
  if (state == "psi+" || state == "psi-" || state == "phi+" || state == "phi-") {
    const StateVector s = bell_state(bell_from_string(state));
    target = s.amplitudes() * s.amplitudes().adjoint();
    n = 2;
  } else {
    const json j = json::parse(read_file(state));
    target = matrix_from_json(j);
    n = j.at("n").get<int>();
  }
  const DensityOperator rho(n, target);
  const auto records = simulate_all(rho, shots, seed);
  const Reconstruction rec = reconstruct(expectations_from_counts(records), n, project);
  const double f = fidelity(target, rec.rho);
  const Deviations d = deviations(target, rec.rho);
  if (!counts_out.empty()) {
    std::string lines;
    for (const auto& r : records) lines += to_json(r).dump() + "\n";
    emit(counts_out, lines);
  }
  const json doc{{"seed", seed},          {"n", n},
                 {"shots", shots},        {"settings", records.size()},
                 {"fidelity", f},         {"avg_deviation", d.avg},
                 {"max_deviation", d.max}, {"min_eigenvalue", rec.min_eigenvalue},
                 {"psd", rec.psd},        {"reconstruction", matrix_to_json(rec.rho)}};
  emit(out, doc.dump(2) + "\n");
  return f >= min_fidelity ? kOk : kTolerance;
}

// -- route -------------------------------------------------------------------

int cmd_route(const std::string& which, const std::string& map_name, bool best, std::uint64_t seed,
              const std::string& out) {
  Circuit c;
  if (which == "parity") c = parity_circuit();
  else if (which == "phase") c = phase_circuit();
  else if (which == "combined") c = combined_circuit();
  else c = Circuit::parse(read_file(which));
  const CouplingMap m = CouplingMap::named(map_name);
  const RoutedCircuit r = best ? route_best_layout(c, m) : route(c, m);
  std::string layout;
  for (std::size_t i = 0; i < r.initial_layout.size(); ++i)
    layout += fmt::format("{}{}", i ? " " : "", r.initial_layout[i]);
  const bool legal = r.legal_on(m), equivalent = routed_equivalent(c, r, 1e-8);
  emit(out, fmt::format("# qtelelab route seed={} map={} gates={} legal={} equivalent={}\n# layout {}\n{}", seed,
                        map_name, r.circuit.size(), legal, equivalent, layout, r.circuit.to_text()));
  return legal && equivalent ? kOk : kTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtelelab: teleportation, quasi-Bell channels, Bell discrimination, tomography and protocols"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--seed", seed, "RNG seed (QTELELAB_SEED overrides)");
  app.add_option("-o,--out", out, "Output file (default stdout)");

  auto* rep = app.add_subcommand("reproduce", "Recompute a table and compare with embedded reference values");
  std::string table_id;
  rep->add_option("table", table_id, "noise-tab2 | noise-tab1 | avfid-figures | table-one | ch2-fidelities | ch5-deviations")
      ->required();

  auto* qb = app.add_subcommand("quasibell", "Quasi-Bell channel computations");
  qb->require_subcommand(1);
  auto* sweep = qb->add_subcommand("sweep", "CSV sweep over r, theta and eta");
  SweepArgs sa;
  sweep->add_option("--kind", sa.kind)->check(CLI::IsMember({"all", "psi+", "psi-", "phi+", "phi-"}));
  sweep->add_option("--r-steps", sa.r_steps);
  sweep->add_option("--theta", sa.thetas, "One or more angles in radians");
  sweep->add_option("--noise", sa.noise)->check(CLI::IsMember({"none", "ad", "pd"}));
  sweep->add_option("--eta", sa.etas, "One or more decoherence rates in [0,1]");
  sweep->add_option("--exposed", sa.exposed)->check(CLI::IsMember({"b", "ab", "all"}));
  sweep->add_option("--threads", sa.threads);

  auto* tel = app.add_subcommand("teleport", "Teleport a sparse state given as JSON");
  std::string state_path, channel = "psi+", tnoise = "none", texposed = "b";
  double teta = 0.0;
  tel->add_option("--state", state_path, "{\"terms\": [{\"bits\": \"000\", \"re\": .., \"im\": ..}, ...]}")
      ->required();
  tel->add_option("--channel", channel)->check(CLI::IsMember({"psi+", "psi-", "phi+", "phi-"}));
  tel->add_option("--noise", tnoise)->check(CLI::IsMember({"none", "ad", "pd"}));
  tel->add_option("--eta", teta)->check(CLI::Range(0.0, 1.0));
  tel->add_option("--exposed", texposed);

  auto* proto = app.add_subcommand("protocol", "Run a secure-communication protocol");
  ProtocolArgs pa;
  proto->add_option("--name", pa.name)->check(CLI::IsMember({"qd", "cqd", "cqd5", "cdsqc"}));
  proto->add_option("--bits", pa.bits);
  proto->add_option("--decoy-frac", pa.decoy_frac);
  proto->add_option("--eve", pa.eve)->check(CLI::IsMember({"none", "ir"}));
  proto->add_flag("--withhold", pa.withhold, "Charlie never discloses the preparation basis (cqd)");
  proto->add_option("--qber-threshold", pa.qber_threshold);

  auto* tomo = app.add_subcommand("tomo", "Shot-based Pauli tomography");
  std::string tstate = "psi+", counts_out;
  std::uint64_t shots = 8192;
  bool project = false;
  double min_fid = 0.0;
  tomo->add_option("--state", tstate, "psi+ | psi- | phi+ | phi- | path to a density-matrix JSON");
  tomo->add_option("--shots", shots);
  tomo->add_flag("--project-psd", project);
  tomo->add_option("--min-fidelity", min_fid);
  tomo->add_option("--counts-out", counts_out, "Write counts as JSON lines");

  auto* rt = app.add_subcommand("route", "Route a discrimination circuit onto a coupling map");
  std::string which = "combined", map_name = "qx2old";
  bool best = false;
  rt->add_option("--circuit", which, "parity | phase | combined | path to a circuit file");
  rt->add_option("--map", map_name, "qx2old | qx2new | qx4old | qx4new | file:<path>");
  rt->add_flag("--best-layout", best);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    const std::uint64_t s = resolve_seed(seed);
    if (*rep) return cmd_reproduce(table_id, s, out);
    if (*sweep) return cmd_sweep(sa, s, out);
    if (*tel) return cmd_teleport(state_path, channel, tnoise, teta, texposed, s, out);
    if (*proto) return cmd_protocol(pa, s, out);
    if (*tomo) return cmd_tomo(tstate, shots, project, min_fid, counts_out, s, out);
    if (*rt) return cmd_route(which, map_name, best, s, out);
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::domain_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  }
  return kUsage;
}
