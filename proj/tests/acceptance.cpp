// Acceptance run: one PASS/FAIL line per criterion. Failures are reported, not hidden;
// the process exits 0 once every criterion has been evaluated.
#include "qtelelab/circuits.hpp"
#include "qtelelab/io.hpp"
#include "qtelelab/protocols.hpp"
#include "qtelelab/quasibell.hpp"
#include "qtelelab/reproduce.hpp"
#include "qtelelab/teleport.hpp"
#include "qtelelab/tomo.hpp"
#include "test_util.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace qtl;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [miss: " << what << "]";
    }
  }
};

int g_failed = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) o.require(secs < budget_s, "runtime over " + format_fixed(budget_s, 0) + " s");
  if (!o.pass) ++g_failed;
  std::printf("%s criterion %d (%s) %.2fs:%s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.str().c_str());
  std::fflush(stdout);
}

std::string f6(double x) { return format_fixed(x, 6); }

SparseTarget random_target(CounterRng& rng, int n, std::size_t m) {
  const auto d = Eigen::Index{1} << n;
  Mat g(d, static_cast<Eigen::Index>(m));
  for (Eigen::Index j = 0; j < g.cols(); ++j) g.col(j) = test::random_state(rng, static_cast<std::size_t>(d));
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(d, g.cols());
  const Vec c = test::random_state(rng, m);
  std::vector<SparseTerm> terms;
  for (std::size_t i = 0; i < m; ++i) terms.push_back({q.col(static_cast<Eigen::Index>(i)), c(static_cast<Eigen::Index>(i))});
  return {n, terms};
}

void report_table(Outcome& o, const ReproTable& t, const std::vector<std::size_t>& show, std::size_t flag_col) {
  o.detail << " " << t.compared - t.failed << "/" << t.compared << " within tolerance";
  for (const auto& row : t.rows) {
    if (row[flag_col] == "yes") continue;
    o.detail << " | off:";
    for (std::size_t c : show) o.detail << " " << row[c];
  }
  o.require(t.ok, "table mismatch");
}

}  // namespace

int main() {
  criterion(1, "quasi-Bell noiseless numbers", 1.0, [](Outcome& o) {
    const double ms = masfi({Bell::PhiPlus, 0.5, 0.0});
    const double fa = average_fidelity({Bell::PhiPlus, 0.5, 0.0});
    const double f0 = average_fidelity({Bell::PhiPlus, 0.0, 0.0});
    const double f1 = average_fidelity({Bell::PhiPlus, 1.0, 0.0});
    o.detail << " MASFI=" << f6(ms) << " F_ave(0.5)=" << f6(fa) << " F_ave(0)=" << f6(f0) << " F_ave(1)=" << f6(f1);
    o.require(std::abs(ms - 0.75) < 1e-12, "MASFI");
    o.require(std::abs(fa - 0.733) <= 0.0005, "F_ave(0.5)");
    o.require(std::abs(f0 - 1.0) < 1e-9, "F_ave(0)");
    o.require(std::abs(f1 - 1.0 / 3.0) < 1e-9, "F_ave(1)");
  });

  criterion(2, "optimality identity", 10.0, [](Outcome& o) {
    double worst = 0;
    int differs[4] = {0, 0, 0, 0};
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
          const QuasiBellSpec spec{kAllBell[k], i / 9.0, 2 * kPi * j / 9.0};
          worst = std::max(worst, std::abs(average_fidelity(spec) - optimal_fidelity(spec)));
          const double fmax = maximal_singlet_fraction(DensityOperator::from_state(quasi_state(spec)));
          if (std::abs(fmax - singlet_fraction(spec)) > 1e-9) ++differs[k];
        }
    o.detail << " max |F_ave-(2f+1)/3|=" << worst << " over 324 points (f = overlap with the matching Bell state;"
             << " max-over-Bell f differs at psi+:" << differs[0] << " psi-:" << differs[1] << " phi+:" << differs[2]
             << " phi-:" << differs[3] << " points)";
    o.require(worst < 1e-9, "identity");
  });

  criterion(3, "closed forms vs simulation", 60.0, [](Outcome& o) {
    std::size_t n = 0, bad = 0, printed_bad = 0;
    double worst = 0;
    std::string printed_where;
    const std::pair<double, double> points[3] = {{0.5, kPi / 3}, {0.3, 1.9}, {0.8, 4.0}};
    for (Bell k : kAllBell)
      for (NoiseModel m : {NoiseModel::AD, NoiseModel::PD})
        for (const char* exposed : {"b", "ab", "all"})
          for (int e = 0; e <= 5; ++e)
            for (auto [r, th] : points) {
              const QuasiBellSpec spec{k, r, th};
              const auto noise = NoiseScenario::parse(to_string(m), e / 5.0, exposed);
              const AverageFidelityCheck c = check_average_fidelity(spec, noise);
              ++n;
              const double d = std::abs(c.quadrature - c.closed_form);
              worst = std::max(worst, d);
              if (!c.agrees) ++bad;
              if (std::abs(c.printed - c.quadrature) > 1e-8) {
                ++printed_bad;
                const std::string key = to_string(k) + "/" + to_string(m) + "/" + exposed;
                if (printed_where.find(key) == std::string::npos) printed_where += " " + key;
              }
            }
    o.detail << " derived closed forms: " << n - bad << "/" << n << " agree (max diff " << worst
             << "); printed forms disagree at " << printed_bad << " points in" << printed_where
             << " (simulation authoritative)";
    o.require(bad == 0, "closed form mismatch");
  });

  criterion(4, "noise-tab2 thresholds", 10.0, [](Outcome& o) {
    report_table(o, reproduce("noise-tab2"), {0, 1, 2, 3, 4}, 6);
  });

  criterion(5, "noise-tab1 best/worst", 0.0, [](Outcome& o) {
    report_table(o, reproduce("noise-tab1"), {0, 1, 2, 7, 8, 9, 10}, 11);
  });

  criterion(6, "optimal teleportation", 30.0, [](Outcome& o) {
    CounterRng rng(2024);
    double worst = 1.0;
    int wrong_pairs = 0;
    for (int k = 0; k < 200; ++k) {
      const int n = 1 + static_cast<int>(rng.below(6));
      const std::size_t m = 1 + rng.below(std::min<std::size_t>(8, std::size_t{1} << n));
      const TeleportResult r = teleport_sparse(random_target(rng, n, m), std::nullopt, kAllBell[rng.below(4)]);
      int expect = 0;
      while ((std::size_t{1} << expect) < m) ++expect;
      if (r.transcript.bell_pairs() != expect) ++wrong_pairs;
      worst = std::min(worst, r.transcript.min_fidelity);
    }
    o.detail << " 200 targets: min branch fidelity " << format_fixed(worst, 12) << ", pair-count mismatches "
             << wrong_pairs;
    o.require(worst >= 1 - 1e-10 && wrong_pairs == 0, "random targets");

    const auto& row = reference_values().at("table_a_row1");
    const int n = row.at("n").get<int>();
    std::vector<std::pair<std::size_t, cplx>> terms;
    const auto basis = row.at("basis").get<std::vector<std::size_t>>();
    for (std::size_t i = 0; i < basis.size(); ++i) terms.emplace_back(basis[i], i == 0 ? 0.6 : 0.8);
    Mat expect = Mat::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
    for (const auto& e : row.at("ones")) expect(e[0].get<int>(), e[1].get<int>()) = 1;
    const bool row1 = (build_compression_plan(SparseTarget::from_indices(n, terms)).U - expect).norm() == 0.0;
    o.detail << "; Table A row 1 unitary " << (row1 ? "exact" : "differs");
    o.require(row1, "Table A row 1");

    const SparseTarget t = ch2_target();
    const StateVector out = run(ch2_compression_circuit(), ch2_state());
    Vec expect2 = Vec::Zero(4);
    expect2(0) = t.terms[0].amplitude;
    expect2(2) = t.terms[1].amplitude;
    const double ov = std::abs(expect2.dot(out.amplitudes()));
    o.detail << "; compression |<alpha 00 + beta 10|out>|=" << format_fixed(ov, 12);
    o.require(std::abs(ov - 1.0) < 1e-10, "compression");
  });

  criterion(7, "eight-qubit pipeline", 0.0, [](Outcome& o) {
    CounterRng rng(77);
    double worst_circ = 0, worst_tel = 1;
    for (int k = 0; k < 50; ++k) {
      const Vec c = test::random_state(rng, 4);
      const StateVector out = run(eight_qubit_compressor(), eight_qubit_state(c(0), c(1), c(2), c(3)));
      Vec expect = Vec::Zero(256);
      for (int i = 0; i < 4; ++i) expect(i << 6) = c(i);
      worst_circ = std::max(worst_circ, (out.amplitudes() - expect).norm());
      if (k < 10) {
        const TeleportResult r = eight_qubit_pipeline(c(0), c(1), c(2), c(3));
        worst_tel = std::min(worst_tel, r.transcript.min_fidelity);
        o.require(r.transcript.bell_pairs() == 2, "two Bell pairs");
      }
    }
    o.detail << " compressor max deviation " << worst_circ << " over 50 sets; end-to-end min fidelity "
             << format_fixed(worst_tel, 12) << " with 2 Bell pairs";
    o.require(worst_circ < 1e-12, "compressor output");
    o.require(worst_tel >= 1 - 1e-10, "teleport fidelity");
  });

  criterion(8, "printed fixtures", 0.0, [](Outcome& o) {
    const StateVector s = ch2_state();
    const Mat theory = s.amplitudes() * s.amplitudes().adjoint();
    const Mat p1 = hermitian_part(fixture_matrix("rho_prime")), p2 = hermitian_part(fixture_matrix("rho_double_prime"));
    const double f1 = fidelity(theory, p1), f2 = fidelity(p1, p2), f3 = fidelity(theory, p2);
    o.detail << " F(theory,rho')=" << format_fixed(f1, 5) << " F(rho',rho'')=" << format_fixed(f2, 5)
             << " F(theory,rho'')=" << format_fixed(f3, 5);
    o.require(std::abs(f1 - 0.9221) <= 0.01, "rho'");
    o.require(std::abs(f2 - 0.9378) <= 0.01, "rho''");
    const Mat ideal = [] {
      const StateVector b = bell_ancilla_state(Bell::PsiPlus);
      return Mat(b.amplitudes() * b.amplitudes().adjoint());
    }();
    const Mat raw = fixture_matrix("psi_plus_0");
    const double f = fidelity(ideal, hermitian_part(raw));
    const Deviations d = deviations(ideal, raw);
    o.detail << "; psi+0: F=" << format_fixed(f, 4) << " avg=" << format_fixed(100 * d.avg, 2)
             << "% max=" << format_fixed(100 * d.max, 2) << "%";
    o.require(std::abs(f - 0.889) <= 0.01, "psi+0 fidelity");
    o.require(std::abs(d.avg - 0.018) <= 0.002, "avg deviation");
    o.require(std::abs(d.max - 0.137) <= 0.005, "max deviation");
  });

  criterion(9, "Bell discrimination", 0.0, [](Outcome& o) {
    const ReproTable t = reproduce("table-one");
    o.detail << " Table one " << t.compared - t.failed << "/" << t.compared << " strings";
    o.require(t.ok, "table one");
    double worst = 1;
    for (Bell b : kAllBell)
      for (Discriminator d : {Discriminator::Parity, Discriminator::Phase, Discriminator::Combined})
        worst = std::min(worst, run_discrimination(b, d).nondestructive_fidelity);
    o.detail << "; nondestructive fidelity " << format_fixed(worst, 12);
    o.require(worst >= 1 - 1e-10, "nondestructive");
    const Circuit c = combined_circuit();
    const CouplingMap m = CouplingMap::qx2_old();
    const RoutedCircuit r = route_best_layout(c, m);
    const std::size_t parity = r.gates_from(kCombinedPhaseGates, c.size());
    const bool legal = r.legal_on(m), equiv = routed_equivalent(c, r, 1e-8);
    o.detail << "; routed on qx2old: " << r.circuit.size() << " gates, parity block " << parity
             << ", legal=" << legal << ", equivalent=" << equiv;
    o.require(legal && equiv && parity <= 24, "routing");
  });

  criterion(10, "tomography", 0.0, [](Outcome& o) {
    CounterRng rng(1010);
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      const int n = 1 + static_cast<int>(rng.below(3));
      const Mat m = test::random_density(rng, n, 1 + static_cast<int>(rng.below(3)));
      const Reconstruction r = reconstruct(exact_expectations(DensityOperator(n, m)), n);
      worst = std::max(worst, (r.rho - m).cwiseAbs().maxCoeff());
    }
    o.detail << " round trip max error " << worst << " over 50 states";
    o.require(worst < 1e-10, "round trip");
    std::vector<double> fids;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CounterRng srng(seed, 77);
      const Vec v = test::random_state(srng, 4);
      const Mat target = v * v.adjoint();
      const auto rec = reconstruct(expectations_from_counts(simulate_all(DensityOperator(2, target), 8192, seed)), 2);
      fids.push_back(fidelity(target, rec.rho));
    }
    std::sort(fids.begin(), fids.end());
    const double median = 0.5 * (fids[9] + fids[10]);
    o.detail << "; 8192-shot median fidelity " << format_fixed(median, 5) << " (min " << format_fixed(fids.front(), 5)
             << ") over 20 seeds, random two-qubit pure states";
    o.require(median >= 0.99, "shot reconstruction");
  });

  criterion(11, "protocols", 0.0, [](Outcome& o) {
    auto bits = [](std::size_t n, std::uint64_t seed) {
      CounterRng r(seed);
      std::vector<int> v(n);
      for (auto& b : v) b = r.bit();
      return v;
    };
    const auto a = bits(1000, 1), b = bits(1000, 2);
    const PartyScript alice{PartyRole::Alice, a, 0.5, 11}, bob{PartyRole::Bob, b, 0.5, 12},
        charlie{PartyRole::Charlie, {}, 0.5, 13};
    const ProtocolTrace traces[3] = {run_qd(alice, bob, {}), run_cqd_single(alice, bob, charlie, {}),
                                     run_cqd_five_stage(alice, bob, charlie, {})};
    const char* names[3] = {"qd", "cqd", "cqd5"};
    for (int i = 0; i < 3; ++i) {
      const bool exact = traces[i].decoded_by_bob == a && traces[i].decoded_by_alice == b;
      o.detail << " " << names[i] << (exact ? ":exact" : ":ERR");
      o.require(exact, names[i]);
    }
    const bool cd = run_cdsqc_swap(alice, PartyScript{PartyRole::Bob, {}, 0.5, 12}, charlie).decoded_by_bob == a;
    o.detail << " cdsqc" << (cd ? ":exact" : ":ERR");
    o.require(cd, "cdsqc");

    EveModel eve{EveModel::Kind::InterceptResend, EveModel::Basis::RandomBB84, 4242, {}};
    const PartyScript la{PartyRole::Alice, bits(2500, 3), 0.5, 21}, lb{PartyRole::Bob, bits(2500, 4), 0.5, 22};
    const ProtocolTrace ir = run_qd(la, lb, eve);
    o.detail << "; intercept-resend detection " << format_fixed(ir.qber, 4) << " over " << ir.decoys_checked()
             << " decoys";
    o.require(ir.decoys_checked() >= 4000 && std::abs(ir.qber - 0.25) <= 0.02, "detection rate");

    const auto& ref = reference_values().at("cdsqc");
    std::size_t agree = 0, total = 0;
    const auto branches = cdsqc_enumerate();
    for (const auto& c : ref.at("cases")) {
      const bool minus = c.at("charlie").get<std::string>() == "-";
      const int abit = c.at("alice").get<int>();
      std::set<std::pair<std::string, std::string>> s0, s1;
      for (const auto& p : c.at("bob0")) s0.insert({p[0].get<std::string>(), p[1].get<std::string>()});
      for (const auto& p : c.at("bob1")) s1.insert({p[0].get<std::string>(), p[1].get<std::string>()});
      for (const auto& br : branches) {
        if (br.charlie_minus != minus || br.alice_bit != abit) continue;
        ++total;
        const std::pair key{to_string(br.b1), to_string(br.b2)};
        bool ok = std::abs(br.p_bob0 - (s0.count(key) ? 0.125 : 0.0)) < 1e-12 &&
                  std::abs(br.p_bob1 - (s1.count(key) ? 0.125 : 0.0)) < 1e-12;
        if (br.p_bob0 > 0) ok = ok && cdsqc_decode(minus, br.b1, br.b2, 0) == abit;
        if (br.p_bob1 > 0) ok = ok && cdsqc_decode(minus, br.b1, br.b2, 1) == abit;
        agree += ok;
      }
    }
    o.detail << "; CDSQC table " << agree << "/" << total << " combinations match enumeration";
    o.require(total == 64 && agree == 64, "CDSQC table");
  });

  std::printf("%d of 11 criteria failed\n", g_failed);
  return 0;
}
