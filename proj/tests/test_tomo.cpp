#include "qtelelab/tomo.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace qtl;

TEST_CASE("settings are ordered X < Y < Z with qubit 0 slowest") {
  const auto s = settings_for(2);
  REQUIRE(s.size() == 9);
  CHECK(s.front().bases == "XX");
  CHECK(s[1].bases == "XY");
  CHECK(s.back().bases == "ZZ");
  CHECK(settings_for(3).size() == 27);
  CHECK(pauli_strings(2).size() == 15);
}

TEST_CASE("linear inversion from exact expectations is exact") {
  CounterRng rng(31);
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k < 5; ++k) {
      const Mat m = test::random_density(rng, n, 1 + static_cast<int>(rng.below(3)));
      const Reconstruction r = reconstruct(exact_expectations(DensityOperator(n, m)), n);
      CHECK((r.rho - m).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(r.psd);
    }
}

TEST_CASE("Pauli expectations of a Bell state") {
  const auto e = exact_expectations(DensityOperator::from_state(bell_state(Bell::PsiPlus)));
  CHECK(std::abs(e.at("XX") - 1.0) < 1e-12);
  CHECK(std::abs(e.at("YY") + 1.0) < 1e-12);
  CHECK(std::abs(e.at("ZZ") - 1.0) < 1e-12);
  CHECK(std::abs(e.at("ZI")) < 1e-12);
}

TEST_CASE("count simulation is deterministic and normalized") {
  const DensityOperator rho = DensityOperator::from_state(bell_state(Bell::PhiMinus));
  const CountsRecord a = simulate_counts(rho, {"XY"}, 1000, 4), b = simulate_counts(rho, {"XY"}, 1000, 4);
  CHECK(a.histogram == b.histogram);
  std::uint64_t total = 0;
  for (const auto& [_, c] : a.histogram) total += c;
  CHECK(total == 1000);
  // phi- in ZZ only yields odd parity.
  const CountsRecord z = simulate_counts(rho, {"ZZ"}, 500, 4);
  CHECK(z.histogram.count("00") == 0);
  CHECK(z.histogram.count("11") == 0);
  CHECK_THROWS(simulate_counts(rho, {"XQ"}, 10, 1));
  CHECK_THROWS(simulate_counts(rho, {"X"}, 10, 1));
}

TEST_CASE("Y-basis measurement distinguishes |+i> and |-i>") {
  const double r = 1 / std::sqrt(2.0);
  const StateVector plus_i(1, test::ket({r, cplx(0, r)}));
  const CountsRecord c = simulate_counts(DensityOperator::from_state(plus_i), {"Y"}, 200, 1);
  CHECK(c.histogram.at("0") == 200);
}

TEST_CASE("shot-based reconstruction of a Bell state") {
  const StateVector s = bell_state(Bell::PsiPlus);
  const Mat target = s.amplitudes() * s.amplitudes().adjoint();
  const auto rec = reconstruct(expectations_from_counts(simulate_all(DensityOperator(2, target), 8192, 7)), 2);
  CHECK(fidelity(target, rec.rho) >= 0.99);
  const auto projected = reconstruct(expectations_from_counts(simulate_all(DensityOperator(2, target), 64, 7)), 2, true);
  CHECK(projected.psd);
  CHECK(projected.min_eigenvalue >= 0.0);
  CHECK(std::abs(projected.rho.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("missing expectations are an error") {
  auto e = exact_expectations(DensityOperator::maximally_mixed(2));
  e.erase("XY");
  CHECK_THROWS(reconstruct(e, 2));
}

TEST_CASE("deviation metrics use the elementwise modulus") {
  Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2);
  a(0, 0) = 1;
  b(0, 0) = 0.9;
  b(0, 1) = cplx(0.3, 0.4);
  const Deviations d = deviations(a, b);
  CHECK(std::abs(d.max - 0.5) < 1e-12);
  CHECK(std::abs(d.avg - 0.6 / 4) < 1e-12);
  CHECK_THROWS(deviations(a, Mat::Zero(4, 4)));
}

TEST_CASE("counts JSON round trip") {
  const CountsRecord c = simulate_counts(DensityOperator::maximally_mixed(2), {"ZX"}, 100, 9);
  const CountsRecord back = counts_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(back.setting == c.setting);
  CHECK(back.shots == c.shots);
  CHECK(back.histogram == c.histogram);
}
