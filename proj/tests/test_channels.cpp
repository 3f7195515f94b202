#include "qtelelab/channels.hpp"

#include <doctest.h>

using namespace qtl;

namespace {
DensityOperator plus_state() {
  Mat m = Mat::Constant(2, 2, cplx(0.5));
  return {1, m};
}
DensityOperator one_state() {
  Mat m = Mat::Zero(2, 2);
  m(1, 1) = 1;
  return {1, m};
}
}  // namespace

TEST_CASE("Kraus sets are trace preserving") {
  for (double eta : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (const KrausChannel& ch : {kraus_ad(eta), kraus_pd(eta)}) {
      Mat sum = Mat::Zero(2, 2);
      for (const Mat& e : ch.operators) sum += e.adjoint() * e;
      CHECK((sum - Mat::Identity(2, 2)).norm() < 1e-12);
    }
  }
  CHECK_THROWS(kraus_ad(-0.1));
  CHECK_THROWS(kraus_pd(1.1));
}

TEST_CASE("amplitude damping relaxes |1> towards |0>") {
  const double eta = 0.3;
  const DensityOperator out = apply_channel(one_state(), kraus_ad(eta), {0});
  CHECK(std::abs(out.matrix()(0, 0).real() - eta) < 1e-12);
  CHECK(std::abs(out.matrix()(1, 1).real() - (1 - eta)) < 1e-12);
}

TEST_CASE("phase damping shrinks coherences by sqrt(1-eta)") {
  const double eta = 0.36;
  const DensityOperator out = apply_channel(plus_state(), kraus_pd(eta), {0});
  CHECK(std::abs(out.matrix()(0, 1).real() - 0.5 * std::sqrt(1 - eta)) < 1e-12);
  CHECK(std::abs(out.matrix()(0, 0).real() - 0.5) < 1e-12);
  const DensityOperator ad = apply_channel(plus_state(), kraus_ad(eta), {0});
  CHECK(std::abs(ad.matrix()(0, 1).real() - 0.5 * std::sqrt(1 - eta)) < 1e-12);
  CHECK(std::abs(ad.matrix()(0, 0).real() - (0.5 + 0.5 * eta)) < 1e-12);
}

TEST_CASE("channel acts only on the listed qubits") {
  const DensityOperator two = tensor(one_state(), one_state());
  const DensityOperator out = apply_channel(two, kraus_ad(1.0), {1});
  CHECK(std::abs(out.matrix()(2, 2).real() - 1.0) < 1e-12);
}

TEST_CASE("noise scenarios parse exposure labels") {
  const NoiseScenario b = NoiseScenario::parse("ad", 0.2, "b");
  CHECK(b.exposes(Role::Bob));
  CHECK(!b.exposes(Role::Alice));
  CHECK(b.exposed_label() == "b");
  const NoiseScenario all = NoiseScenario::parse("pd", 0.2, "all");
  CHECK(all.exposes(Role::Input));
  CHECK(all.model == NoiseModel::PD);
  CHECK(NoiseScenario::parse("ad", 0.5, "ab").exposed_label() == "ab");
  CHECK_THROWS(NoiseScenario::parse("xx", 0.2, "b"));
  CHECK_THROWS(NoiseScenario::parse("ad", 0.2, "bob"));
}
