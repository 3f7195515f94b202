#include "qtelelab/quasibell.hpp"

#include "qtelelab/teleport.hpp"

#include <gsl/gsl_integration.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace qtl {

void QuasiBellSpec::validate() const {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in [0,1]");
  if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
}

QuasiCoefficients quasi_coefficients(double r, double theta) {
  const double r2 = r * r, c = std::cos(2 * theta);
  const cplx e1 = std::polar(1.0, theta), e2 = std::polar(1.0, 2 * theta);
  const double w = std::sqrt(1 - r2);
  QuasiCoefficients q;
  q.M_plus = 1.0 / std::sqrt(2 * (1 + r2 * c));
  q.M_minus = 1.0 / std::sqrt(2 * (1 - r2 * c));
  q.N_plus = 1.0 / std::sqrt(2 * (1 + r2));
  q.N_minus = 1.0 / std::sqrt(2 * (1 - r2));
  q.k_plus = (1.0 + r2 * e2) * q.M_plus;
  q.l_plus = w * r * e1 * q.M_plus;
  q.m_plus = (1 - r2) * q.M_plus;
  q.k_minus = (1.0 - r2 * e2) * q.M_minus;
  q.l_minus = w * r * e1 * q.M_minus;
  q.m_minus = (1 - r2) * q.M_minus;
  q.eta_coeff = 2.0 * r * e1 / std::sqrt(2 * (1 + r2));
  q.epsilon = std::sqrt((1 - r2) / (2 * (1 + r2)));
  return q;
}

StateVector quasi_state(const QuasiBellSpec& spec) {
  spec.validate();
  Vec a(2), b(2);
  a << 1.0, 0.0;
  b << std::polar(spec.r, spec.theta), std::sqrt(1 - spec.r * spec.r);
  Vec v;
  switch (spec.kind) {
    case Bell::PsiPlus: v = kron(a, a) + kron(b, b); break;
    case Bell::PsiMinus: v = kron(a, a) - kron(b, b); break;
    case Bell::PhiPlus: v = kron(a, b) + kron(b, a); break;
    case Bell::PhiMinus: v = kron(a, b) - kron(b, a); break;
  }
  if (v.norm() < 1e-12) throw std::domain_error("quasi-Bell state vanishes for these parameters");
  return StateVector::normalized(2, v);
}

namespace {

// Unnormalized input register keeps the map linear; roles: 0 input, 1 Alice, 2 Bob.
Mat run_protocol(const Mat& rho_in, const StateVector& channel, Bell kind, const std::optional<NoiseScenario>& noise) {
  const Vec& c = channel.amplitudes();
  Mat rho = kron(rho_in, c * c.adjoint());
  if (noise) {
    const KrausChannel ch = noise->channel();
    ch.validate();
    const Role roles[3] = {Role::Input, Role::Alice, Role::Bob};
    for (int q = 0; q < 3; ++q) {
      if (!noise->exposes(roles[q])) continue;
      Mat acc = Mat::Zero(8, 8);
      for (const Mat& e : ch.operators) {
        Mat term = rho;
        kernel::left(term, 3, e, {q});
        kernel::right_adjoint(term, 3, e, {q});
        acc += term;
      }
      rho = acc;
    }
  }
  Mat out = Mat::Zero(2, 2);
  for (Bell b : kAllBell) {
    const Mat p = lift(bell_projector(b), 3, {0, 1});
    const Mat m = p * rho * p;
    Mat bob = Mat::Zero(2, 2);
    for (int a = 0; a < 4; ++a)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) bob(x, y) += m(2 * a + x, 2 * a + y);
    const Mat u = tel_u(kind, bell_bits(b));
    out += u * bob * u.adjoint();
  }
  return out;
}

struct GlTable {
  gsl_integration_glfixed_table* t;
  GlTable() : t(gsl_integration_glfixed_table_alloc(kQuadratureNodes)) {}
  ~GlTable() { gsl_integration_glfixed_table_free(t); }
  GlTable(const GlTable&) = delete;
  GlTable& operator=(const GlTable&) = delete;
};

const GlTable& gl_table() {
  static const GlTable table;
  return table;
}

std::string scenario_key(const std::optional<NoiseScenario>& noise) {
  if (!noise) return "none";
  const std::string label = noise->exposed_label();
  if (label != "b" && label != "ab" && label != "all")
    throw std::invalid_argument("no closed form for exposure '" + label + "'");
  return label;
}

double noiseless_closed_form(const QuasiBellSpec& s) {
  const double r2 = s.r * s.r, r4 = r2 * r2, c = std::cos(2 * s.theta);
  switch (s.kind) {
    case Bell::PsiPlus: return (3 - 2 * r2 + r4 - r2 * (r2 - 3) * c) / (3 * (1 + r2 * c));
    case Bell::PsiMinus: return (3 - 2 * r2 + r4 + r2 * (r2 - 3) * c) / (3 * (1 - r2 * c));
    case Bell::PhiPlus: return (3 - r2) / (3 * (1 + r2));
    case Bell::PhiMinus: return 1.0;
  }
  return 0.0;
}

double adaq_psi_plus_derived(double r, double c, double n) {
  const double r2 = r * r, r4 = r2 * r2, s3 = std::pow(1 - n, 1.5);
  const double n2 = n * n, n3 = n2 * n;
  const double bracket = c * n * r2 + 2 * c * r4 * s3 - 2 * c * r2 * s3 - 4 * c * r2 + 2 * n3 * r4 - 4 * n3 * r2 +
                         2 * n3 - 6 * n2 * r4 + 10 * n2 * r2 - 4 * n2 + 6 * n * r4 - 8 * n * r2 + 3 * n - 2 * r4 +
                         2 * r2 * s3 + 2 * r2 - 2 * s3 - 4;
  return -bracket / (6 * (1 + r2 * c));
}

double noisy_closed_form(const QuasiBellSpec& spec, NoiseModel model, const std::string& exposed, double eta,
                         bool printed) {
  const double r2 = spec.r * spec.r, r4 = r2 * r2, c = std::cos(2 * spec.theta);
  const double n = eta, s = std::sqrt(1 - eta);
  const Bell k = spec.kind;
  if (model == NoiseModel::AD && exposed == "b") {
    switch (k) {
      case Bell::PsiPlus:
        return -1 / (2 * (3 + 3 * r2 * c)) *
               (-4 + r2 * (2 + 2 * s - 3 * n) - 2 * s + 2 * r4 * (-1 + n) + n + 2 * r2 * (-2 - s + r2 * s) * c);
      case Bell::PsiMinus:
        return 1 / (-6 + 6 * r2 * c) *
               (-4 + r2 * (2 + 2 * s - 3 * n) - 2 * s + 2 * r4 * (-1 + n) + n - 2 * r2 * (-2 - s + r2 * s) * c);
      case Bell::PhiPlus: return (4 + 2 * s - n + r2 * (-2 * s + n)) / (6 * (1 + r2));
      case Bell::PhiMinus: return (4 + 2 * s - n) / 6;
    }
  }
  if (model == NoiseModel::PD && exposed == "b") {
    switch (k) {
      case Bell::PsiPlus: return (2 + s + r2 * (-s + (-1 + r2) / (1 + r2 * c))) / 3;
      case Bell::PsiMinus: return (2 + s - r2 * s + (r2 - r4) / (-1 + r2 * c)) / 3;
      case Bell::PhiPlus: return (2 + s - r2 * s) / (3 + 3 * r2);
      case Bell::PhiMinus: return (2 + s) / 3;
    }
  }
  if (model == NoiseModel::AD && exposed == "ab") {
    const double d = (n - 1) * (n - 1);
    switch (k) {
      case Bell::PsiPlus:
        return (3 - 2 * r2 * d + r4 * d - 2 * n + n * n + r2 * (3 + r2 * (-1 + n) - n) * c) / (3 + 3 * r2 * c);
      case Bell::PsiMinus:
        return -(3 - 2 * r2 * d + r4 * d + (-2 + n) * n + r2 * (-3 - r2 * (-1 + n) + n) * c) / (-3 + 3 * r2 * c);
      case Bell::PhiPlus: return (3 - 2 * n + r2 * (-1 + 2 * n)) / (3 * (1 + r2));
      case Bell::PhiMinus: return 1 - 2 * n / 3;
    }
  }
  if (model == NoiseModel::PD && exposed == "ab") {
    switch (k) {
      case Bell::PsiPlus: return (3 - n + r2 * (-1 + n + (-1 + r2) / (1 + r2 * c))) / 3;
      case Bell::PsiMinus: return (3 + r2 * (-1 + n) - n + (r2 - r4) / (-1 + r2 * c)) / 3;
      case Bell::PhiPlus: return (3 + r2 * (-1 + n) - n) / (3 * (1 + r2));
      case Bell::PhiMinus: return 1 - n / 3;
    }
  }
  if (model == NoiseModel::AD && exposed == "all") {
    switch (k) {
      case Bell::PsiPlus:
        // The printed entry repeats the Bob-only expression.
        return printed ? noisy_closed_form(spec, NoiseModel::AD, "b", eta, true) : adaq_psi_plus_derived(spec.r, c, n);
      case Bell::PsiMinus:
        return 1 / (2 * (-3 + 3 * r2 * c)) *
               (-2 * (2 + s) + n * (3 + 2 * s + 2 * (-2 + n) * n) - 2 * r2 * (-1 + n) * (1 + s + n * (-3 + 2 * n)) +
                2 * r4 * std::pow(-1 + n, 3) + r2 * (4 + 2 * s + 2 * s * (r2 * (-1 + n) - n) - n) * c);
      case Bell::PhiPlus:
        return (2 * (2 + s) + n * (-3 - 2 * s + 2 * n) + r2 * (-2 * s + (5 + 2 * s - 2 * n) * n)) / (6 * (1 + r2));
      case Bell::PhiMinus: return (4 + 2 * s - 3 * n - 2 * s * n + 2 * n * n) / 6;
    }
  }
  if (model == NoiseModel::PD && exposed == "all") {
    const double p15 = std::pow(1 - n, 1.5);
    switch (k) {
      case Bell::PsiPlus:
        return (2 + r4 + s - s * n + r2 * (-1 - s + s * n) + r2 * (2 + s - r2 * p15 - s * n) * c) / (3 + 3 * r2 * c);
      case Bell::PsiMinus: return (2 + s - r2 * s - s * n + r2 * s * n + (r2 - r4) / (-1 + r2 * c)) / 3;
      case Bell::PhiPlus: return (2 + s + s * (r2 * (-1 + n) - n)) / (3 * (1 + r2));
      case Bell::PhiMinus: return (2 + p15) / 3;
    }
  }
  throw std::invalid_argument("unsupported noise scenario");
}

double closed_form_impl(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise, bool printed) {
  spec.validate();
  const std::string key = scenario_key(noise);
  if (key == "none") return noiseless_closed_form(spec);
  return noisy_closed_form(spec, noise->model, key, noise->rate, printed);
}

}  // namespace

TeleportMap teleport_map(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise) {
  const StateVector ch = quasi_state(spec);
  TeleportMap lambda;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Mat e = Mat::Zero(2, 2);
      e(i, j) = 1.0;
      lambda[static_cast<std::size_t>(2 * i + j)] = run_protocol(e, ch, spec.kind, noise);
    }
  }
  return lambda;
}

double pointwise_fidelity(const TeleportMap& lambda, const BlochPoint& p) {
  const Vec psi = bloch_state(p).amplitudes();
  Mat out = Mat::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out += psi(i) * std::conj(psi(j)) * lambda[static_cast<std::size_t>(2 * i + j)];
  return (psi.adjoint() * out * psi)(0, 0).real();
}

double pointwise_fidelity(const QuasiBellSpec& spec, const BlochPoint& p, const std::optional<NoiseScenario>& noise) {
  const StateVector in = bloch_state(p);
  DensityOperator rho = DensityOperator::from_state(tensor(in, quasi_state(spec)));
  if (noise) {
    std::vector<int> targets;
    if (noise->exposes(Role::Input)) targets.push_back(0);
    if (noise->exposes(Role::Alice)) targets.push_back(1);
    if (noise->exposes(Role::Bob)) targets.push_back(2);
    rho = apply_channel(rho, noise->channel(), targets);
  }
  std::vector<Mat> projectors;
  for (Bell b : kAllBell) projectors.push_back(bell_projector(b));
  const auto branches = measure_projective(rho, projectors, {0, 1});
  const DensityOperator target = DensityOperator::from_state(in);
  double f = 0.0;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    if (!branches[b].state) continue;
    DensityOperator bob = partial_trace(*branches[b].state, {2});
    bob = apply_unitary(bob, tel_u(spec.kind, bell_bits(kAllBell[b])), {0});
    f += branches[b].probability * (in.amplitudes().adjoint() * bob.matrix() * in.amplitudes())(0, 0).real();
  }
  return f;
}

double average_fidelity(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise) {
  const TeleportMap lambda = teleport_map(spec, noise);
  const auto* t = gl_table().t;
  double total = 0.0;
  for (int i = 0; i < kQuadratureNodes; ++i) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &x, &w, t);
    const double tp = std::acos(x);
    for (int k = 0; k < kQuadratureNodes; ++k)
      total += w * pointwise_fidelity(lambda, {tp, 2 * kPi * k / kQuadratureNodes});
  }
  return total / (2.0 * kQuadratureNodes);
}

double average_fidelity_closed_form(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise) {
  return closed_form_impl(spec, noise, false);
}

double average_fidelity_printed(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise) {
  return closed_form_impl(spec, noise, true);
}

AverageFidelityCheck check_average_fidelity(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise) {
  AverageFidelityCheck c;
  c.quadrature = average_fidelity(spec, noise);
  c.closed_form = average_fidelity_closed_form(spec, noise);
  c.printed = average_fidelity_printed(spec, noise);
  c.agrees = std::abs(c.quadrature - c.closed_form) < 1e-8;
  return c;
}

namespace {
double nm_objective(const gsl_vector* x, void* params) {
  const auto* lambda = static_cast<const TeleportMap*>(params);
  return pointwise_fidelity(*lambda, {gsl_vector_get(x, 0), gsl_vector_get(x, 1)});
}
}  // namespace

MfiResult mfi(const QuasiBellSpec& spec) {
  const TeleportMap lambda = teleport_map(spec);
  constexpr int kGrid = 64;
  MfiResult best{2.0, {}};
  for (int i = 0; i <= kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const BlochPoint p{kPi * i / kGrid, 2 * kPi * j / kGrid};
      const double f = pointwise_fidelity(lambda, p);
      if (f < best.value) best = {f, p};
    }
  }

  const gsl_multimin_fminimizer_type* type = gsl_multimin_fminimizer_nmsimplex2;
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(type, 2), &gsl_multimin_fminimizer_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(2), &gsl_vector_free);
  gsl_vector_set(x.get(), 0, best.argmin.theta_p);
  gsl_vector_set(x.get(), 1, best.argmin.phi_p);
  gsl_vector_set_all(step.get(), kPi / kGrid);
  gsl_multimin_function fn{&nm_objective, 2, const_cast<TeleportMap*>(&lambda)};
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
  for (int iter = 0; iter < 500; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != 0) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-8) == GSL_SUCCESS) break;
  }
  if (s->fval < best.value) best = {s->fval, {gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1)}};
  return best;
}

double mfi_closed_form(const QuasiBellSpec& spec) {
  spec.validate();
  const double r2 = spec.r * spec.r, c = std::cos(2 * spec.theta);
  const double sn = std::sin(spec.theta), cs = std::cos(spec.theta);
  switch (spec.kind) {
    case Bell::PsiPlus: return (1 - r2 * (2 - r2) * sn * sn) / (1 + r2 * c);
    case Bell::PsiMinus: return (1 - r2 * (2 - r2) * cs * cs) / (1 - r2 * c);
    case Bell::PhiPlus: return (1 - r2) / (1 + r2);
    case Bell::PhiMinus: return 1.0;
  }
  return 0.0;
}

double masfi(const QuasiBellSpec& spec) {
  const double c = concurrence(quasi_state(spec));
  return 2 * c / (1 + c);
}

double masfi_closed_form(const QuasiBellSpec& spec) {
  spec.validate();
  const double r2 = spec.r * spec.r;
  const double sn = std::sin(spec.theta), cs = std::cos(spec.theta);
  switch (spec.kind) {
    case Bell::PsiPlus: return (1 - r2) / (1 - r2 * sn * sn);
    case Bell::PsiMinus: return (1 - r2) / (1 - r2 * cs * cs);
    case Bell::PhiPlus: return 1 - r2;
    case Bell::PhiMinus: return 1.0;
  }
  return 0.0;
}

double singlet_fraction(const QuasiBellSpec& spec) {
  return std::norm(bell_state(spec.kind).amplitudes().dot(quasi_state(spec).amplitudes()));
}

double singlet_fraction_closed_form(const QuasiBellSpec& spec) {
  spec.validate();
  const double r2 = spec.r * spec.r, r4 = r2 * r2, c = std::cos(2 * spec.theta);
  switch (spec.kind) {
    case Bell::PsiPlus: return (2 - 2 * r2 + r4 + c * (2 * r2 - r4)) / (2 * (1 + r2 * c));
    case Bell::PsiMinus: return (2 - 2 * r2 + r4 - c * (2 * r2 - r4)) / (2 * (1 - r2 * c));
    case Bell::PhiPlus: return (1 - r2) / (1 + r2);
    case Bell::PhiMinus: return 1.0;
  }
  return 0.0;
}

double optimal_fidelity(const QuasiBellSpec& spec) { return (2 * singlet_fraction(spec) + 1) / 3; }

Threshold classical_threshold(const QuasiBellSpec& spec, NoiseModel model, const std::string& exposed) {
  const auto roles = exposure_from_label(exposed);
  auto f = [&](double eta) { return average_fidelity(spec, NoiseScenario(model, eta, roles)); };
  if (f(0.0) <= kClassicalFidelity)
    throw std::domain_error("average fidelity does not exceed 2/3 without noise");
  if (f(1.0) > kClassicalFidelity - 1e-12) return {1.0, false};  // reaches 2/3 only at eta = 1
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > kClassicalFidelity ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), true};
}

BestWorst best_worst_state(NoiseModel model, const std::string& exposed, double eta, double r, double theta) {
  BestWorst bw;
  const NoiseScenario noise(model, eta, exposure_from_label(exposed));
  for (std::size_t i = 0; i < 4; ++i) bw.values[i] = average_fidelity({kAllBell[i], r, theta}, noise);
  std::size_t hi = 0, lo = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (bw.values[i] > bw.values[hi] + 1e-12) hi = i;
    if (bw.values[i] < bw.values[lo] - 1e-12) lo = i;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (i != hi && std::abs(bw.values[i] - bw.values[hi]) <= 1e-12) bw.best_tied = true;
    if (i != lo && std::abs(bw.values[i] - bw.values[lo]) <= 1e-12) bw.worst_tied = true;
  }
  bw.best = kAllBell[hi];
  bw.worst = kAllBell[lo];
  return bw;
}

}  // namespace qtl
