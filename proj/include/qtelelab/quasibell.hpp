#pragma once

#include "qtelelab/channels.hpp"
#include "qtelelab/qcore.hpp"

#include <array>
#include <optional>
#include <string>

namespace qtl {

/// Bell-like state of two nonorthogonal states |a>, |b> with <a|b> = r e^{i theta}.
/// The kind reuses the Bell labels: PsiPlus ~ |aa>+|bb>, PsiMinus ~ |aa>-|bb>,
/// PhiPlus ~ |ab>+|ba>, PhiMinus ~ |ab>-|ba>.
struct QuasiBellSpec {
  Bell kind = Bell::PsiPlus;
  double r = 0.0;
  double theta = 0.0;

  void validate() const;
};

/// Coefficients of the orthogonal-basis expansion. eta_coeff is the |00> weight of phi+.
struct QuasiCoefficients {
  cplx k_plus, l_plus, m_plus;
  cplx k_minus, l_minus, m_minus;
  cplx eta_coeff;
  double epsilon = 0.0;
  double N_plus = 0.0, N_minus = 0.0, M_plus = 0.0, M_minus = 0.0;
};

QuasiCoefficients quasi_coefficients(double r, double theta);
StateVector quasi_state(const QuasiBellSpec& spec);

/// Outcome-averaged teleportation map on Bob's side: lambda[2*i+j] = Lambda(|i><j|).
using TeleportMap = std::array<Mat, 4>;
TeleportMap teleport_map(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise = std::nullopt);
double pointwise_fidelity(const TeleportMap& lambda, const BlochPoint& p);

/// Full density-matrix simulation of one input state.
double pointwise_fidelity(const QuasiBellSpec& spec, const BlochPoint& p,
                          const std::optional<NoiseScenario>& noise = std::nullopt);

inline constexpr int kQuadratureNodes = 32;

/// Bloch-sphere average by Gauss-Legendre in cos(theta') and uniform nodes in phi'.
double average_fidelity(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise = std::nullopt);
double average_fidelity_closed_form(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise = std::nullopt);
/// Closed forms exactly as printed; differs from the above only where the printed entry is wrong.
double average_fidelity_printed(const QuasiBellSpec& spec, const std::optional<NoiseScenario>& noise = std::nullopt);

struct AverageFidelityCheck {
  double quadrature = 0.0;
  double closed_form = 0.0;
  double printed = 0.0;
  bool agrees = false;  // |quadrature - closed_form| < 1e-8
};
AverageFidelityCheck check_average_fidelity(const QuasiBellSpec& spec,
                                            const std::optional<NoiseScenario>& noise = std::nullopt);

struct MfiResult {
  double value = 0.0;
  BlochPoint argmin;
};
MfiResult mfi(const QuasiBellSpec& spec);
double mfi_closed_form(const QuasiBellSpec& spec);

double masfi(const QuasiBellSpec& spec);
double masfi_closed_form(const QuasiBellSpec& spec);

/// Overlap of the channel with its own Bell counterpart.
double singlet_fraction(const QuasiBellSpec& spec);
double singlet_fraction_closed_form(const QuasiBellSpec& spec);
/// (2f + 1) / 3 with f = singlet_fraction.
double optimal_fidelity(const QuasiBellSpec& spec);

inline constexpr double kClassicalFidelity = 2.0 / 3.0;

struct Threshold {
  double eta = 1.0;
  bool crosses = false;  // false: stays above 2/3 all the way to eta = 1
};
/// Bisection root of F_ave(eta) = 2/3 on [0, 1] to 1e-6; touching 2/3 exactly at eta = 1 counts as not crossing.
Threshold classical_threshold(const QuasiBellSpec& spec, NoiseModel model, const std::string& exposed);

struct BestWorst {
  Bell best = Bell::PsiPlus;
  Bell worst = Bell::PsiPlus;
  bool best_tied = false;
  bool worst_tied = false;
  std::array<double, 4> values{};
};
BestWorst best_worst_state(NoiseModel model, const std::string& exposed, double eta, double r, double theta);

}  // namespace qtl
