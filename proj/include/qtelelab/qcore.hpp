#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace qtl {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kBuildTol = 1e-10;
inline constexpr double kCompareTol = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

/// Pure state over n qubits. Qubit 0 is the most significant bit of the index.
class StateVector {
 public:
  StateVector(int n, Vec amplitudes);

  static StateVector basis(int n, std::size_t index);
  static StateVector from_bits(const std::string& bits);
  static StateVector normalized(int n, Vec amplitudes);

  int n() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Vec& amplitudes() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

 private:
  int n_;
  Vec amps_;
};

/// Hermitian, unit-trace operator. PSD is checked by validate().
class DensityOperator {
 public:
  DensityOperator(int n, Mat matrix);

  static DensityOperator from_state(const StateVector& psi);
  static DensityOperator maximally_mixed(int n);

  int n() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }

  /// Throws if the smallest eigenvalue is below -1e-9.
  void validate() const;
  double min_eigenvalue() const;

 private:
  int n_;
  Mat m_;
};

struct BlochPoint {
  double theta_p = 0.0;
  double phi_p = 0.0;
};

namespace gates {
Mat I();
Mat X();
Mat Y();
Mat Z();
Mat iY();
Mat H();
Mat S();
Mat Sdg();
Mat T();
Mat Tdg();
Mat P(double theta);
Mat Ry(double theta);
Mat CNOT();
Mat SWAP();
}  // namespace gates

enum class Bell { PsiPlus = 0, PsiMinus = 1, PhiPlus = 2, PhiMinus = 3 };

inline constexpr Bell kAllBell[4] = {Bell::PsiPlus, Bell::PsiMinus, Bell::PhiPlus, Bell::PhiMinus};

StateVector bell_state(Bell b);
Mat bell_projector(Bell b);
std::string to_string(Bell b);
Bell bell_from_string(const std::string& s);
/// Two-bit string produced by the reverse EPR circuit (CNOT then H).
int bell_bits(Bell b);
Bell bell_from_bits(int bits);

StateVector tensor(const StateVector& a, const StateVector& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
Mat kron(const Mat& a, const Mat& b);

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep);
/// Reduced density matrix of a pure state without forming the full projector.
DensityOperator reduced_state(const StateVector& psi, const std::vector<int>& keep);

StateVector apply_unitary(const StateVector& psi, const Mat& U, const std::vector<int>& targets);
DensityOperator apply_unitary(const DensityOperator& rho, const Mat& U, const std::vector<int>& targets);

bool is_unitary(const Mat& U, double tol = kBuildTol);
/// Embeds a k-qubit operator acting on `targets` into an n-qubit operator.
Mat lift(const Mat& op, int n, const std::vector<int>& targets);

namespace kernel {
void left(Vec& v, int n, const Mat& op, const std::vector<int>& targets);
void left(Mat& m, int n, const Mat& op, const std::vector<int>& targets);
/// m <- m * op^dagger on the column index.
void right_adjoint(Mat& m, int n, const Mat& op, const std::vector<int>& targets);
void check_targets(int n, const std::vector<int>& targets);
}  // namespace kernel

template <class State>
struct Branch {
  double probability = 0.0;
  std::optional<State> state;  // empty when the branch has zero probability
};

std::vector<Branch<StateVector>> measure_projective(const StateVector& psi,
                                                    const std::vector<Mat>& projectors,
                                                    const std::vector<int>& targets);
std::vector<Branch<DensityOperator>> measure_projective(const DensityOperator& rho,
                                                        const std::vector<Mat>& projectors,
                                                        const std::vector<int>& targets);
std::vector<Mat> computational_projectors(int k);

double fidelity(const DensityOperator& rho1, const DensityOperator& rho2);
double fidelity(const Mat& rho1, const Mat& rho2);
/// |<a|b>|, the fidelity between pure states (insensitive to global phase).
double overlap(const StateVector& a, const StateVector& b);
Mat psd_sqrt(const Mat& m);

double concurrence(const StateVector& psi);
double maximal_singlet_fraction(const DensityOperator& rho);

StateVector bloch_state(const BlochPoint& p);

}  // namespace qtl
