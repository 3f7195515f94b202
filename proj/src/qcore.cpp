#include "qtelelab/qcore.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qtl {

namespace {

std::size_t dim_of(int n) { return std::size_t{1} << n; }

void check_n(int n) {
  if (n < 1 || n > 16) throw std::invalid_argument("qubit count out of range");
}

// Offsets of the 2^k sub-indices spanned by `targets`, targets[0] being the high bit.
std::vector<std::size_t> offsets(int n, const std::vector<int>& targets) {
  const int k = static_cast<int>(targets.size());
  std::vector<std::size_t> off(dim_of(k), 0);
  for (std::size_t j = 0; j < off.size(); ++j) {
    std::size_t o = 0;
    for (int q = 0; q < k; ++q) {
      if ((j >> (k - 1 - q)) & 1U) o |= std::size_t{1} << (n - 1 - targets[q]);
    }
    off[j] = o;
  }
  return off;
}

std::size_t target_mask(int n, const std::vector<int>& targets) {
  std::size_t m = 0;
  for (int t : targets) m |= std::size_t{1} << (n - 1 - t);
  return m;
}

Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

StateVector::StateVector(int n, Vec amplitudes) : n_(n), amps_(std::move(amplitudes)) {
  check_n(n);
  if (static_cast<std::size_t>(amps_.size()) != dim_of(n))
    throw std::invalid_argument("amplitude count must be 2^n");
  if (std::abs(amps_.squaredNorm() - 1.0) > kBuildTol)
    throw std::invalid_argument("state vector is not normalized");
}

StateVector StateVector::basis(int n, std::size_t index) {
  check_n(n);
  if (index >= dim_of(n)) throw std::out_of_range("basis index");
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return {n, v};
}

StateVector StateVector::from_bits(const std::string& bits) {
  std::size_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit string must contain only 0/1");
    idx = (idx << 1) | static_cast<std::size_t>(c - '0');
  }
  return basis(static_cast<int>(bits.size()), idx);
}

StateVector StateVector::normalized(int n, Vec amplitudes) {
  const double nrm = amplitudes.norm();
  if (nrm < 1e-14) throw std::invalid_argument("cannot normalize a zero vector");
  return {n, amplitudes / nrm};
}

DensityOperator::DensityOperator(int n, Mat matrix) : n_(n), m_(std::move(matrix)) {
  check_n(n);
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  if (m_.rows() != d || m_.cols() != d) throw std::invalid_argument("density matrix must be 2^n x 2^n");
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kBuildTol)
    throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(m_.trace() - cplx(1.0)) > kBuildTol)
    throw std::invalid_argument("density matrix trace differs from 1");
}

DensityOperator DensityOperator::from_state(const StateVector& psi) {
  return {psi.n(), psi.amplitudes() * psi.amplitudes().adjoint()};
}

DensityOperator DensityOperator::maximally_mixed(int n) {
  check_n(n);
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  return {n, Mat::Identity(d, d) / static_cast<double>(d)};
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m_), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityOperator::validate() const {
  if (min_eigenvalue() < -kCompareTol) throw std::invalid_argument("density matrix is not PSD");
}

namespace gates {
Mat I() { return Mat::Identity(2, 2); }
Mat X() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Mat Y() {
  Mat m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Mat Z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
Mat iY() {
  Mat m(2, 2);
  m << 0, 1, -1, 0;
  return m;
}
Mat H() {
  const double s = 1.0 / std::sqrt(2.0);
  Mat m(2, 2);
  m << s, s, s, -s;
  return m;
}
Mat S() { return P(kPi / 2); }
Mat Sdg() { return P(-kPi / 2); }
Mat T() { return P(kPi / 4); }
Mat Tdg() { return P(-kPi / 4); }
Mat P(double theta) {
  Mat m(2, 2);
  m << 1, 0, 0, std::polar(1.0, theta);
  return m;
}
Mat Ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat m(2, 2);
  m << c, -s, s, c;
  return m;
}
Mat CNOT() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}
Mat SWAP() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  return m;
}
}  // namespace gates

StateVector bell_state(Bell b) {
  const double s = 1.0 / std::sqrt(2.0);
  Vec v = Vec::Zero(4);
  switch (b) {
    case Bell::PsiPlus: v << s, 0, 0, s; break;
    case Bell::PsiMinus: v << s, 0, 0, -s; break;
    case Bell::PhiPlus: v << 0, s, s, 0; break;
    case Bell::PhiMinus: v << 0, s, -s, 0; break;
  }
  return {2, v};
}

Mat bell_projector(Bell b) {
  const Vec v = bell_state(b).amplitudes();
  return v * v.adjoint();
}

std::string to_string(Bell b) {
  switch (b) {
    case Bell::PsiPlus: return "psi+";
    case Bell::PsiMinus: return "psi-";
    case Bell::PhiPlus: return "phi+";
    case Bell::PhiMinus: return "phi-";
  }
  return "?";
}

Bell bell_from_string(const std::string& s) {
  for (Bell b : kAllBell)
    if (to_string(b) == s) return b;
  throw std::invalid_argument("unknown Bell label: " + s);
}

int bell_bits(Bell b) {
  switch (b) {
    case Bell::PsiPlus: return 0b00;
    case Bell::PhiPlus: return 0b01;
    case Bell::PsiMinus: return 0b10;
    case Bell::PhiMinus: return 0b11;
  }
  return 0;
}

Bell bell_from_bits(int bits) {
  static constexpr Bell table[4] = {Bell::PsiPlus, Bell::PhiPlus, Bell::PsiMinus, Bell::PhiMinus};
  return table[bits & 3];
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  return {a.n() + b.n(), kron(a.amplitudes(), b.amplitudes())};
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return {a.n() + b.n(), kron(a.matrix(), b.matrix())};
}

namespace kernel {

void check_targets(int n, const std::vector<int>& targets) {
  if (targets.empty()) throw std::invalid_argument("empty target list");
  std::set<int> seen;
  for (int t : targets) {
    if (t < 0 || t >= n) throw std::out_of_range("target qubit out of range");
    if (!seen.insert(t).second) throw std::invalid_argument("duplicate target qubit");
  }
}

void left(Vec& v, int n, const Mat& op, const std::vector<int>& targets) {
  const auto off = offsets(n, targets);
  const std::size_t mask = target_mask(n, targets);
  const auto k = static_cast<Eigen::Index>(off.size());
  Vec tmp(k), res(k);
  for (std::size_t base = 0; base < dim_of(n); ++base) {
    if (base & mask) continue;
    for (Eigen::Index j = 0; j < k; ++j) tmp(j) = v(static_cast<Eigen::Index>(base + off[j]));
    res.noalias() = op * tmp;
    for (Eigen::Index j = 0; j < k; ++j) v(static_cast<Eigen::Index>(base + off[j])) = res(j);
  }
}

void left(Mat& m, int n, const Mat& op, const std::vector<int>& targets) {
  const auto off = offsets(n, targets);
  const std::size_t mask = target_mask(n, targets);
  const auto k = static_cast<Eigen::Index>(off.size());
  Mat tmp(k, m.cols());
  for (std::size_t base = 0; base < dim_of(n); ++base) {
    if (base & mask) continue;
    for (Eigen::Index j = 0; j < k; ++j) tmp.row(j) = m.row(static_cast<Eigen::Index>(base + off[j]));
    Mat res = op * tmp;
    for (Eigen::Index j = 0; j < k; ++j) m.row(static_cast<Eigen::Index>(base + off[j])) = res.row(j);
  }
}

void right_adjoint(Mat& m, int n, const Mat& op, const std::vector<int>& targets) {
  const auto off = offsets(n, targets);
  const std::size_t mask = target_mask(n, targets);
  const auto k = static_cast<Eigen::Index>(off.size());
  const Mat opa = op.adjoint();
  Mat tmp(m.rows(), k);
  for (std::size_t base = 0; base < dim_of(n); ++base) {
    if (base & mask) continue;
    for (Eigen::Index j = 0; j < k; ++j) tmp.col(j) = m.col(static_cast<Eigen::Index>(base + off[j]));
    Mat res = tmp * opa;
    for (Eigen::Index j = 0; j < k; ++j) m.col(static_cast<Eigen::Index>(base + off[j])) = res.col(j);
  }
}

}  // namespace kernel

bool is_unitary(const Mat& U, double tol) {
  if (U.rows() != U.cols()) return false;
  return ((U.adjoint() * U) - Mat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() <= tol;
}

Mat lift(const Mat& op, int n, const std::vector<int>& targets) {
  kernel::check_targets(n, targets);
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  Mat out = Mat::Identity(d, d);
  kernel::left(out, n, op, targets);
  return out;
}

namespace {
void check_gate(int n, const Mat& U, const std::vector<int>& targets) {
  kernel::check_targets(n, targets);
  if (U.rows() != static_cast<Eigen::Index>(dim_of(static_cast<int>(targets.size()))))
    throw std::invalid_argument("operator size does not match target count");
  if (!is_unitary(U)) throw std::invalid_argument("operator is not unitary");
}
}  // namespace

StateVector apply_unitary(const StateVector& psi, const Mat& U, const std::vector<int>& targets) {
  check_gate(psi.n(), U, targets);
  Vec v = psi.amplitudes();
  kernel::left(v, psi.n(), U, targets);
  return StateVector::normalized(psi.n(), v);
}

DensityOperator apply_unitary(const DensityOperator& rho, const Mat& U, const std::vector<int>& targets) {
  check_gate(rho.n(), U, targets);
  Mat m = rho.matrix();
  kernel::left(m, rho.n(), U, targets);
  kernel::right_adjoint(m, rho.n(), U, targets);
  return {rho.n(), hermitize(m)};
}

namespace {

struct SplitIndex {
  std::vector<std::size_t> kept;  // full-index contribution of each kept pattern
  std::vector<std::size_t> env;
};

SplitIndex split_index(int n, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("keep set is empty");
  kernel::check_targets(n, keep);
  std::vector<int> rest;
  for (int q = 0; q < n; ++q)
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);
  SplitIndex s;
  s.kept = offsets(n, keep);
  s.env = rest.empty() ? std::vector<std::size_t>{0} : offsets(n, rest);
  return s;
}

}  // namespace

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep) {
  const auto s = split_index(rho.n(), keep);
  const auto k = static_cast<Eigen::Index>(s.kept.size());
  Mat out = Mat::Zero(k, k);
  const Mat& m = rho.matrix();
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      cplx acc = 0;
      for (std::size_t e : s.env)
        acc += m(static_cast<Eigen::Index>(s.kept[a] | e), static_cast<Eigen::Index>(s.kept[b] | e));
      out(a, b) = acc;
    }
  return {static_cast<int>(keep.size()), hermitize(out)};
}

DensityOperator reduced_state(const StateVector& psi, const std::vector<int>& keep) {
  const auto s = split_index(psi.n(), keep);
  const auto k = static_cast<Eigen::Index>(s.kept.size());
  const auto e = static_cast<Eigen::Index>(s.env.size());
  Mat block(k, e);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index j = 0; j < e; ++j)
      block(a, j) = psi[s.kept[static_cast<std::size_t>(a)] | s.env[static_cast<std::size_t>(j)]];
  Mat out = block * block.adjoint();
  return {static_cast<int>(keep.size()), hermitize(out)};
}

std::vector<Mat> computational_projectors(int k) {
  const auto d = static_cast<Eigen::Index>(dim_of(k));
  std::vector<Mat> out;
  for (Eigen::Index i = 0; i < d; ++i) {
    Mat p = Mat::Zero(d, d);
    p(i, i) = 1;
    out.push_back(p);
  }
  return out;
}

namespace {

void check_projectors(const std::vector<Mat>& projectors, std::size_t k) {
  const auto d = static_cast<Eigen::Index>(dim_of(static_cast<int>(k)));
  if (projectors.empty()) throw std::invalid_argument("empty projector set");
  Mat sum = Mat::Zero(d, d);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const Mat& p = projectors[i];
    if (p.rows() != d || p.cols() != d) throw std::invalid_argument("projector dimension mismatch");
    if ((p * p - p).cwiseAbs().maxCoeff() > kBuildTol || (p - p.adjoint()).cwiseAbs().maxCoeff() > kBuildTol)
      throw std::invalid_argument("operator is not an orthogonal projector");
    for (std::size_t j = i + 1; j < projectors.size(); ++j)
      if ((p * projectors[j]).cwiseAbs().maxCoeff() > kBuildTol)
        throw std::invalid_argument("projectors are not mutually orthogonal");
    sum += p;
  }
  if ((sum - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > kBuildTol)
    throw std::invalid_argument("projectors do not sum to identity");
}

constexpr double kZeroProb = 1e-14;

}  // namespace

std::vector<Branch<StateVector>> measure_projective(const StateVector& psi,
                                                    const std::vector<Mat>& projectors,
                                                    const std::vector<int>& targets) {
  kernel::check_targets(psi.n(), targets);
  check_projectors(projectors, targets.size());
  std::vector<Branch<StateVector>> out;
  for (const Mat& p : projectors) {
    Vec v = psi.amplitudes();
    kernel::left(v, psi.n(), p, targets);
    Branch<StateVector> b;
    b.probability = v.squaredNorm();
    if (b.probability > kZeroProb) b.state = StateVector::normalized(psi.n(), v);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Branch<DensityOperator>> measure_projective(const DensityOperator& rho,
                                                        const std::vector<Mat>& projectors,
                                                        const std::vector<int>& targets) {
  kernel::check_targets(rho.n(), targets);
  check_projectors(projectors, targets.size());
  std::vector<Branch<DensityOperator>> out;
  for (const Mat& p : projectors) {
    Mat m = rho.matrix();
    kernel::left(m, rho.n(), p, targets);
    kernel::right_adjoint(m, rho.n(), p, targets);
    Branch<DensityOperator> b;
    b.probability = std::max(0.0, m.trace().real());
    if (b.probability > kZeroProb) b.state = DensityOperator(rho.n(), hermitize(m) / b.probability);
    out.push_back(std::move(b));
  }
  return out;
}

namespace {

// Eigenvalues at round-off level are zeroed before the square root.
Eigen::VectorXd clipped_sqrt(const Eigen::VectorXd& ev) {
  const double floor = 1e-13 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
}

}  // namespace

Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(m));
  Eigen::VectorXd ev = clipped_sqrt(es.eigenvalues());
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const Mat& rho1, const Mat& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const Mat s = psd_sqrt(rho1);
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(s * rho2 * s), Eigen::EigenvaluesOnly);
  return clipped_sqrt(es.eigenvalues()).sum();
}

double fidelity(const DensityOperator& rho1, const DensityOperator& rho2) {
  if (rho1.n() != rho2.n()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::clamp(fidelity(rho1.matrix(), rho2.matrix()), 0.0, 1.0);
}

double overlap(const StateVector& a, const StateVector& b) {
  if (a.n() != b.n()) throw std::invalid_argument("overlap: dimension mismatch");
  return std::abs(a.amplitudes().dot(b.amplitudes()));
}

double concurrence(const StateVector& psi) {
  if (psi.n() != 2) throw std::invalid_argument("concurrence requires a two-qubit state");
  return 2.0 * std::abs(psi[0] * psi[3] - psi[1] * psi[2]);
}

double maximal_singlet_fraction(const DensityOperator& rho) {
  if (rho.n() != 2) throw std::invalid_argument("singlet fraction requires a two-qubit state");
  double best = 0.0;
  for (Bell b : kAllBell) {
    const Vec v = bell_state(b).amplitudes();
    best = std::max(best, v.dot(rho.matrix() * v).real());
  }
  return best;
}

StateVector bloch_state(const BlochPoint& p) {
  Vec v(2);
  v << std::cos(p.theta_p / 2), std::polar(1.0, p.phi_p) * std::sin(p.theta_p / 2);
  return StateVector::normalized(1, v);
}

}  // namespace qtl
