#include "rase/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rase/errors.hpp"

namespace rase {

namespace {

void require_mode(const GaussianState& state, int mode, const char* who) {
  if (mode < 0 || mode >= state.num_modes()) {
    throw std::invalid_argument(std::string(who) + ": mode index " +
                                std::to_string(mode) + " out of range for " +
                                std::to_string(state.num_modes()) + " modes");
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                             std::vector<std::string> mode_labels)
    : mean_(std::move(mean)), cov_(std::move(cov)), labels_(std::move(mode_labels)) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (n < 1) throw std::invalid_argument("GaussianState: need at least one mode");
  if (mean_.size() != 2 * n || cov_.rows() != 2 * n || cov_.cols() != 2 * n) {
    throw std::invalid_argument("GaussianState: mean/cov dimensions do not match labels");
  }
}

GaussianState GaussianState::vacuum(int n_modes) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(std::max(n_modes, 0)));
  for (int i = 0; i < n_modes; ++i) labels.push_back("mode" + std::to_string(i));
  return vacuum(n_modes, std::move(labels));
}

GaussianState GaussianState::vacuum(int n_modes, std::vector<std::string> mode_labels) {
  if (n_modes < 1) throw std::invalid_argument("vacuum: n_modes must be >= 1");
  if (static_cast<int>(mode_labels.size()) != n_modes) {
    throw std::invalid_argument("vacuum: label count does not match n_modes");
  }
  return GaussianState(Eigen::VectorXd::Zero(2 * n_modes),
                       Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes),
                       std::move(mode_labels));
}

double GaussianState::cov_entry(int mode_i, int comp_i, int mode_j, int comp_j) const {
  require_mode(*this, mode_i, "cov_entry");
  require_mode(*this, mode_j, "cov_entry");
  if ((comp_i != 0 && comp_i != 1) || (comp_j != 0 && comp_j != 1)) {
    throw std::invalid_argument("cov_entry: quadrature component must be 0 (x) or 1 (p)");
  }
  return cov_(2 * mode_i + comp_i, 2 * mode_j + comp_j);
}

void GaussianState::check_valid() const {
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kCovSymmetryTol * scale) {
    throw NumericalError("GaussianState: covariance asymmetric beyond tolerance");
  }
  const Eigen::VectorXd nu = symplectic_eigenvalues(*this);
  if (nu.minCoeff() < 1.0 - kPhysicalityTol) {
    throw NumericalError("GaussianState: covariance violates the physicality bound");
  }
}

LossChannel::LossChannel(double transmission_, int target_mode_)
    : transmission(transmission_), target_mode(target_mode_) {
  if (!(transmission >= 0.0 && transmission <= 1.0)) {
    throw std::invalid_argument("LossChannel: transmission must lie in [0, 1]");
  }
  if (target_mode < 0) throw std::invalid_argument("LossChannel: negative mode index");
}

SqueezeParams::SqueezeParams(double r_, int mode_a_, int mode_b_)
    : r(r_), mode_a(mode_a_), mode_b(mode_b_) {
  if (r < 0.0) throw std::invalid_argument("SqueezeParams: r must be >= 0");
  if (mode_a < 0 || mode_b < 0) throw std::invalid_argument("SqueezeParams: negative mode index");
  if (mode_a == mode_b) throw std::invalid_argument("SqueezeParams: modes must be distinct");
}

GaussianState two_mode_squeeze(const GaussianState& state, const SqueezeParams& p) {
  require_mode(state, p.mode_a, "two_mode_squeeze");
  require_mode(state, p.mode_b, "two_mode_squeeze");
  const Eigen::Index dim = state.cov().rows();
  const double c = std::cosh(p.r);
  const double s = std::sinh(p.r);

  Eigen::MatrixXd sp = Eigen::MatrixXd::Identity(dim, dim);
  const int ax = 2 * p.mode_a, ap = ax + 1;
  const int bx = 2 * p.mode_b, bp = bx + 1;
  sp(ax, ax) = c;
  sp(ap, ap) = c;
  sp(bx, bx) = c;
  sp(bp, bp) = c;
  // Off-diagonal blocks -sinh(r) * diag(1, -1).
  sp(ax, bx) = -s;
  sp(bx, ax) = -s;
  sp(ap, bp) = s;
  sp(bp, ap) = s;

  return GaussianState(sp * state.mean(), symmetrized(sp * state.cov() * sp.transpose()),
                       state.mode_labels());
}

GaussianState apply_loss(const GaussianState& state, const LossChannel& ch) {
  require_mode(state, ch.target_mode, "apply_loss");
  const Eigen::Index dim = state.cov().rows();
  const double rt = std::sqrt(ch.transmission);
  const int mx = 2 * ch.target_mode, mp = mx + 1;

  Eigen::VectorXd scale = Eigen::VectorXd::Ones(dim);
  scale(mx) = rt;
  scale(mp) = rt;

  Eigen::MatrixXd cov = scale.asDiagonal() * state.cov() * scale.asDiagonal();
  cov(mx, mx) += 1.0 - ch.transmission;
  cov(mp, mp) += 1.0 - ch.transmission;

  Eigen::VectorXd mean = state.mean();
  mean(mx) *= rt;
  mean(mp) *= rt;

  return GaussianState(std::move(mean), symmetrized(cov), state.mode_labels());
}

QuadratureStats quadrature_stats(const GaussianState& state, int mode) {
  require_mode(state, mode, "quadrature_stats");
  return QuadratureStats{state.cov()(2 * mode, 2 * mode),
                         state.cov()(2 * mode + 1, 2 * mode + 1),
                         state.cov()(2 * mode, 2 * mode + 1)};
}

Eigen::VectorXd symplectic_eigenvalues(const GaussianState& state) {
  const Eigen::MatrixXd& cov = state.cov();
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kCovSymmetryTol * scale) {
    throw NumericalError("symplectic_eigenvalues: covariance is not symmetric");
  }

  const Eigen::Index dim = cov.rows();
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index m = 0; m < dim; m += 2) {
    omega(m, m + 1) = 1.0;
    omega(m + 1, m) = -1.0;
  }

  // Eigenvalues of Omega * cov come in +/- i nu pairs; |.| recovers nu twice.
  Eigen::EigenSolver<Eigen::MatrixXd> solver(omega * cov, /*computeEigenvectors=*/false);
  std::vector<double> mags(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    mags[static_cast<std::size_t>(i)] = std::abs(solver.eigenvalues()(i));
  }
  std::sort(mags.begin(), mags.end());

  Eigen::VectorXd nu(dim / 2);
  for (Eigen::Index j = 0; j < dim / 2; ++j) {
    nu(j) = 0.5 * (mags[static_cast<std::size_t>(2 * j)] +
                   mags[static_cast<std::size_t>(2 * j + 1)]);
  }
  return nu;
}

}  // namespace rase
