#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace rase {

// Tolerances for state validity checks. Vacuum variance is normalized to 1,
// so a physical covariance has every symplectic eigenvalue >= 1.
inline constexpr double kCovSymmetryTol = 1e-12;
inline constexpr double kPhysicalityTol = 1e-9;

/// Gaussian state of N bosonic modes: quadrature mean vector (length 2N) and
/// covariance matrix (2N x 2N), ordered (x1, p1, x2, p2, ...).
///
/// Values are immutable once built; all transforms return new states, so
/// states can be shared freely between threads.
class GaussianState {
 public:
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                std::vector<std::string> mode_labels);

  static GaussianState vacuum(int n_modes);
  static GaussianState vacuum(int n_modes, std::vector<std::string> mode_labels);

  int num_modes() const { return static_cast<int>(labels_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const std::vector<std::string>& mode_labels() const { return labels_; }

  // Covariance entry between quadrature comp_i (0 = x, 1 = p) of mode_i and
  // comp_j of mode_j.
  double cov_entry(int mode_i, int comp_i, int mode_j, int comp_j) const;

  // Throws NumericalError if the covariance is asymmetric beyond tolerance or
  // any symplectic eigenvalue falls below 1 - kPhysicalityTol.
  void check_valid() const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  std::vector<std::string> labels_;
};

/// Pure-loss channel: transmission t on one mode, vacuum mixed in through the
/// open port.
struct LossChannel {
  LossChannel(double transmission, int target_mode);
  double transmission;
  int target_mode;
};

/// Two-mode squeezing parameters. The sign convention is fixed so that on
/// vacuum the x quadratures come out anticorrelated and the p quadratures
/// correlated; the EPR combinations sqrt(b) x_a + sqrt(1-b) x_b and
/// sqrt(b) p_a - sqrt(1-b) p_b are then the squeezed ones.
struct SqueezeParams {
  SqueezeParams(double r, int mode_a, int mode_b);
  double r;
  int mode_a;
  int mode_b;
};

GaussianState two_mode_squeeze(const GaussianState& state, const SqueezeParams& p);

GaussianState apply_loss(const GaussianState& state, const LossChannel& ch);

struct QuadratureStats {
  double var_x;
  double var_p;
  double cov_xp;
};

QuadratureStats quadrature_stats(const GaussianState& state, int mode);

// The N symplectic eigenvalues of the covariance matrix, ascending. All are
// 1 for pure states and >= 1 for any physical state.
Eigen::VectorXd symplectic_eigenvalues(const GaussianState& state);

}  // namespace rase
