#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace fdpv {

using PsiSequence = Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>;

/// Second finite differences: out[k] = x[k+2] - 2 x[k+1] + x[k].
Eigen::ArrayXd second_order_increments(const Eigen::Ref<const Eigen::ArrayXd>& path);

/// Sign-agreement indicator; sign(z) = +1 for z >= 0.
inline int psi(double x, double y) { return ((x >= 0.0) == (y >= 0.0)) ? 1 : 0; }

/// psi applied to consecutive second-order increments of a path; length
/// path.size() - 3.
PsiSequence psi_sequence(const Eigen::Ref<const Eigen::ArrayXd>& path);

struct IbsValue {
  double value = 0.0;          // agreement fraction in [0,1]
  Eigen::Index n_pairs = 0;    // psi terms averaged
};

/// Fraction of consecutive second-order-increment pairs with agreeing
/// signs. Single pass, O(n) time.
IbsValue ibs(const Eigen::Ref<const Eigen::ArrayXd>& path);

/// Correlation of two successive second-order increments of fBm:
/// rho(H) = (-3^{2H} + 2^{2H+2} - 7) / (8 - 2^{2H+1}); rho(1) = 0 by the
/// cancellation of the numerator at the endpoint.
double rho(double hurst);

/// Lambda(H) = arccos(-rho(H)) / pi, the expected sign-agreement
/// probability; strictly increasing in H.
double lambda_of_hurst(double hurst);

/// d Lambda / dH via the closed-form chain rule.
double lambda_derivative(double hurst);

struct HurstInversion {
  double hurst;
  bool clamped;  // lambda_value fell outside the attainable range
};

/// Inverts Lambda by safeguarded Newton iteration; |Lambda(H) - lambda| <=
/// 1e-10 when unclamped. Values below Lambda(0+) clamp to 0.001, values at
/// or above the H->1 limit clamp to 1.0, with the flag set.
HurstInversion hurst_of_lambda(double lambda_value);

struct VarianceTable {
  std::string mode;            // "mc" or "sum"
  Eigen::Index series_length = 0;   // mc: path length per replicate
  int replicates = 0;          // mc: replicate count
  int truncation = 0;          // sum: lag cutoff J
  long pool_size = 0;          // sum: Monte-Carlo pool size
  std::uint64_t seed = 0;
  std::vector<std::pair<double, double>> grid;  // (hurst, sigma^2), increasing

  // Linear interpolation in hurst; out-of-grid values clamp to the nearest
  // grid point and set *clamped when provided.
  double sigma_squared(double hurst, bool* clamped = nullptr) const;
};

struct HurstEstimate {
  double hurst = 0.0;
  IbsValue ibs;
  double std_error = 0.0;
  bool clamped = false;
};

/// Hurst estimate via Lambda inversion of the path's IBS; the standard
/// error is sqrt(sigma^2(H_hat) / n_pairs) with sigma^2 interpolated from
/// the table.
HurstEstimate estimate_hurst(const Eigen::Ref<const Eigen::ArrayXd>& path,
                             const VarianceTable& table);

struct VarianceCalibConfig {
  std::string mode = "mc";          // "mc" or "sum"
  Eigen::Index series_length = 16384;  // mc
  int replicates = 2000;            // mc
  int truncation = 20;              // sum: J
  long pool_size = 1'000'000;       // sum
  std::uint64_t seed = 0;
};

/// Asymptotic variance sigma^2(H) of the IBS CLT on a hurst grid.
/// Mode "mc": n_pairs * Var(IBS) over exact fBm replicates. Mode "sum":
/// truncated covariance series of the psi terms, each covariance estimated
/// from a common pool of exact second-order-increment vectors.
/// Throws std::runtime_error if any estimate is non-positive.
VarianceTable calibrate_variance(const std::vector<double>& hurst_grid,
                                 const VarianceCalibConfig& config);

}  // namespace fdpv
