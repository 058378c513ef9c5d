#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace fdpv {

/// Autocovariance of fractional Gaussian noise at integer lag:
/// gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2, with gamma(0) = 1.
double fgn_autocovariance(double hurst, Eigen::Index lag);

struct FgnOptions {
  // Relative tolerance on negative circulant eigenvalues before the
  // embedding is declared invalid.
  double eig_tolerance = 1e-10;
  // Largest length handled by the dense Cholesky fallback.
  Eigen::Index dense_cap = 4096;
};

// Exact sampler for stationary fGn of a fixed (hurst, length).
// The circulant embedding is diagonalized once at construction; each
// sample() is then one FFT. Falls back to a dense Cholesky factorization
// for short lengths when the embedding fails.
class FgnSampler {
 public:
  FgnSampler(double hurst, Eigen::Index length, const FgnOptions& options = {});

  // Draws one exact fGn path; deterministic in seed.
  Eigen::ArrayXd sample(std::uint64_t seed) const;

  double hurst() const { return hurst_; }
  Eigen::Index length() const { return length_; }
  bool uses_dense_fallback() const { return dense_; }

 private:
  double hurst_;
  Eigen::Index length_;
  bool dense_ = false;
  Eigen::ArrayXd spectrum_scale_;  // sqrt(lambda_j / g), circulant branch
  Eigen::MatrixXd cholesky_;       // lower factor, dense branch
};

struct SegmentSpec {
  double hurst;         // in (0,1)
  double scale;         // sigma, > 0
  Eigen::Index length;  // increments contributed by the segment, >= 2
};

struct PiecewiseModel {
  std::vector<SegmentSpec> segments;

  // Samples including t_0; equals 1 + sum of segment lengths.
  Eigen::Index total_samples() const;
  // Indices tau_1..tau_K of the change points (cumulative segment ends).
  std::vector<Eigen::Index> change_indices() const;
  // Throws std::invalid_argument naming the offending segment.
  void validate() const;
};

/// fBm sampled at t_i = i/n, n = n_samples - 1: X(t_0) = 0 and the
/// increments are fGn scaled by scale * n^{-hurst}, so that
/// Var(X(t_{i+1}) - X(t_i)) = scale^2 * (1/n)^{2*hurst}.
Eigen::ArrayXd simulate_fbm(double hurst, double scale, Eigen::Index n_samples,
                            std::uint64_t seed, const FgnOptions& options = {});

struct PiecewisePath {
  Eigen::ArrayXd values;
  std::vector<Eigen::Index> change_indices;
};

/// Piecewise fBm: segment k carries (H_k, sigma_k) on its own interval,
/// increments scaled by sigma_k * n^{-H_k} with the global mesh n, and an
/// additive shift joins consecutive segments continuously. Segment k uses
/// derive_seed(seed, k).
PiecewisePath simulate_piecewise_fbm(const PiecewiseModel& model, std::uint64_t seed,
                                     const FgnOptions& options = {});

}  // namespace fdpv
