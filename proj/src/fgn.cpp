#include "fdpv/fgn.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fdpv/common.hpp"

namespace fdpv {

double fgn_autocovariance(double hurst, Eigen::Index lag) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("fgn_autocovariance: hurst must lie in (0,1)");
  if (lag < 0) throw std::domain_error("fgn_autocovariance: negative lag");
  const double k = static_cast<double>(lag);
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) +
                std::pow(std::abs(k - 1.0), h2));
}

namespace {

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FgnSampler::FgnSampler(double hurst, Eigen::Index length, const FgnOptions& options)
    : hurst_(hurst), length_(length) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("FgnSampler: hurst must lie in (0,1)");
  if (length < 1) throw std::invalid_argument("FgnSampler: length must be positive");

  // Circulant embedding of the Toeplitz covariance, padded to a power of
  // two: c = [gamma(0..m), gamma(m-1..1)], g = 2m.
  const Eigen::Index m = std::max<Eigen::Index>(next_pow2(length), 2);
  const Eigen::Index g = 2 * m;
  Eigen::VectorXd circ(g);
  for (Eigen::Index k = 0; k <= m; ++k) circ[k] = fgn_autocovariance(hurst, k);
  for (Eigen::Index k = m + 1; k < g; ++k) circ[k] = circ[g - k];

  Eigen::FFT<double> fft;
  Eigen::VectorXcd eigs(g);
  fft.fwd(eigs, circ);

  const double max_eig = eigs.real().maxCoeff();
  const double min_eig = eigs.real().minCoeff();
  if (min_eig >= -options.eig_tolerance * max_eig) {
    spectrum_scale_ =
        (eigs.real().array().max(0.0) / static_cast<double>(g)).sqrt();
    return;
  }

  // Embedding failed: dense route for short series only.
  if (length > options.dense_cap) {
    std::ostringstream msg;
    msg << "FgnSampler: circulant embedding has negative eigenvalue " << min_eig
        << " (max " << max_eig << ") and length " << length
        << " exceeds the dense fallback cap " << options.dense_cap;
    throw std::runtime_error(msg.str());
  }
  dense_ = true;
  Eigen::MatrixXd cov(length, length);
  for (Eigen::Index i = 0; i < length; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = fgn_autocovariance(hurst, i - j);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("FgnSampler: dense covariance factorization failed");
  cholesky_ = llt.matrixL();
}

Eigen::ArrayXd FgnSampler::sample(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;

  if (dense_) {
    Eigen::VectorXd z(length_);
    for (Eigen::Index i = 0; i < length_; ++i) z[i] = gauss(rng);
    return (cholesky_ * z).array();
  }

  const Eigen::Index g = spectrum_scale_.size();
  Eigen::VectorXcd a(g);
  for (Eigen::Index j = 0; j < g; ++j) {
    const double u = gauss(rng);
    const double v = gauss(rng);
    a[j] = spectrum_scale_[j] * std::complex<double>(u, v);
  }
  // With a_j = sqrt(lambda_j/g) (U_j + i V_j), the real part of the DFT of a
  // has exactly the target Toeplitz covariance.
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out(g);
  fft.fwd(out, a);
  return out.real().array().head(length_);
}

Eigen::Index PiecewiseModel::total_samples() const {
  Eigen::Index n = 1;
  for (const auto& s : segments) n += s.length;
  return n;
}

std::vector<Eigen::Index> PiecewiseModel::change_indices() const {
  std::vector<Eigen::Index> out;
  Eigen::Index acc = 0;
  for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
    acc += segments[k].length;
    out.push_back(acc);
  }
  return out;
}

void PiecewiseModel::validate() const {
  if (segments.empty())
    throw std::invalid_argument("PiecewiseModel: at least one segment required");
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    std::ostringstream msg;
    msg << "PiecewiseModel: segment " << k << ": ";
    if (!(s.hurst > 0.0 && s.hurst < 1.0)) {
      msg << "hurst " << s.hurst << " outside (0,1)";
      throw std::invalid_argument(msg.str());
    }
    if (!(s.scale > 0.0)) {
      msg << "scale " << s.scale << " must be positive";
      throw std::invalid_argument(msg.str());
    }
    if (s.length < 2) {
      msg << "length " << s.length << " must be >= 2";
      throw std::invalid_argument(msg.str());
    }
  }
}

Eigen::ArrayXd simulate_fbm(double hurst, double scale, Eigen::Index n_samples,
                            std::uint64_t seed, const FgnOptions& options) {
  if (!(scale > 0.0)) throw std::domain_error("simulate_fbm: scale must be positive");
  if (n_samples < 4) throw std::invalid_argument("simulate_fbm: need at least 4 samples");
  const Eigen::Index n = n_samples - 1;
  FgnSampler sampler(hurst, n, options);
  Eigen::ArrayXd noise = sampler.sample(seed);
  const double mesh_scale = scale * std::pow(static_cast<double>(n), -hurst);
  Eigen::ArrayXd path(n_samples);
  path[0] = 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += mesh_scale * noise[i];
    path[i + 1] = acc;
  }
  return path;
}

PiecewisePath simulate_piecewise_fbm(const PiecewiseModel& model, std::uint64_t seed,
                                     const FgnOptions& options) {
  model.validate();
  const Eigen::Index total = model.total_samples();
  const double n = static_cast<double>(total - 1);  // global mesh

  PiecewisePath out;
  out.values.resize(total);
  out.values[0] = 0.0;
  out.change_indices = model.change_indices();

  Eigen::Index pos = 1;
  double level = 0.0;  // additive continuity correction
  for (std::size_t k = 0; k < model.segments.size(); ++k) {
    const auto& seg = model.segments[k];
    FgnSampler sampler(seg.hurst, seg.length, options);
    Eigen::ArrayXd noise = sampler.sample(derive_seed(seed, k));
    const double mesh_scale = seg.scale * std::pow(n, -seg.hurst);
    for (Eigen::Index i = 0; i < seg.length; ++i) {
      level += mesh_scale * noise[i];
      out.values[pos++] = level;
    }
  }
  return out;
}

}  // namespace fdpv
