#include "fdpv/ibs.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fdpv/common.hpp"
#include "fdpv/fgn.hpp"

namespace fdpv {

Eigen::ArrayXd second_order_increments(const Eigen::Ref<const Eigen::ArrayXd>& path) {
  if (path.size() < 3)
    throw std::invalid_argument("second_order_increments: need at least 3 samples");
  const Eigen::Index m = path.size() - 2;
  return path.tail(m) - 2.0 * path.segment(1, m) + path.head(m);
}

PsiSequence psi_sequence(const Eigen::Ref<const Eigen::ArrayXd>& path) {
  if (path.size() < 4)
    throw std::invalid_argument("psi_sequence: need at least 4 samples");
  const Eigen::Index p = path.size() - 3;
  PsiSequence out(p);
  // Streamed to avoid materializing the increments buffer.
  double prev = path[2] - 2.0 * path[1] + path[0];
  for (Eigen::Index k = 0; k < p; ++k) {
    const double cur = path[k + 3] - 2.0 * path[k + 2] + path[k + 1];
    out[k] = static_cast<std::uint8_t>(psi(prev, cur));
    prev = cur;
  }
  return out;
}

IbsValue ibs(const Eigen::Ref<const Eigen::ArrayXd>& path) {
  PsiSequence seq = psi_sequence(path);
  Eigen::Index agreements = 0;
  for (Eigen::Index k = 0; k < seq.size(); ++k) agreements += seq[k];
  return {static_cast<double>(agreements) / static_cast<double>(seq.size()),
          seq.size()};
}

double rho(double hurst) {
  if (!(hurst > 0.0 && hurst <= 1.0))
    throw std::domain_error("rho: hurst must lie in (0,1]");
  if (hurst == 1.0) return 0.0;  // numerator -9 + 16 - 7 cancels
  const double h2 = 2.0 * hurst;
  const double num = -std::pow(3.0, h2) + std::pow(2.0, h2 + 2.0) - 7.0;
  const double den = 8.0 - std::pow(2.0, h2 + 1.0);
  return num / den;
}

double lambda_of_hurst(double hurst) {
  return std::acos(-rho(hurst)) / M_PI;
}

double lambda_derivative(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("lambda_derivative: hurst must lie in (0,1)");
  const double h2 = 2.0 * hurst;
  const double ln3 = std::log(3.0);
  const double ln2 = std::log(2.0);
  const double num = -std::pow(3.0, h2) + std::pow(2.0, h2 + 2.0) - 7.0;
  const double den = 8.0 - std::pow(2.0, h2 + 1.0);
  const double dnum = -2.0 * ln3 * std::pow(3.0, h2) + 2.0 * ln2 * std::pow(2.0, h2 + 2.0);
  const double dden = -2.0 * ln2 * std::pow(2.0, h2 + 1.0);
  const double r = num / den;
  const double dr = (dnum * den - num * dden) / (den * den);
  return dr / (M_PI * std::sqrt(1.0 - r * r));
}

namespace {

// Attainable open range of Lambda on (0,1): Lambda(0+) = arccos(2/3)/pi and
// the H->1 limit of rho is (9 ln 9 - 16 ln 4) / (8 ln 4) by l'Hopital.
double lambda_lower() { return std::acos(2.0 / 3.0) / M_PI; }
double lambda_upper() {
  const double r = (9.0 * std::log(9.0) - 16.0 * std::log(4.0)) / (8.0 * std::log(4.0));
  return std::acos(-r) / M_PI;
}

}  // namespace

HurstInversion hurst_of_lambda(double lambda_value) {
  constexpr double kLowSurrogate = 0.001;
  if (lambda_value <= lambda_of_hurst(kLowSurrogate)) return {kLowSurrogate, true};
  if (lambda_value >= lambda_upper()) return {1.0, true};

  double lo = kLowSurrogate;
  double hi = 1.0 - 1e-12;
  double h = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double f = lambda_of_hurst(h) - lambda_value;
    if (std::abs(f) <= 1e-10) return {h, false};
    if (f > 0.0)
      hi = h;
    else
      lo = h;
    const double step = f / lambda_derivative(h);
    double next = h - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
    h = next;
  }
  return {h, false};
}

double VarianceTable::sigma_squared(double hurst, bool* clamped) const {
  if (grid.empty()) throw std::runtime_error("VarianceTable: empty grid");
  if (clamped) *clamped = false;
  if (hurst <= grid.front().first) {
    if (clamped && hurst < grid.front().first) *clamped = true;
    return grid.front().second;
  }
  if (hurst >= grid.back().first) {
    if (clamped && hurst > grid.back().first) *clamped = true;
    return grid.back().second;
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (hurst <= grid[i].first) {
      const auto& [h0, s0] = grid[i - 1];
      const auto& [h1, s1] = grid[i];
      const double t = (hurst - h0) / (h1 - h0);
      return s0 + t * (s1 - s0);
    }
  }
  return grid.back().second;
}

HurstEstimate estimate_hurst(const Eigen::Ref<const Eigen::ArrayXd>& path,
                             const VarianceTable& table) {
  HurstEstimate est;
  est.ibs = ibs(path);
  HurstInversion inv = hurst_of_lambda(est.ibs.value);
  est.hurst = inv.hurst;
  bool table_clamped = false;
  const double s2 = table.sigma_squared(est.hurst, &table_clamped);
  est.std_error = std::sqrt(s2 / static_cast<double>(est.ibs.n_pairs));
  est.clamped = inv.clamped || table_clamped;
  return est;
}

namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("calibrate_variance: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0))
      throw std::domain_error("calibrate_variance: grid point outside (0,1)");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw std::invalid_argument("calibrate_variance: grid must be strictly increasing");
  }
}

// n_pairs * Var(IBS) over exact replicates. psi terms are computed from the
// fGn first differences directly; the cumulative sum is not needed because
// second path differences equal first noise differences.
double sigma_squared_mc(double hurst, Eigen::Index n_samples, int replicates,
                        std::uint64_t seed) {
  const Eigen::Index n_noise = n_samples - 1;
  const Eigen::Index n_pairs = n_samples - 3;
  FgnSampler sampler(hurst, n_noise);
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < replicates; ++r) {
    Eigen::ArrayXd noise = sampler.sample(derive_seed(seed, r));
    Eigen::Index agreements = 0;
    bool prev = (noise[1] - noise[0]) >= 0.0;
    for (Eigen::Index k = 1; k < n_noise - 1; ++k) {
      const bool cur = (noise[k + 1] - noise[k]) >= 0.0;
      agreements += (cur == prev);
      prev = cur;
    }
    const double v = static_cast<double>(agreements) / static_cast<double>(n_pairs);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / replicates;
  const double var = (sumsq - replicates * mean * mean) / (replicates - 1);
  return static_cast<double>(n_pairs) * var;
}

// Truncated covariance series sum_{|j|<=J} cov(psi_0, psi_j), each term
// estimated from a shared pool of exact second-order-increment vectors.
double sigma_squared_sum(double hurst, int truncation, long pool_size,
                         std::uint64_t seed) {
  const int J = truncation;
  const Eigen::Index len = J + 3;  // fGn values G_0..G_{J+2}
  Eigen::MatrixXd cov(len, len);
  for (Eigen::Index i = 0; i < len; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = fgn_autocovariance(hurst, i - j);
  Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(len), g(len);
  std::vector<long> ones(J + 1, 0), joint(J + 1, 0);
  std::vector<int> bits(J + 1);
  for (long v = 0; v < pool_size; ++v) {
    for (Eigen::Index i = 0; i < len; ++i) z[i] = gauss(rng);
    g.noalias() = chol * z;
    bool prev = (g[1] - g[0]) >= 0.0;
    for (int j = 0; j <= J; ++j) {
      const bool cur = (g[j + 2] - g[j + 1]) >= 0.0;
      bits[j] = (cur == prev);
      prev = cur;
    }
    for (int j = 0; j <= J; ++j) {
      ones[j] += bits[j];
      joint[j] += bits[0] & bits[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(pool_size);
  double total = 0.0;
  for (int j = 0; j <= J; ++j) {
    const double c = joint[j] * inv - (ones[0] * inv) * (ones[j] * inv);
    total += (j == 0) ? c : 2.0 * c;  // stationarity covers negative lags
  }
  return total;
}

}  // namespace

VarianceTable calibrate_variance(const std::vector<double>& hurst_grid,
                                 const VarianceCalibConfig& config) {
  validate_grid(hurst_grid);
  VarianceTable table;
  table.mode = config.mode;
  table.seed = config.seed;
  if (config.mode == "mc") {
    if (config.replicates < 2)
      throw std::invalid_argument("calibrate_variance: mc mode needs replicates >= 2");
    if (config.series_length < 8)
      throw std::invalid_argument("calibrate_variance: series_length too short");
    table.series_length = config.series_length;
    table.replicates = config.replicates;
  } else if (config.mode == "sum") {
    if (config.truncation < 1 || config.pool_size < 1000)
      throw std::invalid_argument("calibrate_variance: sum mode needs J >= 1, pool >= 1000");
    table.truncation = config.truncation;
    table.pool_size = config.pool_size;
  } else {
    throw std::invalid_argument("calibrate_variance: unknown mode '" + config.mode + "'");
  }

  for (std::size_t i = 0; i < hurst_grid.size(); ++i) {
    const double h = hurst_grid[i];
    const std::uint64_t hs = derive_seed(config.seed, i);
    const double s2 = (config.mode == "mc")
                          ? sigma_squared_mc(h, config.series_length, config.replicates, hs)
                          : sigma_squared_sum(h, config.truncation, config.pool_size, hs);
    if (!(s2 > 0.0))
      throw std::runtime_error("calibrate_variance: non-positive estimate, "
                               "insufficient replicates");
    table.grid.emplace_back(h, s2);
  }
  return table;
}

}  // namespace fdpv
