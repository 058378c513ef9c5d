#include "fdpv/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fdpv/common.hpp"
#include "fdpv/fgn.hpp"

namespace fdpv {

void DetectorConfig::validate(Eigen::Index series_length) const {
  if (window < 2) throw std::invalid_argument("DetectorConfig: window must be >= 2");
  if (2 * window + 3 >= series_length)
    throw std::invalid_argument("DetectorConfig: series too short for window");
  if (!(p1_star > 0.0 && p1_star <= 1.0))
    throw std::invalid_argument("DetectorConfig: p1_star outside (0,1]");
  if (!(p2_star > 0.0 && p2_star <= 1.0))
    throw std::invalid_argument("DetectorConfig: p2_star outside (0,1]");
  if (min_separation < 0)
    throw std::invalid_argument("DetectorConfig: negative min_separation");
  if (threshold_mode != "mc" && threshold_mode != "gaussian")
    throw std::invalid_argument("DetectorConfig: unknown threshold_mode '" +
                                threshold_mode + "'");
}

double windowed_ibs(const Eigen::Ref<const Eigen::ArrayXd>& path, Eigen::Index k,
                    Eigen::Index window) {
  if (window < 2) throw std::invalid_argument("windowed_ibs: window must be >= 2");
  const Eigen::Index pairs = path.size() - 3;
  if (k < -1 || k + window > pairs - 1)
    throw std::out_of_range("windowed_ibs: box outside the psi range");
  Eigen::Index agreements = 0;
  for (Eigen::Index j = k + 1; j <= k + window; ++j) {
    const double a = path[j + 2] - 2.0 * path[j + 1] + path[j];
    const double b = path[j + 3] - 2.0 * path[j + 2] + path[j + 1];
    agreements += psi(a, b);
  }
  return static_cast<double>(agreements) / static_cast<double>(window);
}

FilteredDerivativeTrace filtered_derivative_psi(const PsiSequence& psi_seq,
                                                Eigen::Index window) {
  const Eigen::Index pairs = psi_seq.size();
  if (window < 2) throw std::invalid_argument("filtered_derivative: window must be >= 2");
  if (pairs < 2 * window + 1)
    throw std::invalid_argument("filtered_derivative: series too short for window");

  FilteredDerivativeTrace trace;
  trace.window = window;
  trace.offset = window;
  const Eigen::Index count = pairs - 2 * window;  // k = window .. pairs-1-window
  trace.values.resize(count);

  Eigen::Index left = 0, right = 0;
  for (Eigen::Index j = 1; j <= window; ++j) left += psi_seq[j];
  for (Eigen::Index j = window + 1; j <= 2 * window; ++j) right += psi_seq[j];
  const double inv_a = 1.0 / static_cast<double>(window);
  for (Eigen::Index i = 0;; ++i) {
    trace.values[i] = static_cast<double>(right - left) * inv_a;
    if (i + 1 == count) break;
    const Eigen::Index k = window + i;  // slide both boxes by one
    left += psi_seq[k + 1] - psi_seq[k - window + 1];
    right += psi_seq[k + window + 1] - psi_seq[k + 1];
  }
  return trace;
}

FilteredDerivativeTrace filtered_derivative(const Eigen::Ref<const Eigen::ArrayXd>& path,
                                            Eigen::Index window) {
  if (path.size() <= 2 * window + 3)
    throw std::invalid_argument("filtered_derivative: path too short for window");
  return filtered_derivative_psi(psi_sequence(path), window);
}

namespace {

double max_abs_d_null(const Eigen::ArrayXd& noise, Eigen::Index window) {
  const Eigen::Index n = noise.size();
  PsiSequence seq(n - 2);
  bool prev = (noise[1] - noise[0]) >= 0.0;
  for (Eigen::Index k = 1; k < n - 1; ++k) {
    const bool cur = (noise[k + 1] - noise[k]) >= 0.0;
    seq[k - 1] = static_cast<std::uint8_t>(cur == prev);
    prev = cur;
  }
  FilteredDerivativeTrace trace = filtered_derivative_psi(seq, window);
  return trace.values.abs().maxCoeff();
}

}  // namespace

double calibrate_threshold(Eigen::Index series_length, Eigen::Index window,
                           double hurst_null, double p1_star,
                           const DetectorConfig& config, const VarianceTable& table) {
  if (p1_star >= 1.0) return 0.0;
  const double h = std::clamp(hurst_null, 0.01, 0.99);

  if (config.threshold_mode == "gaussian") {
    const Eigen::Index m = std::max<Eigen::Index>(
        1, (series_length - 2 * window) / window);
    const double z = normal_quantile(1.0 - p1_star / (2.0 * static_cast<double>(m)));
    return std::sqrt(2.0 * table.sigma_squared(h) / static_cast<double>(window)) * z;
  }

  if (config.mc_replicates < 100)
    throw std::invalid_argument("calibrate_threshold: mc mode needs >= 100 replicates");
  FgnSampler sampler(h, series_length - 1);
  std::vector<double> maxima(config.mc_replicates);
  for (int r = 0; r < config.mc_replicates; ++r)
    maxima[r] = max_abs_d_null(sampler.sample(derive_seed(config.seed, r)), window);
  std::sort(maxima.begin(), maxima.end());
  const auto idx = std::min<std::size_t>(
      maxima.size() - 1,
      static_cast<std::size_t>(std::ceil((1.0 - p1_star) * maxima.size())) - 1);
  return maxima[idx];
}

std::vector<Candidate> select_potential(const FilteredDerivativeTrace& trace,
                                        double threshold, Eigen::Index min_separation) {
  if (threshold < 0.0) throw std::invalid_argument("select_potential: negative threshold");
  if (min_separation < 1) min_separation = 1;
  const Eigen::Index count = trace.values.size();

  std::vector<Candidate> peaks;
  double prev_abs = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    const double cur = std::abs(trace.values[i]);
    if (cur > threshold) {  // rare under the null; gate the peak tests on it
      const bool rises = (i == 0) || cur > prev_abs;
      const bool falls = (i + 1 == count) || cur >= std::abs(trace.values[i + 1]);
      if (rises && falls) peaks.push_back({trace.offset + i, cur});
    }
    prev_abs = cur;
  }
  // Greedy suppression by decreasing height; ties toward the smaller index.
  std::stable_sort(peaks.begin(), peaks.end(), [](const Candidate& a, const Candidate& b) {
    if (a.height != b.height) return a.height > b.height;
    return a.index < b.index;
  });
  std::vector<Candidate> kept;
  for (const Candidate& c : peaks) {
    bool ok = true;
    for (const Candidate& k : kept)
      if (std::abs(c.index - k.index) < min_separation) { ok = false; break; }
    if (ok) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(),
            [](const Candidate& a, const Candidate& b) { return a.index < b.index; });
  return kept;
}

namespace {

// Psi prefix sums evaluated only where candidate segmentation needs them:
// the ends of the psi range, every candidate index, and the segment-interior
// cut three below each candidate. One pass, no O(n) prefix array.
std::map<Eigen::Index, Eigen::Index> sparse_psi_prefix(
    const PsiSequence& seq, const std::vector<Candidate>& candidates) {
  std::map<Eigen::Index, Eigen::Index> prefix;
  prefix[0];
  prefix[seq.size()];
  for (const Candidate& c : candidates) {
    prefix[c.index];
    if (c.index >= 3) prefix[c.index - 3];
  }
  Eigen::Index run = 0, pos = 0;
  for (auto& [idx, val] : prefix) {
    for (; pos < idx; ++pos) run += seq[pos];
    val = run;
  }
  return prefix;
}

HurstEstimate estimate_from_pairs(Eigen::Index agreements, Eigen::Index n_pairs,
                                  const VarianceTable& table) {
  HurstEstimate est;
  est.ibs = {static_cast<double>(agreements) / static_cast<double>(n_pairs), n_pairs};
  const HurstInversion inv = hurst_of_lambda(est.ibs.value);
  est.hurst = inv.hurst;
  bool table_clamped = false;
  const double s2 = table.sigma_squared(est.hurst, &table_clamped);
  est.std_error = std::sqrt(s2 / static_cast<double>(n_pairs));
  est.clamped = inv.clamped || table_clamped;
  return est;
}

std::vector<ScreenedCandidate> step2_impl(const std::map<Eigen::Index, Eigen::Index>& prefix,
                                          Eigen::Index pairs,
                                          const std::vector<Candidate>& candidates,
                                          const VarianceTable& table) {
  std::vector<ScreenedCandidate> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Eigen::Index cur = candidates[i].index;
    const Eigen::Index prev = (i == 0) ? 0 : candidates[i - 1].index;
    const Eigen::Index next = (i + 1 == candidates.size()) ? pairs : candidates[i + 1].index;
    if (cur <= prev || cur >= next || next > pairs)
      throw std::invalid_argument("step2_pvalues: candidates not sorted or out of range");

    const Eigen::Index m_left = cur - prev;
    const Eigen::Index m_right = next - cur;
    ScreenedCandidate sc{cur, 1.0, false};
    if (m_left < 16 || m_right < 16) {
      sc.short_segment = true;
      out.push_back(sc);
      continue;
    }
    const Eigen::Index sum_left = prefix.at(cur) - prefix.at(prev);
    const Eigen::Index sum_right = prefix.at(next) - prefix.at(cur);
    const double ibs_left = static_cast<double>(sum_left) / m_left;
    const double ibs_right = static_cast<double>(sum_right) / m_right;
    const double pooled_lambda =
        static_cast<double>(sum_left + sum_right) / static_cast<double>(m_left + m_right);
    const double h_pool = hurst_of_lambda(pooled_lambda).hurst;
    const double s2 = table.sigma_squared(h_pool);
    const double z = (ibs_left - ibs_right) /
                     std::sqrt(s2 * (1.0 / m_left + 1.0 / m_right));
    sc.p_value = two_sided_p(z);
    out.push_back(sc);
  }
  return out;
}

}  // namespace

std::vector<ScreenedCandidate> step2_pvalues(const Eigen::Ref<const Eigen::ArrayXd>& path,
                                             const std::vector<Candidate>& candidates,
                                             const VarianceTable& table) {
  if (candidates.empty()) return {};
  const PsiSequence seq = psi_sequence(path);
  return step2_impl(sparse_psi_prefix(seq, candidates), seq.size(), candidates, table);
}

ChangePointReport detect(const Eigen::Ref<const Eigen::ArrayXd>& path,
                         const DetectorConfig& config, const VarianceTable& table) {
  using clock = std::chrono::steady_clock;
  config.validate(path.size());

  ChangePointReport report;
  report.config = config;

  const auto t0 = clock::now();
  // One psi pass feeds the null estimate, the derivative trace, the
  // screening statistics, and the per-segment estimates.
  const PsiSequence seq = psi_sequence(path);
  Eigen::Index total = 0;
  for (Eigen::Index j = 0; j < seq.size(); ++j) total += seq[j];
  HurstEstimate global = estimate_from_pairs(total, seq.size(), table);
  report.hurst_null = global.hurst;
  if (config.threshold_override) {
    report.threshold_used = *config.threshold_override;
  } else {
    report.threshold_used = calibrate_threshold(path.size(), config.window, global.hurst,
                                                config.p1_star, config, table);
  }
  const auto t1 = clock::now();

  FilteredDerivativeTrace trace = filtered_derivative_psi(seq, config.window);
  report.potential = select_potential(trace, report.threshold_used,
                                      config.effective_min_separation());
  std::map<Eigen::Index, Eigen::Index> prefix;  // built only once candidates exist
  if (!report.potential.empty()) {
    prefix = sparse_psi_prefix(seq, report.potential);
    for (const ScreenedCandidate& sc :
         step2_impl(prefix, seq.size(), report.potential, table))
      if (sc.p_value <= config.p2_star) report.retained.push_back(sc);
  }

  // Per-segment estimates over the retained segmentation. A sub-path of
  // [start, end) contributes exactly the psi terms [start, end - 3).
  std::vector<Eigen::Index> bounds{0};
  for (const ScreenedCandidate& sc : report.retained) bounds.push_back(sc.index);
  bounds.push_back(path.size());
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    SegmentEstimate seg{bounds[i], bounds[i + 1], {}};
    const Eigen::Index len = seg.end - seg.start;
    if (len >= 4) {
      const Eigen::Index agree = report.retained.empty()
                                     ? total
                                     : prefix.at(seg.end - 3) - prefix.at(seg.start);
      seg.estimate = estimate_from_pairs(agree, len - 3, table);
    } else {
      seg.estimate = HurstEstimate{0.5, {0.0, 0}, 0.0, true};  // degenerate sliver
    }
    report.segment_estimates.push_back(seg);
  }
  const auto t2 = clock::now();

  report.calibration_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  report.detection_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  return report;
}

}  // namespace fdpv
