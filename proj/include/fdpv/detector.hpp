#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdpv/ibs.hpp"

namespace fdpv {

struct DetectorConfig {
  Eigen::Index window = 2000;     // A
  double p1_star = 0.05;          // Step-1 type-I level
  double p2_star = 0.05;          // Step-2 screening level
  std::string threshold_mode = "mc";  // "mc" or "gaussian"
  int mc_replicates = 200;
  Eigen::Index min_separation = 0;    // 0 means "use window"
  std::uint64_t seed = 0;
  // When set, Step-1 uses this threshold directly and calibration is skipped
  // (used by benchmarks and batch runs that amortize one calibration).
  std::optional<double> threshold_override;

  Eigen::Index effective_min_separation() const {
    return min_separation > 0 ? min_separation : window;
  }
  void validate(Eigen::Index series_length) const;
};

// D(k, A) for k = offset .. offset + values.size() - 1, where D is the
// difference of the psi averages over the right box (k, k+A] and the left
// box (k-A, k].
struct FilteredDerivativeTrace {
  Eigen::ArrayXd values;
  Eigen::Index window = 0;
  Eigen::Index offset = 0;  // k of values[0]; equals window
};

struct Candidate {
  Eigen::Index index;  // path index of the local maximum of |D|
  double height;       // |D| there
};

struct ScreenedCandidate {
  Eigen::Index index;
  double p_value;
  bool short_segment = false;  // flanking segment had < 16 psi pairs
};

struct SegmentEstimate {
  Eigen::Index start;  // inclusive path index
  Eigen::Index end;    // exclusive path index
  HurstEstimate estimate;
};

struct ChangePointReport {
  std::vector<Candidate> potential;
  std::vector<ScreenedCandidate> retained;
  std::vector<SegmentEstimate> segment_estimates;
  double threshold_used = 0.0;
  double hurst_null = 0.0;  // full-path estimate used for calibration
  DetectorConfig config;
  double calibration_ms = 0.0;
  double detection_ms = 0.0;
};

/// Mean of the psi terms over the sliding box (k, k+A]: psi_j for
/// j = k+1 .. k+A. Recomputed from scratch; the detector itself uses the
/// sliding recurrence.
double windowed_ibs(const Eigen::Ref<const Eigen::ArrayXd>& path, Eigen::Index k,
                    Eigen::Index window);

/// Full |D| trace by the sliding recurrence: one psi term enters and one
/// leaves each window per step, so counts match the naive recomputation
/// exactly. Defined for k in [A, P-1-A] with P the psi-pair count.
FilteredDerivativeTrace filtered_derivative(const Eigen::Ref<const Eigen::ArrayXd>& path,
                                            Eigen::Index window);

/// Same recurrence applied to a precomputed psi sequence.
FilteredDerivativeTrace filtered_derivative_psi(const PsiSequence& psi_seq,
                                                Eigen::Index window);

/// Step-1 critical value C1 such that max |D| exceeds it with probability
/// p1_star under a constant-Hurst null. Mode "mc": empirical quantile over
/// simulated null paths; mode "gaussian": sqrt(2 sigma^2(H)/A) times a
/// Bonferroni-corrected normal quantile over M = (n-2A)/A effective tests.
double calibrate_threshold(Eigen::Index series_length, Eigen::Index window,
                           double hurst_null, double p1_star,
                           const DetectorConfig& config, const VarianceTable& table);

/// Local maxima of |D| above the threshold, kept greedily in decreasing
/// height with pairwise index distance >= min_separation; ties break toward
/// the smaller index. Sorted by index.
std::vector<Candidate> select_potential(const FilteredDerivativeTrace& trace,
                                        double threshold, Eigen::Index min_separation);

/// Per-candidate two-sample test on the flanking segments delimited by the
/// neighboring candidates (path ends at the extremes):
/// z = (IBS_L - IBS_R) / sqrt(sigma^2(H_pool) (1/m_L + 1/m_R)).
std::vector<ScreenedCandidate> step2_pvalues(const Eigen::Ref<const Eigen::ArrayXd>& path,
                                             const std::vector<Candidate>& candidates,
                                             const VarianceTable& table);

/// Full two-step pipeline; O(n) in the series length for a fixed
/// Monte-Carlo budget.
ChangePointReport detect(const Eigen::Ref<const Eigen::ArrayXd>& path,
                         const DetectorConfig& config, const VarianceTable& table);

}  // namespace fdpv
