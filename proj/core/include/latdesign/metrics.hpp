#pragma once

// Ranking quality, design success rate and value histograms.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "latdesign/energy.hpp"
#include "latdesign/fold_oracle.hpp"

namespace latdesign {

struct RocPoint {
  double x = 0.0;  ///< fraction of ranks consumed
  double y = 0.0;  ///< fraction of designing sequences recovered
};

struct RocCurve {
  /// Starts at (0, 0), one point per rank, ends at (1, 1).
  std::vector<RocPoint> points;
  /// (trapezoidal area - 1/2) / (1/2).
  double q = 0.0;
  std::size_t positives = 0;
};

/// `designing[k]` flags the k-th ranked item. Throws DomainError when nothing
/// is flagged, since Q is then undefined.
RocCurve roc(std::span<const std::uint8_t> designing);

/// Q only, without materializing the curve.
double roc_q(std::span<const std::uint8_t> designing);

struct SuccessRecord {
  std::size_t cycle = 0;
  double f_c = 0.0;
  std::size_t designing = 0;
  std::size_t size = 0;
};

/// Fraction of candidates whose unique ground state is the target at
/// p_native >= p_fold. Zero for an empty set.
SuccessRecord success_fraction(std::span<const Sequence> candidates, std::size_t target,
                               const FoldingEngine& oracle, double beta, double p_fold,
                               std::size_t cycle = 0);
SuccessRecord success_fraction(std::span<const FoldResult> folds, std::size_t target, std::size_t cycle = 0);

inline constexpr std::size_t kDefaultHistogramBins = 60;

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the maximum falls in the last bin.
std::vector<HistogramBin> g_histogram(std::span<const double> values, std::size_t bins = kDefaultHistogramBins);

void write_roc_csv(std::ostream& out, const RocCurve& curve);
void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);

}  // namespace latdesign
