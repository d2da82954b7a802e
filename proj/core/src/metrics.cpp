#include "latdesign/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "latdesign/errors.hpp"

namespace latdesign {

namespace {

std::size_t count_positives(std::span<const std::uint8_t> designing) {
  const auto n = static_cast<std::size_t>(std::count_if(designing.begin(), designing.end(),
                                                         [](std::uint8_t v) { return v != 0; }));
  if (n == 0) throw DomainError("ROC undefined: no designing sequences in the ranking");
  return n;
}

}  // namespace

double roc_q(std::span<const std::uint8_t> designing) {
  const std::size_t positives = count_positives(designing);
  const auto total = static_cast<double>(designing.size());
  const auto pos = static_cast<double>(positives);
  // Trapezoids of width 1/total; twice the area, accumulated in integers.
  long double twice_area_units = 0.0L;
  std::uint64_t found = 0;
  for (auto flag : designing) {
    const std::uint64_t before = found;
    if (flag) ++found;
    twice_area_units += static_cast<long double>(before + found);
  }
  const double area = static_cast<double>(twice_area_units / (2.0L * total * pos));
  return (area - 0.5) / 0.5;
}

RocCurve roc(std::span<const std::uint8_t> designing) {
  RocCurve curve;
  curve.positives = count_positives(designing);
  const auto total = static_cast<double>(designing.size());
  const auto pos = static_cast<double>(curve.positives);
  curve.points.reserve(designing.size() + 1);
  curve.points.push_back({0.0, 0.0});
  std::size_t found = 0;
  for (std::size_t k = 0; k < designing.size(); ++k) {
    if (designing[k]) ++found;
    curve.points.push_back({static_cast<double>(k + 1) / total, static_cast<double>(found) / pos});
  }
  curve.q = roc_q(designing);
  return curve;
}

SuccessRecord success_fraction(std::span<const FoldResult> folds, std::size_t target, std::size_t cycle) {
  SuccessRecord rec;
  rec.cycle = cycle;
  rec.size = folds.size();
  for (const auto& fr : folds) {
    if (fr.foldable && fr.native() == target) ++rec.designing;
  }
  rec.f_c = rec.size ? static_cast<double>(rec.designing) / static_cast<double>(rec.size) : 0.0;
  return rec;
}

SuccessRecord success_fraction(std::span<const Sequence> candidates, std::size_t target,
                               const FoldingEngine& oracle, double beta, double p_fold, std::size_t cycle) {
  std::vector<FoldResult> folds;
  folds.reserve(candidates.size());
  for (const auto& s : candidates) folds.push_back(oracle.fold(s, beta, p_fold));
  return success_fraction(folds, target, cycle);
}

std::vector<HistogramBin> g_histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw InvalidArgument("histogram of an empty sample");
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return {HistogramBin{lo, hi, values.size()}};
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "x,y\n";
  char buf[64];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", p.x, p.y);
    out << buf;
  }
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_lo,bin_hi,count\n";
  char buf[96];
  for (const auto& b : bins) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", b.lo, b.hi, b.count);
    out << buf;
  }
}

}  // namespace latdesign
