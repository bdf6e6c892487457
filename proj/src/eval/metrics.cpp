#include "rtnet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rtnet/substrate/error.hpp"

namespace rtnet::eval {

std::vector<double> OffsetHistogram::normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  return out;
}

OffsetHistogram offset_histogram(std::span<const double> offsets, double bin_width, double lo,
                                 double hi) {
  require(!offsets.empty(), "offset_histogram: no samples");
  require(bin_width > 0.0, "offset_histogram: bin width must be positive");
  require(hi > lo, "offset_histogram: empty range");
  const auto first = static_cast<long>(std::floor(lo / bin_width + 0.5));
  const auto last = static_cast<long>(std::floor(hi / bin_width + 0.5));
  const auto bins = static_cast<std::size_t>(last - first + 1);
  OffsetHistogram h;
  h.bin_width = bin_width;
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    h.edges[k] = (static_cast<double>(first + static_cast<long>(k)) - 0.5) * bin_width;
  }
  for (double x : offsets) {
    auto idx = static_cast<long>(std::floor(x / bin_width + 0.5)) - first;
    if (idx < 0 || idx >= static_cast<long>(bins)) {
      ++h.out_of_range;
      idx = std::clamp(idx, 0L, static_cast<long>(bins) - 1);
    }
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  h.total = offsets.size();
  return h;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double earth_movers_distance(const OffsetHistogram& a, const OffsetHistogram& b) {
  require(a.edges == b.edges, "earth_movers_distance: histograms use different bins");
  const auto pa = a.normalized();
  const auto pb = b.normalized();
  double cum = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < pa.size(); ++k) {
    cum += pa[k] - pb[k];
    total += std::abs(cum) * (a.edges[k + 2] - a.edges[k + 1]);
  }
  return total;
}

DistributionDistance distribution_distance(std::span<const double> a, std::span<const double> b,
                                           double bin_width, double lo, double hi) {
  DistributionDistance d;
  d.ks = ks_statistic(a, b);
  d.emd_ms = earth_movers_distance(offset_histogram(a, bin_width, lo, hi),
                                   offset_histogram(b, bin_width, lo, hi));
  return d;
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(std::span<const double> values) {
  require(!values.empty(), "mean: no values");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double histogram_mode(std::span<const double> offsets, double bin_width) {
  require(!offsets.empty(), "histogram_mode: no samples");
  std::map<long, std::size_t> bins;
  for (double x : offsets) ++bins[static_cast<long>(std::floor(x / bin_width + 0.5))];
  long best = bins.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [k, c] : bins) {
    if (c > best_count) {
      best = k;
      best_count = c;
    }
  }
  return static_cast<double>(best) * bin_width;
}

RegionCutoffs offset_region_cutoffs(std::span<const double> offsets, double bin_width) {
  require(offsets.size() >= 3, "offset_region_cutoffs: at least 3 samples required");
  RegionCutoffs r;
  r.mode_ms = histogram_mode(offsets, bin_width);
  std::vector<double> below, above;
  for (double x : offsets) {
    if (x < r.mode_ms) below.push_back(x);
    if (x > r.mode_ms) above.push_back(x);
  }
  r.early_cutoff_ms = below.empty() ? r.mode_ms : median(below);
  r.late_cutoff_ms = above.empty() ? r.mode_ms : median(above);
  return r;
}

}  // namespace rtnet::eval
