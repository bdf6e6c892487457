#pragma once
// Offset histograms, distribution distances, and the early/modal/late region
// cutoffs.

#include <span>
#include <string>
#include <vector>

namespace rtnet::eval {

inline constexpr double kDefaultBinMs = 50.0;
inline constexpr double kDefaultRangeLoMs = -2000.0;
inline constexpr double kDefaultRangeHiMs = 4000.0;

// Bins are centred on multiples of the bin width: bin k covers
// [center_k - width/2, center_k + width/2). Samples outside the range are
// counted in the nearest end bin (and in `out_of_range`), so the counts
// always sum to the sample count.
struct OffsetHistogram {
  double bin_width = kDefaultBinMs;
  std::vector<double> edges;  // counts.size() + 1, strictly increasing
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  std::size_t out_of_range = 0;

  double center(std::size_t k) const { return 0.5 * (edges[k] + edges[k + 1]); }
  std::vector<double> normalized() const;
};

OffsetHistogram offset_histogram(std::span<const double> offsets, double bin_width = kDefaultBinMs,
                                 double lo = kDefaultRangeLoMs, double hi = kDefaultRangeHiMs);

// Supremum distance between the two empirical CDFs.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Earth mover's distance (ms) between two histograms over the same bins,
// after normalization.
double earth_movers_distance(const OffsetHistogram& a, const OffsetHistogram& b);

struct DistributionDistance {
  double ks = 0.0;
  double emd_ms = 0.0;
};

DistributionDistance distribution_distance(std::span<const double> a, std::span<const double> b,
                                           double bin_width = kDefaultBinMs,
                                           double lo = kDefaultRangeLoMs,
                                           double hi = kDefaultRangeHiMs);

// Centre of the most populated bin (earliest on ties), bins centred on
// multiples of `bin_width` over the whole data range.
double histogram_mode(std::span<const double> offsets, double bin_width = kDefaultBinMs);

struct RegionCutoffs {
  double mode_ms = 0.0;
  double early_cutoff_ms = 0.0;
  double late_cutoff_ms = 0.0;
};

// Mode as in histogram_mode. The cutoffs are the medians of the samples
// strictly below and strictly above the mode; an empty side yields the mode.
RegionCutoffs offset_region_cutoffs(std::span<const double> offsets, double bin_width = kDefaultBinMs);

double median(std::vector<double> values);
double mean(std::span<const double> values);

}  // namespace rtnet::eval
