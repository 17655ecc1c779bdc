#pragma once

// Pitch histograms over the cents axis: building from an F0 trace,
// moving-average smoothing, derivatives, mountain-range segmentation,
// area-under-mountain, and shahed (most prominent pitch) selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "intona/cents.hpp"
#include "intona/errors.hpp"

namespace intona {

// One F0 frame. f0_hz <= 0 marks an unvoiced frame; unvoiced frames are
// kept for timing but never enter a histogram.
struct TraceFrame {
  double time_sec = 0.0;
  double f0_hz = 0.0;
  double cents = 0.0;  // valid only when voiced
  bool voiced = false;
};

struct PitchTrace {
  std::vector<TraceFrame> frames;
  double hop_sec = 0.0;

  size_t voiced_count() const {
    size_t n = 0;
    for (const auto& f : frames) n += f.voiced ? 1 : 0;
    return n;
  }
};

struct Histogram {
  double bin_width = 1.0;  // cents
  double origin = 0.0;     // left edge of bin 0, cents
  std::vector<double> counts;

  size_t size() const { return counts.size(); }
  double center(size_t i) const { return origin + (i + 0.5) * bin_width; }
  double left_edge(size_t i) const { return origin + i * bin_width; }

  double total_mass() const {
    double m = 0.0;
    for (double c : counts) m += c;
    return m;
  }

  // Bin index containing a cents value; may fall outside [0, size).
  long bin_of(double cents) const {
    return static_cast<long>(std::floor((cents - origin) / bin_width));
  }
};

// A contiguous histogram region around one note's pitch distribution.
// lo/hi are bin edges, so a one-bin mountain still satisfies
// lo < peak_bin_cents < hi.
struct MountainRange {
  double lo = 0.0;             // cents, left edge
  double hi = 0.0;             // cents, right edge
  double peak_bin_cents = 0.0; // argmax bin center within [lo, hi]
  double area = 0.0;           // definite sum of counts over the range
};

namespace detail {

inline std::vector<double> cents_of_voiced(const PitchTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.frames.size());
  for (const auto& f : trace.frames) {
    if (f.voiced) out.push_back(f.cents);
  }
  return out;
}

}  // namespace detail

// Histogram of raw cents values. The bin range spans min..max padded by
// pad_bins on each side so a later moving average has room to spread.
inline Histogram build_histogram_from_cents(const std::vector<double>& cents,
                                            double bin_width,
                                            int pad_bins = 15) {
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("build_histogram: bin_width must be > 0");
  }
  if (pad_bins < 0) {
    throw std::invalid_argument("build_histogram: pad_bins must be >= 0");
  }
  if (cents.empty()) {
    throw analysis_error("build_histogram: no voiced frames");
  }
  auto [mn_it, mx_it] = std::minmax_element(cents.begin(), cents.end());
  double mn = *mn_it, mx = *mx_it;

  Histogram h;
  h.bin_width = bin_width;
  h.origin = std::floor(mn / bin_width) * bin_width - pad_bins * bin_width;
  size_t span_bins =
      static_cast<size_t>(std::floor((mx - h.origin) / bin_width)) + 1;
  h.counts.assign(span_bins + pad_bins, 0.0);

  for (double c : cents) {
    long i = h.bin_of(c);
    if (i < 0) i = 0;
    if (i >= static_cast<long>(h.counts.size())) {
      i = static_cast<long>(h.counts.size()) - 1;
    }
    h.counts[static_cast<size_t>(i)] += 1.0;
  }
  return h;
}

// Each voiced frame increments exactly one bin; unvoiced frames are ignored.
inline Histogram build_histogram(const PitchTrace& trace, double bin_width,
                                 int pad_bins = 15) {
  return build_histogram_from_cents(detail::cents_of_voiced(trace), bin_width,
                                    pad_bins);
}

// Centered moving average with reflected-edge padding (edge sample
// included in the mirror, which keeps total mass unchanged). The window
// must be odd; window 1 is the identity.
inline Histogram smooth(const Histogram& h, int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("smooth: window must be odd and >= 1");
  }
  const long n = static_cast<long>(h.counts.size());
  if (n == 0) return h;
  const long r = window / 2;
  if (r > n - 1) {
    throw std::invalid_argument("smooth: window too wide for histogram");
  }
  auto reflected = [&](long i) -> double {
    if (i < 0) i = -1 - i;           // c[-1] == c[0]
    if (i >= n) i = 2 * n - 1 - i;   // c[n] == c[n-1]
    return h.counts[static_cast<size_t>(i)];
  };
  Histogram out = h;
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = i - r; j <= i + r; ++j) acc += reflected(j);
    out.counts[static_cast<size_t>(i)] = acc / window;
  }
  return out;
}

// Finite differences, counts per bin: central in the interior, one-sided
// at the edges.
inline std::vector<double> derivative(const Histogram& h) {
  const size_t n = h.counts.size();
  if (n < 2) {
    throw std::invalid_argument("derivative: histogram length must be >= 2");
  }
  std::vector<double> d(n);
  d[0] = h.counts[1] - h.counts[0];
  d[n - 1] = h.counts[n - 1] - h.counts[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    d[i] = (h.counts[i + 1] - h.counts[i - 1]) / 2.0;
  }
  return d;
}

namespace detail {

// Plateau-aware local maxima: the middle bin of each maximal run of equal
// positive values that is higher than both neighbours (array edges count
// as lower ground).
inline std::vector<size_t> local_maxima(const std::vector<double>& s) {
  std::vector<size_t> peaks;
  const size_t n = s.size();
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    bool rises_left = (i == 0) || (s[i - 1] < s[i]);
    bool falls_right = (j == n - 1) || (s[j + 1] < s[i]);
    if (s[i] > 0.0 && rises_left && falls_right) {
      peaks.push_back(i + (j - i) / 2);
    }
    i = j + 1;
  }
  return peaks;
}

// Topographic prominence: height above the higher of the two saddles
// reached before strictly taller ground (or the array edge).
inline double prominence_at(const std::vector<double>& s, size_t peak) {
  double h = s[peak];
  double left_min = h;
  for (size_t i = peak; i-- > 0;) {
    left_min = std::min(left_min, s[i]);
    if (s[i] > h) break;
  }
  double right_min = h;
  for (size_t i = peak + 1; i < s.size(); ++i) {
    right_min = std::min(right_min, s[i]);
    if (s[i] > h) break;
  }
  return h - std::max(left_min, right_min);
}

}  // namespace detail

// Segment a smoothed histogram into mountain ranges, one per retained
// peak. A local maximum is retained when its topographic prominence
// reaches min_prominence of the histogram maximum (low-prominence ripples
// merge into their parent mountain, which is what lets a flat vibrato top
// stay one mountain). Boundaries sit at the lowest bin between adjacent
// retained peaks -- the derivative's minus-to-plus sign change -- or at
// the histogram floor. Ranges whose mass is below min_mass of the total
// are dropped.
inline std::vector<MountainRange> find_mountain_ranges(
    const Histogram& smoothed, double min_prominence = 0.05,
    double min_mass = 0.02) {
  if (!(min_prominence > 0.0) || !(min_prominence < 1.0) ||
      !(min_mass > 0.0) || !(min_mass < 1.0)) {
    throw std::invalid_argument(
        "find_mountain_ranges: thresholds must lie in (0, 1)");
  }
  const auto& s = smoothed.counts;
  const size_t n = s.size();
  std::vector<MountainRange> out;
  if (n == 0) return out;

  double global_max = *std::max_element(s.begin(), s.end());
  if (!(global_max > 0.0)) return out;
  double total = smoothed.total_mass();

  std::vector<size_t> peaks;
  for (size_t p : detail::local_maxima(s)) {
    if (detail::prominence_at(s, p) >= min_prominence * global_max) {
      peaks.push_back(p);
    }
  }

  for (size_t k = 0; k < peaks.size(); ++k) {
    // Segment limits: lowest bin towards each neighbouring retained peak,
    // or the array edge.
    size_t lo_bin = 0;
    if (k > 0) {
      size_t m = peaks[k - 1] + 1;
      for (size_t i = m; i < peaks[k]; ++i) {
        if (s[i] < s[m]) m = i;
      }
      lo_bin = m + 1;  // the valley bin itself belongs to the left mountain
    }
    size_t hi_bin = n - 1;
    if (k + 1 < peaks.size()) {
      size_t m = peaks[k] + 1;
      for (size_t i = m; i < peaks[k + 1]; ++i) {
        if (s[i] < s[m]) m = i;
      }
      hi_bin = m;
    }
    // Trim the histogram floor.
    while (lo_bin < peaks[k] && s[lo_bin] == 0.0) ++lo_bin;
    while (hi_bin > peaks[k] && s[hi_bin] == 0.0) --hi_bin;

    double area = 0.0;
    for (size_t i = lo_bin; i <= hi_bin; ++i) area += s[i];
    if (area < min_mass * total) continue;

    size_t argmax = lo_bin;
    for (size_t i = lo_bin; i <= hi_bin; ++i) {
      if (s[i] > s[argmax]) argmax = i;
    }
    MountainRange r;
    r.lo = smoothed.left_edge(lo_bin);
    r.hi = smoothed.left_edge(hi_bin + 1);
    r.peak_bin_cents = smoothed.center(argmax);
    r.area = area;
    out.push_back(r);
  }
  return out;
}

// Indices of the bins whose centers lie in [r.lo, r.hi].
inline std::pair<size_t, size_t> range_bins(const Histogram& h,
                                            const MountainRange& r) {
  if (r.hi <= h.origin || r.lo >= h.left_edge(h.size())) {
    throw std::invalid_argument("mountain range outside histogram span");
  }
  long first = static_cast<long>(
      std::ceil((r.lo - h.origin) / h.bin_width - 0.5));
  long last = static_cast<long>(
      std::floor((r.hi - h.origin) / h.bin_width - 0.5));
  first = std::max(first, 0L);
  last = std::min(last, static_cast<long>(h.size()) - 1);
  if (first > last) {
    throw std::invalid_argument("mountain range covers no bins");
  }
  return {static_cast<size_t>(first), static_cast<size_t>(last)};
}

// Definite sum of the histogram over the range of the mountain.
inline double mountain_area(const Histogram& h, const MountainRange& r) {
  auto [first, last] = range_bins(h, r);
  double area = 0.0;
  for (size_t i = first; i <= last; ++i) area += h.counts[i];
  return area;
}

// The shahed is the range with the highest area under its mountain, not
// the tallest peak: a wide mountain can out-weigh a taller narrow one.
// Ties break toward lower cents.
inline MountainRange find_shahed(const Histogram& h,
                                 const std::vector<MountainRange>& ranges) {
  if (ranges.empty()) {
    throw std::invalid_argument("find_shahed: no mountain ranges");
  }
  std::vector<MountainRange> sorted = ranges;
  std::sort(sorted.begin(), sorted.end(),
            [](const MountainRange& a, const MountainRange& b) {
              return a.lo < b.lo;
            });
  size_t best = 0;
  double best_area = mountain_area(h, sorted[0]);
  for (size_t i = 1; i < sorted.size(); ++i) {
    double a = mountain_area(h, sorted[i]);
    if (a > best_area) {
      best = i;
      best_area = a;
    }
  }
  return sorted[best];
}

}  // namespace intona
