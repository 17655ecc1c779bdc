#pragma once

// Peak modelling for histogram mountains: a tilted Gaussian
// y = baseline + tilt*x + amplitude * exp(-(x - center)^2 / width_sq)
// fitted by damped least squares, a degree-two polynomial fallback, and
// the four-way typology of mountain shapes.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "intona/cents.hpp"
#include "intona/histogram.hpp"

namespace intona {

struct PeakSample {
  double cents = 0.0;
  double count = 0.0;
};

struct TiltedGaussianParams {
  double baseline = 0.0;   // c1
  double tilt = 0.0;       // c2, counts per cent
  double amplitude = 0.0;  // c3, > 0
  double center = 0.0;     // c4, cents
  double width_sq = 0.0;   // c5, cents^2, > 0
};

inline double tilted_gaussian_value(const TiltedGaussianParams& p, double x) {
  double d = x - p.center;
  return p.baseline + p.tilt * x + p.amplitude * std::exp(-d * d / p.width_sq);
}

struct QuadraticParams {
  double a = 0.0, b = 0.0, c = 0.0;  // y = a x^2 + b x + c, a < 0
};

inline double quadratic_value(const QuadraticParams& p, double x) {
  return (p.a * x + p.b) * x + p.c;
}

struct TiltedGaussianFit {
  TiltedGaussianParams params;
  double rms_residual = 0.0;
  int iterations = 0;
};

struct QuadraticFit {
  QuadraticParams params;
  double peak_cents = 0.0;  // -b/(2a), clamped to the data span
  double rms_residual = 0.0;
};

namespace detail {

// Solve A x = b for small dense systems, partial pivoting.
template <size_t N>
bool solve_linear(std::array<std::array<double, N>, N> a,
                  std::array<double, N> b, std::array<double, N>& x) {
  for (size_t col = 0; col < N; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < N; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    if (std::fabs(a[piv][col]) < 1e-300) return false;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (size_t r = col + 1; r < N; ++r) {
      double f = a[r][col] / a[col][col];
      for (size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (size_t i = N; i-- > 0;) {
    double acc = b[i];
    for (size_t j = i + 1; j < N; ++j) acc -= a[i][j] * x[j];
    x[i] = acc / a[i][i];
  }
  return true;
}

inline double tg_cost(const std::vector<double>& x, const std::vector<double>& y,
                      const std::array<double, 5>& p) {
  double cost = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - p[3];
    double e = std::exp(-d * d / p[4]);
    double r = p[0] + p[1] * x[i] + p[2] * e - y[i];
    cost += r * r;
  }
  return std::isfinite(cost) ? cost : std::numeric_limits<double>::infinity();
}

// Levenberg-Marquardt on the centered model. Returns the final parameter
// vector and cost, or nullopt when no step was ever accepted.
inline std::optional<std::pair<std::array<double, 5>, double>> tg_lm(
    const std::vector<double>& x, const std::vector<double>& y,
    std::array<double, 5> p, int max_iterations, double rel_tolerance,
    int* iterations_out) {
  double cost = tg_cost(x, y, p);
  if (!std::isfinite(cost)) return std::nullopt;
  double lambda = 1e-3;
  bool any_accepted = false;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    std::array<std::array<double, 5>, 5> a{};
    std::array<double, 5> g{};
    for (size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - p[3];
      double e = std::exp(-d * d / p[4]);
      double r = p[0] + p[1] * x[i] + p[2] * e - y[i];
      std::array<double, 5> j = {1.0, x[i], e, p[2] * e * 2.0 * d / p[4],
                                 p[2] * e * d * d / (p[4] * p[4])};
      for (size_t u = 0; u < 5; ++u) {
        g[u] += j[u] * r;
        for (size_t v = 0; v < 5; ++v) a[u][v] += j[u] * j[v];
      }
    }
    auto damped = a;
    for (size_t u = 0; u < 5; ++u) {
      damped[u][u] += lambda * std::max(a[u][u], 1e-12);
    }
    std::array<double, 5> delta{};
    std::array<double, 5> rhs;
    for (size_t u = 0; u < 5; ++u) rhs[u] = -g[u];
    bool solved = solve_linear(damped, rhs, delta);

    bool accepted = false;
    if (solved) {
      std::array<double, 5> trial = p;
      for (size_t u = 0; u < 5; ++u) trial[u] += delta[u];
      double trial_cost = tg_cost(x, y, trial);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        double rel = (cost - trial_cost) /
                     std::max(cost, std::numeric_limits<double>::min());
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        any_accepted = true;
        accepted = true;
        if (rel < rel_tolerance || cost <= 1e-24) {
          ++iter;
          break;
        }
      }
    }
    if (!accepted) {
      lambda *= 10.0;
      if (lambda > 1e12) break;  // stalled; keep the best point found
    }
  }
  if (iterations_out) *iterations_out = iter;
  if (!any_accepted && !(cost < std::numeric_limits<double>::infinity())) {
    return std::nullopt;
  }
  if (!any_accepted && lambda > 1e12) return std::nullopt;
  return std::make_pair(p, cost);
}

}  // namespace detail

struct FitOptions {
  bool multistart = false;  // five deterministic perturbed starts
  int max_iterations = 200;
  double rel_tolerance = 1e-10;
};

// Fit the tilted Gaussian. Needs at least 6 points spanning at least 10
// cents. Returns nullopt when the optimizer never gains traction or
// drives amplitude/width non-positive; the caller then falls back to the
// quadratic model.
inline std::optional<TiltedGaussianFit> fit_tilted_gaussian(
    std::span<const PeakSample> points, const FitOptions& options = {}) {
  if (points.size() < 6) {
    throw std::invalid_argument("fit_tilted_gaussian: needs >= 6 points");
  }
  std::vector<double> x(points.size()), y(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    x[i] = points[i].cents;
    y[i] = points[i].count;
  }
  auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  double span = *xmax_it - *xmin_it;
  if (span < 10.0) {
    throw std::invalid_argument(
        "fit_tilted_gaussian: points must span >= 10 cents");
  }
  // Centered abscissa keeps the normal equations well conditioned.
  double x0 = 0.0;
  for (double v : x) x0 += v;
  x0 /= x.size();
  for (double& v : x) v -= x0;

  auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  double ymin = *ymin_it, ymax = *ymax_it;
  if (!(ymax > ymin)) return std::nullopt;  // flat data, nothing to fit
  size_t argmax = static_cast<size_t>(ymax_it - y.begin());

  std::array<double, 5> base = {ymin, 0.0, ymax - ymin, x[argmax],
                                (span / 2.0) * (span / 2.0)};
  std::vector<std::array<double, 5>> starts = {base};
  if (options.multistart) {
    auto s = base;
    s[4] = base[4] * 0.25;
    starts.push_back(s);
    s = base;
    s[4] = base[4] * 4.0;
    starts.push_back(s);
    s = base;
    s[3] = base[3] - span / 4.0;
    starts.push_back(s);
    s = base;
    s[3] = base[3] + span / 4.0;
    starts.push_back(s);
  }

  std::optional<std::pair<std::array<double, 5>, double>> best;
  int best_iters = 0;
  for (const auto& start : starts) {
    int iters = 0;
    auto result = detail::tg_lm(x, y, start, options.max_iterations,
                                options.rel_tolerance, &iters);
    if (result && (!best || result->second < best->second)) {
      best = result;
      best_iters = iters;
    }
  }
  if (!best) return std::nullopt;
  const auto& p = best->first;
  if (!(p[2] > 0.0) || !(p[4] > 0.0)) return std::nullopt;
  for (double v : p) {
    if (!std::isfinite(v)) return std::nullopt;
  }

  TiltedGaussianFit fit;
  fit.params.baseline = p[0] - p[1] * x0;  // undo the centering shift
  fit.params.tilt = p[1];
  fit.params.amplitude = p[2];
  fit.params.center = p[3] + x0;
  fit.params.width_sq = p[4];
  fit.rms_residual = std::sqrt(best->second / points.size());
  fit.iterations = best_iters;
  return fit;
}

// Ordinary least-squares parabola. Returns nullopt when the fit is not
// concave (a >= 0), in which case the caller uses the raw argmax bin.
inline std::optional<QuadraticFit> fit_quadratic(
    std::span<const PeakSample> points) {
  if (points.size() < 3) {
    throw std::invalid_argument("fit_quadratic: needs >= 3 points");
  }
  double x0 = 0.0;
  for (const auto& p : points) x0 += p.cents;
  x0 /= points.size();

  double s0 = static_cast<double>(points.size());
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
  for (const auto& p : points) {
    double u = p.cents - x0;
    double u2 = u * u;
    s1 += u;
    s2 += u2;
    s3 += u2 * u;
    s4 += u2 * u2;
    t0 += p.count;
    t1 += u * p.count;
    t2 += u2 * p.count;
  }
  std::array<std::array<double, 3>, 3> m = {
      {{s4, s3, s2}, {s3, s2, s1}, {s2, s1, s0}}};
  std::array<double, 3> rhs = {t2, t1, t0};
  std::array<double, 3> sol{};
  if (!detail::solve_linear(m, rhs, sol)) return std::nullopt;
  double a = sol[0];
  double b = sol[1] - 2.0 * sol[0] * x0;
  double c = sol[2] - sol[1] * x0 + sol[0] * x0 * x0;
  if (!(a < 0.0)) return std::nullopt;

  auto [lo_it, hi_it] = std::minmax_element(
      points.begin(), points.end(),
      [](const PeakSample& l, const PeakSample& r) { return l.cents < r.cents; });
  QuadraticFit fit;
  fit.params = {a, b, c};
  fit.peak_cents = std::clamp(-b / (2.0 * a), lo_it->cents, hi_it->cents);
  double cost = 0.0;
  for (const auto& p : points) {
    double r = quadratic_value(fit.params, p.cents) - p.count;
    cost += r * r;
  }
  fit.rms_residual = std::sqrt(cost / points.size());
  return fit;
}

enum class PeakModelKind { TiltedGaussian, Quadratic, RawArgmax };

inline const char* to_string(PeakModelKind k) {
  switch (k) {
    case PeakModelKind::TiltedGaussian:
      return "tilted-gaussian";
    case PeakModelKind::Quadratic:
      return "quadratic";
    default:
      return "raw-argmax";
  }
}

enum class PeakType { I = 1, II = 2, III = 3, IV = 4 };

inline const char* to_string(PeakType t) {
  switch (t) {
    case PeakType::I:
      return "I";
    case PeakType::II:
      return "II";
    case PeakType::III:
      return "III";
    default:
      return "IV";
  }
}

struct PeakModel {
  PeakModelKind kind = PeakModelKind::RawArgmax;
  std::optional<TiltedGaussianParams> gaussian;
  std::optional<QuadraticParams> quadratic;
  double peak_cents = 0.0;    // argmax of the chosen curve over [lo, hi]
  double rms_residual = 0.0;
  PeakType typology = PeakType::I;
  bool low_confidence = false;
  std::vector<double> candidate_peaks;  // interior maxima of type-III tops
};

// Argmax of a fitted curve on [lo, hi], evaluated on a fixed 0.01-cent
// grid; ties resolve to the lower cents value. The tilt term shifts the
// curve maximum away from the Gaussian center, and this maximum -- not
// the center parameter -- is the refined peak.
template <typename F>
double grid_argmax(F&& f, double lo, double hi, double step = 0.01) {
  long n = static_cast<long>(std::floor((hi - lo) / step));
  double best_x = lo;
  double best_y = f(lo);
  for (long k = 1; k <= n; ++k) {
    double x = lo + k * step;
    double y = f(x);
    if (y > best_y) {
      best_y = y;
      best_x = x;
    }
  }
  return best_x;
}

inline std::vector<PeakSample> mountain_samples(const Histogram& h,
                                                const MountainRange& r) {
  auto [first, last] = range_bins(h, r);
  std::vector<PeakSample> out;
  out.reserve(last - first + 1);
  for (size_t i = first; i <= last; ++i) {
    out.push_back({h.center(i), h.counts[i]});
  }
  return out;
}

// Refine a mountain's peak location. Fallback chain: tilted Gaussian,
// then quadratic, then the raw argmax bin center. Always yields a peak
// inside [lo, hi].
inline PeakModel refine_peak(const Histogram& h, const MountainRange& r,
                             const FitOptions& options = {}) {
  auto samples = mountain_samples(h, r);
  double span = samples.back().cents - samples.front().cents;

  PeakModel model;
  if (samples.size() >= 6 && span >= 10.0) {
    if (auto fit = fit_tilted_gaussian(samples, options)) {
      model.kind = PeakModelKind::TiltedGaussian;
      model.gaussian = fit->params;
      model.rms_residual = fit->rms_residual;
      const auto params = fit->params;
      model.peak_cents = grid_argmax(
          [&params](double x) { return tilted_gaussian_value(params, x); },
          r.lo, r.hi);
      return model;
    }
  }
  if (samples.size() >= 3) {
    if (auto fit = fit_quadratic(samples)) {
      model.kind = PeakModelKind::Quadratic;
      model.quadratic = fit->params;
      model.rms_residual = fit->rms_residual;
      model.peak_cents = std::clamp(fit->peak_cents, r.lo, r.hi);
      return model;
    }
  }
  model.kind = PeakModelKind::RawArgmax;
  model.rms_residual = 0.0;
  size_t best = 0;
  auto [first, last] = range_bins(h, r);
  best = first;
  for (size_t i = first; i <= last; ++i) {
    if (h.counts[i] > h.counts[best]) best = i;
  }
  model.peak_cents = h.center(best);
  return model;
}

// A note aligned into a mountain range: its calibrated nominal position
// and the voiced-frame mass assigned to it.
struct AlignedNoteMass {
  QuartertoneNote note;
  double cents = 0.0;
  double mass = 0.0;
};

struct ClassifyParams {
  double interior_prominence_frac = 0.10;  // type III detector
  double plateau_level = 0.95;             // type IV: fraction of range max
  double plateau_min_cents = 30.0;         // type IV: minimum plateau width
  double pair_max_gap_cents = 50.0;        // type II: note separation bound
  double minor_mass_frac = 0.05;           // type II: hidden-note mass floor
  double max_residual_frac = 0.10;         // type I: rms vs amplitude
};

struct Classification {
  PeakType type = PeakType::I;
  bool low_confidence = false;
  std::vector<double> candidate_peaks;  // filled for type III
};

// Deterministic, total typology decision. Order: III (two distinct
// interior peaks), IV (flat top of 30 cents or more), II (a second
// aligned note hidden within 50 cents), then I.
inline Classification classify_peak(
    const Histogram& h, const MountainRange& r, const PeakModel& fit,
    const std::vector<AlignedNoteMass>& aligned_notes_in_range,
    const ClassifyParams& params = {}) {
  auto [first, last] = range_bins(h, r);
  std::vector<double> s(h.counts.begin() + first,
                        h.counts.begin() + last + 1);
  double range_max = *std::max_element(s.begin(), s.end());
  double range_min = *std::min_element(s.begin(), s.end());

  Classification result;

  // III: two or more prominent interior maxima.
  std::vector<std::pair<double, double>> interior;  // (height, cents)
  for (size_t p : detail::local_maxima(s)) {
    if (p == 0 || p == s.size() - 1) continue;
    if (detail::prominence_at(s, p) >=
        params.interior_prominence_frac * range_max) {
      interior.push_back({s[p], h.center(first + p)});
    }
  }
  if (interior.size() >= 2) {
    std::sort(interior.begin(), interior.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    result.type = PeakType::III;
    for (const auto& [height, cents] : interior) {
      result.candidate_peaks.push_back(cents);
    }
    return result;
  }

  // IV: the near-maximum region is wide and flat.
  size_t argmax = 0;
  for (size_t i = 1; i < s.size(); ++i) {
    if (s[i] > s[argmax]) argmax = i;
  }
  double level = params.plateau_level * range_max;
  size_t plo = argmax, phi = argmax;
  while (plo > 0 && s[plo - 1] >= level) --plo;
  while (phi + 1 < s.size() && s[phi + 1] >= level) ++phi;
  double plateau_cents = (phi - plo + 1) * h.bin_width;
  if (plateau_cents >= params.plateau_min_cents) {
    result.type = PeakType::IV;
    return result;
  }

  // II: one visible maximum but a second transcription note hides inside.
  if (aligned_notes_in_range.size() >= 2) {
    double range_mass = 0.0;
    for (const auto& n : aligned_notes_in_range) range_mass += n.mass;
    const AlignedNoteMass* dominant = &aligned_notes_in_range.front();
    for (const auto& n : aligned_notes_in_range) {
      if (n.mass > dominant->mass) dominant = &n;
    }
    for (const auto& n : aligned_notes_in_range) {
      if (&n == dominant) continue;
      if (std::fabs(n.cents - dominant->cents) <= params.pair_max_gap_cents &&
          n.mass >= params.minor_mass_frac * range_mass) {
        result.type = PeakType::II;
        return result;
      }
    }
  }

  // I: a clean fit; otherwise I with a low-confidence flag.
  double amplitude = range_max - range_min;
  if (amplitude > 0.0 &&
      fit.rms_residual <= params.max_residual_frac * amplitude) {
    result.type = PeakType::I;
    return result;
  }
  result.type = PeakType::I;
  result.low_confidence = true;
  return result;
}

}  // namespace intona
