#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "flexpos/errors.hpp"
#include "flexpos/signals.hpp"
#include "flexpos/types.hpp"

namespace flexpos::analysis {

// ---------------------------------------------------------------------------
// Tracking error
// ---------------------------------------------------------------------------

struct TrackingReport {
  Vector6 rms = Vector6::Zero();
  Vector6 max_abs = Vector6::Zero();
  std::size_t first_sample = 0;  // samples before this were excluded as warm-up
  PoseSeries error;              // full error series, reference - measured
};

inline TrackingReport tracking_errors(const PoseSeries& reference, const PoseSeries& measured,
                                      double warmup_fraction = 0.1) {
  if (reference.size() != measured.size())
    throw ValidationError("tracking_errors: series lengths differ");
  if (std::abs(reference.rate_hz - measured.rate_hz) > 1e-9 * reference.rate_hz)
    throw ValidationError("tracking_errors: sample rates differ");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    throw ValidationError("tracking_errors: warm-up fraction must be in [0, 1)");
  if (reference.empty()) throw ValidationError("tracking_errors: empty series");

  TrackingReport r;
  r.error.rate_hz = reference.rate_hz;
  r.error.samples.reserve(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) r.error.samples.push_back(reference[i] - measured[i]);

  r.first_sample = static_cast<std::size_t>(std::floor(warmup_fraction * static_cast<double>(reference.size())));
  Vector6 sq = Vector6::Zero();
  for (std::size_t i = r.first_sample; i < r.error.size(); ++i) {
    const Vector6& e = r.error[i].vec();
    sq += e.cwiseAbs2();
    r.max_abs = r.max_abs.cwiseMax(e.cwiseAbs());
  }
  const double n = static_cast<double>(r.error.size() - r.first_sample);
  r.rms = (sq / n).cwiseSqrt();
  return r;
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

struct DwellStats {
  int level = 0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t samples = 0;
};

struct ResolutionOptions {
  double settle_fraction = 0.1;  // leading part of each dwell ignored
  double threshold = 3.0;        // required separation in pooled standard deviations
  std::size_t min_samples = 100;
};

struct ResolutionReport {
  std::vector<DwellStats> dwells;
  double separation = 0.0;  // min |delta mean| / pooled std over consecutive dwells
  double mean_step = 0.0;   // average |delta mean| per level change
  bool monotonic = false;
  bool pass = false;
};

// Steps are resolved when consecutive dwell means move in the commanded
// direction and are separated by at least `threshold` pooled sample
// standard deviations.
inline ResolutionReport resolution_check(std::span<const double> measured, std::span<const signals::Dwell> dwells,
                                         double expected_step, const ResolutionOptions& opt = {}) {
  if (dwells.size() < 2) throw ValidationError("resolution_check: need at least two dwells");
  if (expected_step == 0.0) throw ValidationError("resolution_check: expected step must be non-zero");
  ResolutionReport r;
  for (const auto& d : dwells) {
    if (d.end > measured.size() || d.begin >= d.end) throw ValidationError("resolution_check: dwell outside record");
    const std::size_t skip = static_cast<std::size_t>(std::floor(opt.settle_fraction * static_cast<double>(d.end - d.begin)));
    const std::size_t b = d.begin + skip;
    const std::size_t n = d.end - b;
    if (n < opt.min_samples)
      throw ValidationError("resolution_check: dwell has " + std::to_string(n) + " samples, need " +
                            std::to_string(opt.min_samples));
    double mean = 0.0;
    for (std::size_t i = b; i < d.end; ++i) mean += measured[i];
    mean /= static_cast<double>(n);
    const auto [lo, hi] = std::minmax_element(measured.begin() + static_cast<std::ptrdiff_t>(b),
                                              measured.begin() + static_cast<std::ptrdiff_t>(d.end));
    double var = 0.0;
    if (*lo != *hi) {
      for (std::size_t i = b; i < d.end; ++i) var += (measured[i] - mean) * (measured[i] - mean);
      var /= static_cast<double>(n - 1);
    }
    r.dwells.push_back({d.level, mean, std::sqrt(var), n});
  }

  r.monotonic = true;
  r.separation = std::numeric_limits<double>::infinity();
  double step_sum = 0.0;
  int step_count = 0;
  for (std::size_t k = 1; k < r.dwells.size(); ++k) {
    const auto& a = r.dwells[k - 1];
    const auto& b = r.dwells[k];
    const int dl = b.level - a.level;
    if (dl == 0) continue;
    const double dm = b.mean - a.mean;
    const double expected_sign = (dl > 0) == (expected_step > 0) ? 1.0 : -1.0;
    if (!(dm * expected_sign > 0.0)) r.monotonic = false;
    const double pooled = std::sqrt(0.5 * (a.std * a.std + b.std * b.std));
    const double sep = pooled > 0.0 ? std::abs(dm) / pooled : std::numeric_limits<double>::infinity();
    r.separation = std::min(r.separation, sep);
    step_sum += std::abs(dm) / std::abs(dl);
    ++step_count;
  }
  r.mean_step = step_count > 0 ? step_sum / step_count : 0.0;
  r.pass = r.monotonic && r.separation >= opt.threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Hysteresis
// ---------------------------------------------------------------------------

struct HysteresisMetric {
  double width = 0.0;       // max |y_ascending - y_descending| over the common x range
  double width_pct = 0.0;   // width as % of the response span
  double mid_width_pct = 0.0;
  double area = 0.0;        // |area| enclosed by the averaged branches
  double r_squared = 1.0;   // of the least-squares line y = a x + b
  double slope = 0.0;
  std::size_t cycles = 0;
};

namespace detail {

struct Run {
  std::size_t begin, end;  // inclusive begin, inclusive end
  bool ascending;
};

// Complete monotonic runs of x between consecutive turning points.
inline std::vector<Run> monotonic_runs(std::span<const double> x) {
  std::vector<std::size_t> turns;
  int dir = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double d = x[i] - x[i - 1];
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (dir != 0 && s != dir) turns.push_back(i - 1);
    dir = s;
  }
  std::vector<Run> runs;
  for (std::size_t k = 1; k < turns.size(); ++k)
    runs.push_back({turns[k - 1], turns[k], x[turns[k]] > x[turns[k - 1]]});
  return runs;
}

// Linear interpolation of one run onto the grid; returns false if the run
// does not cover the grid.
inline bool sample_run(std::span<const double> x, std::span<const double> y, const Run& run,
                       const std::vector<double>& grid, std::vector<double>& out) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = run.begin; i <= run.end; ++i) pts.emplace_back(x[i], y[i]);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (pts.front().first > grid.front() || pts.back().first < grid.back()) return false;
  out.resize(grid.size());
  std::size_t j = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (j + 2 < pts.size() && pts[j + 1].first < grid[g]) ++j;
    const auto& p = pts[j];
    const auto& q = pts[j + 1];
    const double t = q.first > p.first ? (grid[g] - p.first) / (q.first - p.first) : 0.0;
    out[g] = p.second + std::clamp(t, 0.0, 1.0) * (q.second - p.second);
  }
  return true;
}

}  // namespace detail

// Loop metrics of a response y against a periodic drive x. Ascending and
// descending branches are each averaged over all complete runs after
// interpolation onto a common grid.
inline HysteresisMetric hysteresis_metrics(std::span<const double> x, std::span<const double> y,
                                           std::size_t grid_points = 256) {
  if (x.size() != y.size()) throw ValidationError("hysteresis_metrics: series lengths differ");
  const auto runs = detail::monotonic_runs(x);
  std::size_t n_up = 0, n_down = 0;
  for (const auto& r : runs) (r.ascending ? n_up : n_down)++;
  if (n_up < 1 || n_down < 1 || runs.size() < 3)
    throw ValidationError("hysteresis_metrics: drive is not cyclic (need >= 2 full cycles)");

  // Common x range covered by every run.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    lo = std::max(lo, std::min(x[r.begin], x[r.end]));
    hi = std::min(hi, std::max(x[r.begin], x[r.end]));
  }
  if (!(hi > lo)) throw ValidationError("hysteresis_metrics: runs share no common drive range");
  std::vector<double> grid(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g)
    grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);

  std::vector<double> up(grid_points, 0.0), down(grid_points, 0.0), buf;
  std::size_t used_up = 0, used_down = 0;
  for (const auto& r : runs) {
    if (!detail::sample_run(x, y, r, grid, buf)) continue;
    auto& acc = r.ascending ? up : down;
    for (std::size_t g = 0; g < grid_points; ++g) acc[g] += buf[g];
    (r.ascending ? used_up : used_down)++;
  }
  for (auto& v : up) v /= static_cast<double>(used_up);
  for (auto& v : down) v /= static_cast<double>(used_down);

  HysteresisMetric m;
  m.cycles = std::min(n_up, n_down);
  double signed_area = 0.0;
  for (std::size_t g = 0; g < grid_points; ++g) {
    m.width = std::max(m.width, std::abs(up[g] - down[g]));
    if (g > 0) {
      const double dx = grid[g] - grid[g - 1];
      signed_area += 0.5 * dx * ((down[g] - up[g]) + (down[g - 1] - up[g - 1]));
    }
  }
  m.area = std::abs(signed_area);
  const std::size_t mid = grid_points / 2;

  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double span = *ymax - *ymin;
  m.width_pct = span > 0.0 ? 100.0 * m.width / span : 0.0;
  m.mid_width_pct = span > 0.0 ? 100.0 * std::abs(up[mid] - down[mid]) / span : 0.0;

  // Least-squares line through all samples.
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cxx = sxx - sx * sx / n;
  const double cxy = sxy - sx * sy / n;
  const double cyy = syy - sy * sy / n;
  m.slope = cxx > 0.0 ? cxy / cxx : 0.0;
  m.r_squared = (cxx > 0.0 && cyy > 0.0) ? std::min(1.0, cxy * cxy / (cxx * cyy)) : 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Frequency response
// ---------------------------------------------------------------------------

enum class Window { hann, rectangular };

struct FrequencyOptions {
  Window window = Window::hann;
  std::size_t max_points = 2000;    // output grid size over the swept band
  double peak_prominence_db = 3.0;
  double peak_window = 0.5;  // ± fraction of frequency searched for a peak's bases
  double mask_floor = 1e-3;         // bins with |X| below this fraction of max are dropped
};

struct FreqResponse {
  std::vector<double> freq_hz;
  std::vector<double> mag_db;
  std::vector<double> phase_rad;  // wrapped to (-pi, pi]
  std::vector<double> peaks_hz;
};

inline std::vector<double> unwrap(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    while (d > std::numbers::pi) {
      out[i] -= 2.0 * std::numbers::pi;
      d -= 2.0 * std::numbers::pi;
    }
    while (d < -std::numbers::pi) {
      out[i] += 2.0 * std::numbers::pi;
      d += 2.0 * std::numbers::pi;
    }
  }
  return out;
}

namespace detail {

// Topographic prominence: height above the higher of the two lowest points
// reached on either side before climbing above the peak or leaving the
// ± peak_window band.
inline double prominence(const std::vector<double>& f, const std::vector<double>& db, std::size_t i, double window) {
  double left = db[i], right = db[i];
  for (std::size_t j = i; j-- > 0;) {
    if (db[j] > db[i] || f[j] < f[i] / (1.0 + window)) break;
    left = std::min(left, db[j]);
  }
  for (std::size_t j = i + 1; j < db.size(); ++j) {
    if (db[j] > db[i] || f[j] > f[i] * (1.0 + window)) break;
    right = std::min(right, db[j]);
  }
  return db[i] - std::max(left, right);
}

inline std::vector<double> find_peaks(const std::vector<double>& f, const std::vector<double>& db,
                                      const FrequencyOptions& opt) {
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < db.size(); ++i) {
    if (!(db[i] > db[i - 1] && db[i] >= db[i + 1])) continue;
    if (prominence(f, db, i, opt.peak_window) < opt.peak_prominence_db) continue;
    // Parabolic refinement on the dB curve.
    double fp = f[i];
    const double a = db[i - 1], b = db[i], c = db[i + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) fp += 0.5 * (a - c) / denom * (f[i + 1] - f[i]);
    peaks.push_back(fp);
  }
  return peaks;
}

}  // namespace detail

// H1 estimate Y X* / |X|^2 of the output/input spectra, averaged over a grid
// of at most max_points cells spanning [f0, f1]. Both records are windowed
// identically; the chirp sweeps slowly enough that each frequency is visited
// at one instant, so the window cancels in the ratio.
inline FreqResponse frequency_response(std::span<const double> input, std::span<const double> output, double rate,
                                       double f0, double f1, const FrequencyOptions& opt = {}) {
  if (input.size() != output.size()) throw ValidationError("frequency_response: series lengths differ");
  if (!(f0 > 0.0 && f1 > f0)) throw ValidationError("frequency_response: need f1 > f0 > 0");
  if (!(rate >= 4.0 * f1)) throw ValidationError("frequency_response: sample rate must be >= 4 f1");
  const double duration = static_cast<double>(input.size()) / rate;
  if (input.size() < 256 || duration < 2.0 / f0)
    throw ValidationError("frequency_response: record too short for the swept band");

  std::size_t nfft = 1;
  while (nfft < input.size()) nfft <<= 1;
  std::vector<double> xi(nfft, 0.0), yo(nfft, 0.0);
  const std::size_t n = input.size();
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (opt.window == Window::hann)
      w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    xi[i] = w * input[i];
    yo[i] = w * output[i];
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> X, Y;
  fft.fwd(X, xi);
  fft.fwd(Y, yo);

  const double df = rate / static_cast<double>(nfft);
  const auto k0 = static_cast<std::size_t>(std::ceil(f0 / df));
  const auto k1 = std::min(static_cast<std::size_t>(std::floor(f1 / df)), nfft / 2);
  double xmax = 0.0;
  for (std::size_t k = k0; k <= k1; ++k) xmax = std::max(xmax, std::abs(X[k]));
  if (!(xmax > 0.0)) throw ValidationError("frequency_response: input has no energy in band");

  const std::size_t bins = k1 - k0 + 1;
  const std::size_t cells = std::min(opt.max_points, bins);
  FreqResponse fr;
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t b = k0 + c * bins / cells;
    const std::size_t e = k0 + (c + 1) * bins / cells;
    std::complex<double> sxy = 0.0;
    double sxx = 0.0, sf = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      if (std::abs(X[k]) < opt.mask_floor * xmax) continue;
      sxy += Y[k] * std::conj(X[k]);
      sxx += std::norm(X[k]);
      sf += static_cast<double>(k) * df * std::norm(X[k]);
    }
    if (sxx <= 0.0) continue;
    const std::complex<double> H = sxy / sxx;
    fr.freq_hz.push_back(sf / sxx);
    fr.mag_db.push_back(20.0 * std::log10(std::abs(H)));
    fr.phase_rad.push_back(std::arg(H));
  }
  fr.peaks_hz = detail::find_peaks(fr.freq_hz, fr.mag_db, opt);
  return fr;
}

}  // namespace flexpos::analysis
