#pragma once

// Acceleration records and fixed-length event extraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "peh/errors.hpp"
#include "peh/simulation.hpp"

namespace peh {

struct AccelerationRecord {
  double sample_rate = 0.0;  // Hz
  std::string channel;
  std::vector<double> samples;  // m/s^2
  std::string start_timestamp;

  double duration() const { return samples.empty() ? 0.0 : samples.size() / sample_rate; }
};

struct Event {
  int id = 0;  // order of detection, from 1
  std::string source;
  double sample_rate = 0.0;
  std::vector<double> samples;
  std::size_t peak_index = 0;   // within the window
  double peak_value = 0.0;      // signed acceleration at the peak
  std::size_t offset = 0;       // window start in the source record (samples)

  ExcitationSignal signal() const { return {sample_rate, samples}; }
};

struct EventOptions {
  double threshold = 0.15;       // m/s^2
  double window = 30.0;          // s
  double peak_at = 10.0;         // s
  double min_separation = 30.0;  // s
};

inline void validate(const AccelerationRecord& r) {
  if (!(r.sample_rate > 0.0)) fail(ErrorKind::InvalidArgument, "record sample rate must be positive");
  if (r.samples.empty()) fail(ErrorKind::EmptyRecord, "record '" + r.channel + "' has no samples");
}

/// Threshold crossings closer than `min_separation` are grouped into one event;
/// the window is cut around the group's largest |a| so the peak falls at
/// `peak_at`. Windows that would run past either record edge are dropped.
inline std::vector<Event> extract_events(const AccelerationRecord& rec, const EventOptions& opt = {}) {
  validate(rec);
  if (!(opt.threshold > 0.0)) fail(ErrorKind::InvalidArgument, "threshold must be positive");
  if (!(opt.window > opt.peak_at) || !(opt.peak_at > 0.0))
    fail(ErrorKind::InvalidArgument, "need window > peak_at > 0");

  const double fs = rec.sample_rate;
  const auto win = static_cast<std::size_t>(std::llround(opt.window * fs));
  const auto pre = static_cast<std::size_t>(std::llround(opt.peak_at * fs));
  const auto sep = static_cast<std::size_t>(std::llround(opt.min_separation * fs));
  const std::size_t n = rec.samples.size();

  struct Group {
    std::size_t peak;
    std::size_t last;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(rec.samples[i]);
    if (a <= opt.threshold) continue;
    if (!groups.empty() && i - groups.back().last < sep) {
      Group& g = groups.back();
      g.last = i;
      if (a > std::abs(rec.samples[g.peak])) g.peak = i;
    } else {
      groups.push_back({i, i});
    }
  }

  std::vector<Event> events;
  for (const Group& g : groups) {
    if (g.peak < pre || g.peak - pre + win > n) continue;
    Event e;
    e.id = static_cast<int>(events.size()) + 1;
    e.source = rec.channel;
    e.sample_rate = fs;
    e.offset = g.peak - pre;
    e.samples.assign(rec.samples.begin() + static_cast<std::ptrdiff_t>(e.offset),
                     rec.samples.begin() + static_cast<std::ptrdiff_t>(e.offset + win));
    e.peak_index = pre;
    e.peak_value = rec.samples[g.peak];
    events.push_back(std::move(e));
  }
  return events;
}

struct QuietWindows {
  std::vector<ExcitationSignal> windows;
  std::vector<std::size_t> offsets;
  bool insufficient = false;  // fewer than requested were available
};

/// Earliest-first, non-overlapping windows whose |a| stays below threshold.
inline QuietWindows extract_quiet_windows(const AccelerationRecord& rec, double threshold, double window,
                                          std::size_t count) {
  validate(rec);
  if (!(window > 0.0)) fail(ErrorKind::InvalidArgument, "quiet window length must be positive");
  const auto len = static_cast<std::size_t>(std::llround(window * rec.sample_rate));
  const std::size_t n = rec.samples.size();
  QuietWindows out;
  std::size_t start = 0;
  while (out.windows.size() < count && start + len <= n) {
    std::size_t loud = n;
    for (std::size_t i = start + len; i-- > start;) {
      if (std::abs(rec.samples[i]) >= threshold) {
        loud = i;
        break;
      }
    }
    if (loud == n) {
      out.windows.push_back({rec.sample_rate, std::vector<double>(rec.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                                                  rec.samples.begin() + static_cast<std::ptrdiff_t>(start + len))});
      out.offsets.push_back(start);
      start += len;
    } else {
      start = loud + 1;
    }
  }
  out.insufficient = out.windows.size() < count;
  return out;
}

/// Frequency [Hz] of the largest DFT magnitude in [f_lo, f_hi], scanned with
/// the Goertzel recurrence on a grid of `step` Hz.
inline double dominant_frequency(const ExcitationSignal& s, double f_lo = 0.2, double f_hi = 50.0, double step = 0.02) {
  validate(s);
  f_hi = std::min(f_hi, 0.5 * s.sample_rate);
  double best_f = f_lo, best_p = -1.0;
  for (double f = f_lo; f <= f_hi + 1e-12; f += step) {
    const double w = 2.0 * std::numbers::pi * f / s.sample_rate;
    const double coeff = 2.0 * std::cos(w);
    double s1 = 0.0, s2 = 0.0;
    for (double x : s.samples) {
      const double s0 = x + coeff * s1 - s2;
      s2 = s1;
      s1 = s0;
    }
    const double p = s1 * s1 + s2 * s2 - coeff * s1 * s2;
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace peh
