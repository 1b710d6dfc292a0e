#pragma once

// Deterministic synthetic acceleration signals: noise floors, vehicle-like
// bursts, narrowband events and harmonic drives. Used for fixtures, tests and
// the `synth` CLI command.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "peh/events.hpp"
#include "peh/simulation.hpp"

namespace peh::synthetic {

inline std::vector<double> zeros(double duration, double fs) {
  return std::vector<double>(static_cast<std::size_t>(std::llround(duration * fs)) + 1, 0.0);
}

inline void add_noise(std::vector<double>& a, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (double& x : a) x += n(rng);
}

/// Gaussian-enveloped cosine whose largest |a| is `amplitude` at `t_peak`.
inline void add_burst(std::vector<double>& a, double fs, double t_peak, double amplitude, double freq_hz,
                      double width_s) {
  const double two_pi = 2.0 * std::numbers::pi;
  const auto lo = static_cast<std::ptrdiff_t>(std::floor((t_peak - 6.0 * width_s) * fs));
  const auto hi = static_cast<std::ptrdiff_t>(std::ceil((t_peak + 6.0 * width_s) * fs));
  for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0); i <= hi && i < static_cast<std::ptrdiff_t>(a.size()); ++i) {
    const double t = i / fs - t_peak;
    a[static_cast<std::size_t>(i)] += amplitude * std::exp(-0.5 * (t / width_s) * (t / width_s)) * std::cos(two_pi * freq_hz * t);
  }
}

inline ExcitationSignal harmonic(double amplitude, double omega, double duration, double fs) {
  ExcitationSignal s{fs, zeros(duration, fs)};
  for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] = amplitude * std::sin(omega * (i / fs));
  return s;
}

/// 30 s window with a narrowband burst centred at 10 s.
inline ExcitationSignal narrowband_event(double freq_hz, double amplitude = 0.3, double width_s = 4.0,
                                         double noise_sigma = 0.0, std::uint64_t seed = 1, double fs = 600.0,
                                         double duration = 30.0) {
  ExcitationSignal s{fs, std::vector<double>(static_cast<std::size_t>(std::llround(duration * fs)), 0.0)};
  add_burst(s.samples, fs, 10.0, amplitude, freq_hz, width_s);
  if (noise_sigma > 0.0) add_noise(s.samples, noise_sigma, seed);
  return s;
}

/// Vehicle-like event: two bridge modes excited by a passing load plus a
/// low noise floor; deterministic in `seed`.
inline ExcitationSignal vehicle_event(std::uint64_t seed = 2, double fs = 600.0) {
  ExcitationSignal s{fs, std::vector<double>(static_cast<std::size_t>(30.0 * fs), 0.0)};
  add_burst(s.samples, fs, 10.0, 0.35, 2.1, 2.5);
  add_burst(s.samples, fs, 10.5, 0.12, 5.4, 1.5);
  add_burst(s.samples, fs, 11.0, 0.05, 11.8, 1.0);
  add_noise(s.samples, 0.01, seed);
  return s;
}

struct TrafficFamily {
  double freq_hz;
  double amplitude;
  double width_s;
  double rate_per_hour;
};

struct TrafficRecord {
  AccelerationRecord record;
  std::vector<double> event_times;
  std::vector<int> event_family;
};

/// Stationary traffic: Gaussian noise floor plus Poisson vehicle arrivals from
/// each family, spaced at least `min_gap` seconds apart.
inline TrafficRecord traffic(double duration, const std::vector<TrafficFamily>& families, double noise_sigma,
                             std::uint64_t seed, double fs = 600.0, double min_gap = 40.0) {
  TrafficRecord out;
  out.record.sample_rate = fs;
  out.record.channel = "synthetic";
  out.record.samples = std::vector<double>(static_cast<std::size_t>(std::llround(duration * fs)), 0.0);
  add_noise(out.record.samples, noise_sigma, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  double total_rate = 0.0;
  for (const auto& f : families) total_rate += f.rate_per_hour;
  if (total_rate <= 0.0) return out;
  std::exponential_distribution<double> gap(total_rate / 3600.0);
  std::uniform_real_distribution<double> u(0.0, total_rate);
  double t = min_gap;
  while (true) {
    t += std::max(min_gap, gap(rng));
    if (t > duration - min_gap) break;
    double pick = u(rng);
    int fam = 0;
    while (fam + 1 < static_cast<int>(families.size()) && pick > families[fam].rate_per_hour) {
      pick -= families[fam].rate_per_hour;
      ++fam;
    }
    const auto& f = families[fam];
    add_burst(out.record.samples, fs, t, f.amplitude, f.freq_hz, f.width_s);
    out.event_times.push_back(t);
    out.event_family.push_back(fam);
  }
  return out;
}

}  // namespace peh::synthetic
