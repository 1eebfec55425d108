// Counter-based deterministic RNG (SplitMix64) with stream derivation.
//
// Every random quantity in this library is produced by a SplitMix64 stream
// whose seed is derived from a user seed plus integer coordinates
// (e.g. (seed, M, snr index, trial index)).  Streams are therefore
// reproducible bit-for-bit across platforms and independent of evaluation
// order, which is what makes parallel Monte Carlo deterministic.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace cfreq {

// SplitMix64 output function (finalizer).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Weyl-sequence increment (golden-ratio gamma) used by SplitMix64.
inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ull;

// Derives an independent stream seed from a base seed and up to three
// integer coordinates by iterating the SplitMix64 finalizer.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                      std::uint64_t b = 0,
                                      std::uint64_t c = 0) noexcept {
  std::uint64_t s = splitmix64_mix(seed + kSplitMixGamma + a);
  s = splitmix64_mix(s + kSplitMixGamma + b);
  s = splitmix64_mix(s + kSplitMixGamma + c);
  return s;
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += kSplitMixGamma;
    return splitmix64_mix(state_);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the sine-branch value is cached so
  // consecutive calls consume uniforms in a fixed, documented order.
  double normal() noexcept {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

  // Circular complex normal CN(0,1): E|z|^2 = 1, real/imag parts N(0, 1/2).
  // Polar Box-Muller form: |z|^2 is exactly Exp(1).
  std::complex<double> normal_complex() noexcept {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace cfreq
