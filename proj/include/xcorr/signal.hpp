#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xcorr/kernel.hpp"

namespace xcorr {

struct TimeGrid {
  double t_start = 0.0;
  double dt = 0.01;
  std::size_t n = 0;

  double time(std::size_t j) const { return t_start + static_cast<double>(j) * dt; }
  double t_end() const { return time(n == 0 ? 0 : n - 1); }
  /// Throws InvalidParameter unless dt > 0, n > 0 and the span is finite.
  void validate() const;
};

struct SampledPath {
  TimeGrid grid;
  std::vector<double> values;
  std::string label;
};

struct NoiseSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Philox4x32-10 counter-based generator. Block b of stream s under key k is
/// philox(counter = {b_lo, b_hi, s_lo, s_hi}, key = {k_lo, k_hi}).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Standard normal draws `offset .. offset+count` of the stream (Box-Muller on
/// consecutive Philox blocks, two normals per block).
std::vector<double> standard_normals(NoiseSeed seed, std::size_t count, std::size_t offset = 0);

struct SimulationOptions {
  /// Cap on the kernel radius used for the moving-average sum. Kernels whose
  /// tail-mass radius exceeds this (the sinc family) are truncated here.
  double truncation_radius = 100.0;
};

/// Radius actually used when convolving `k`.
double simulation_radius(const Kernel& k, const SimulationOptions& opts = {});

/// Number of padding increments on each side needed for `k` at spacing dt.
std::size_t required_pad(const Kernel& k, double dt, const SimulationOptions& opts = {});

/// Non-empty when dt is coarse relative to the kernel's scale (dt > support/10).
std::optional<std::string> resolution_warning(const Kernel& k, double dt,
                                              const SimulationOptions& opts = {});

/// i.i.d. N(0, dt) increments, n + 2·pad of them. Increment m covers
/// [s_m, s_m + dt) with s_m = t_start + (m − pad)·dt.
std::vector<double> wiener_increments(const TimeGrid& grid, std::size_t pad, NoiseSeed seed);

/// values[j] = Σ_l k(l·dt) · increments[j + pad − l] over |l·dt| ≤ radius.
SampledPath simulate_output(const Kernel& k, std::span<const double> increments,
                            const TimeGrid& grid, std::size_t pad,
                            const SimulationOptions& opts = {});

/// Y (from h) and X (from g) driven by one shared increment stream.
std::pair<SampledPath, SampledPath> simulate_pair(const Kernel& h, const Kernel& g,
                                                  const TimeGrid& grid, NoiseSeed seed,
                                                  const SimulationOptions& opts = {});

void write_path_csv(const SampledPath& path, const std::filesystem::path& file);

/// Little-endian: u64 n, f64 dt, f64 t_start, then n f64 values.
void write_path_binary(const SampledPath& path, const std::filesystem::path& file);
SampledPath read_path_binary(const std::filesystem::path& file);

}  // namespace xcorr
