#include "xcorr/signal.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "fft.hpp"
#include "format.hpp"
#include "xcorr/errors.hpp"

namespace xcorr {

void TimeGrid::validate() const {
  if (!std::isfinite(dt) || dt <= 0.0) throw InvalidParameter("grid spacing must be positive");
  if (n == 0) throw InvalidParameter("grid must contain at least one sample");
  if (!std::isfinite(t_start) || !std::isfinite(t_end()))
    throw InvalidParameter("grid span must be finite");
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = M0 * ctr[0];
    const std::uint64_t p1 = M1 * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

namespace {

// (0, 1], never zero so the logarithm below is finite.
double to_unit(std::uint64_t x) { return static_cast<double>((x >> 11) + 1) * 0x1.0p-53; }

std::array<double, 2> normal_pair(NoiseSeed s, std::uint64_t block) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
      static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(s.seed),
                                            static_cast<std::uint32_t>(s.seed >> 32)};
  const auto r = philox4x32(ctr, key);
  const double u1 = to_unit((static_cast<std::uint64_t>(r[1]) << 32) | r[0]);
  const double u2 = to_unit((static_cast<std::uint64_t>(r[3]) << 32) | r[2]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace

std::vector<double> standard_normals(NoiseSeed seed, std::size_t count, std::size_t offset) {
  std::vector<double> out(count);
  std::size_t i = 0;
  while (i < count) {
    const std::size_t idx = offset + i;
    const auto pair = normal_pair(seed, idx / 2);
    out[i++] = pair[idx % 2];
    if (idx % 2 == 0 && i < count) out[i++] = pair[1];
  }
  return out;
}

double simulation_radius(const Kernel& k, const SimulationOptions& opts) {
  if (!std::isfinite(opts.truncation_radius) || opts.truncation_radius <= 0.0)
    throw InvalidParameter("truncation_radius must be positive");
  return std::min(k.effective_support(), opts.truncation_radius);
}

std::size_t required_pad(const Kernel& k, double dt, const SimulationOptions& opts) {
  if (!std::isfinite(dt) || dt <= 0.0) throw InvalidParameter("dt must be positive");
  return static_cast<std::size_t>(std::ceil(simulation_radius(k, opts) / dt - 1e-9));
}

std::optional<std::string> resolution_warning(const Kernel& k, double dt,
                                              const SimulationOptions& opts) {
  const double scale = simulation_radius(k, opts);
  if (dt > scale / 10.0) {
    return "dt=" + detail::format_double(dt) + " is coarse for kernel '" + k.name() +
           "' (radius " + detail::format_double(scale) + "); recommended dt <= " +
           detail::format_double(scale / 10.0);
  }
  return std::nullopt;
}

std::vector<double> wiener_increments(const TimeGrid& grid, std::size_t pad, NoiseSeed seed) {
  grid.validate();
  auto inc = standard_normals(seed, grid.n + 2 * pad);
  const double s = std::sqrt(grid.dt);
  for (double& v : inc) v *= s;
  return inc;
}

SampledPath simulate_output(const Kernel& k, std::span<const double> increments,
                            const TimeGrid& grid, std::size_t pad, const SimulationOptions& opts) {
  grid.validate();
  if (increments.size() != grid.n + 2 * pad)
    throw InvalidInput("increment array length must be n + 2*pad");
  const std::size_t need = required_pad(k, grid.dt, opts);
  if (pad < need) {
    throw PreconditionError("pad " + std::to_string(pad) + " too short for kernel '" + k.name() +
                            "'; required pad is " + std::to_string(need));
  }
  const std::size_t P = need;
  // taps[i] = k((i − P)·dt); shift the window so the filter is causal.
  std::vector<double> taps(2 * P + 1);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(P)) * grid.dt;
    taps[i] = k(t);
  }
  SampledPath path;
  path.grid = grid;
  path.label = k.name();
  path.values = fft::filter(taps, increments, pad + P, grid.n);
  return path;
}

std::pair<SampledPath, SampledPath> simulate_pair(const Kernel& h, const Kernel& g,
                                                  const TimeGrid& grid, NoiseSeed seed,
                                                  const SimulationOptions& opts) {
  const std::size_t pad = std::max(required_pad(h, grid.dt, opts), required_pad(g, grid.dt, opts));
  const auto inc = wiener_increments(grid, pad, seed);
  auto y = simulate_output(h, inc, grid, pad, opts);
  auto x = simulate_output(g, inc, grid, pad, opts);
  y.label = "Y";
  x.label = "X";
  return {std::move(y), std::move(x)};
}

void write_path_csv(const SampledPath& path, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw InvalidInput("cannot write " + file.string());
  out << "t,value\n";
  for (std::size_t j = 0; j < path.values.size(); ++j) {
    out << detail::format_double(path.grid.time(j)) << ','
        << detail::format_double(path.values[j]) << '\n';
  }
}

namespace {

template <class T>
void put_le(std::ofstream& out, T v) {
  std::uint64_t bits;
  static_assert(sizeof(T) == 8);
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get_le(std::ifstream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), 8);
  if (!in) throw InvalidInput("truncated binary path file");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_path_binary(const SampledPath& path, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + file.string());
  put_le<std::uint64_t>(out, path.values.size());
  put_le<double>(out, path.grid.dt);
  put_le<double>(out, path.grid.t_start);
  for (double v : path.values) put_le<double>(out, v);
}

SampledPath read_path_binary(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + file.string());
  SampledPath p;
  p.grid.n = get_le<std::uint64_t>(in);
  p.grid.dt = get_le<double>(in);
  p.grid.t_start = get_le<double>(in);
  p.values.resize(p.grid.n);
  for (auto& v : p.values) v = get_le<double>(in);
  return p;
}

}  // namespace xcorr
