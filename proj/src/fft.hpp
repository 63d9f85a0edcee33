#pragma once

// Thin FFTW wrapper. Planning goes through a process-wide mutex (FFTW's
// planner is not thread-safe); execution on private buffers is.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace xcorr::fft {

/// Smallest n' ≥ n of the form 2^a 3^b 5^c.
std::size_t fast_size(std::size_t n);

/// Forward real-to-complex transform of `input` zero-padded to `n` points.
/// Returns the n/2 + 1 nonnegative-frequency bins,  X_j = Σ_k x_k e^{-2πi jk/n}.
std::vector<std::complex<double>> forward_real(std::span<const double> input, std::size_t n);

/// Linear convolution restricted to the outputs needed by a moving-average
/// filter: out[j] = Σ_l taps[l] · signal[j + offset − l]  for j in [0, count).
/// Uses the direct sum for short filters and an FFT otherwise; both paths are
/// deterministic for a given input.
std::vector<double> filter(std::span<const double> taps, std::span<const double> signal,
                           std::size_t offset, std::size_t count);

}  // namespace xcorr::fft
