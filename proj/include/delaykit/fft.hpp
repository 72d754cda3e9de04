#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "delaykit/series.hpp"

namespace delaykit {

/// In-place radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

/// DFT of arbitrary length via Bluestein's chirp-z transform.
std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x);

/// One-sided power spectrum (bins 0..N/2) of the mean-removed,
/// Hann-windowed signal. Bin k corresponds to frequency k / (N * dt).
std::vector<double> power_spectrum(const TimeSeries& ts);

/// Index of the largest nonzero-frequency spectrum peak; ties go to the
/// lower bin. Throws when no peak rises above the numeric floor.
std::size_t dominant_frequency_bin(const std::vector<double>& power);

/// Frequency in signal units of the dominant spectrum peak.
double dominant_frequency(const TimeSeries& ts);

}  // namespace delaykit
