#include "delaykit/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace delaykit {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_pow2 requires a power-of-two size");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& c : a) c *= inv_n;
    }
}

std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if ((n & (n - 1)) == 0) {
        auto a = x;
        fft_pow2(a, false);
        return a;
    }
    // Bluestein: X_k = conj(w_k) * IFFT(FFT(x_j w_j) * FFT(chirp)) with
    // w_j = exp(-i pi j^2 / n).
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<std::complex<double>> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the chirp argument small and exact.
        const std::size_t j2 = (j * j) % (2 * n);
        const double angle = -kPi * static_cast<double>(j2) / static_cast<double>(n);
        w[j] = {std::cos(angle), std::sin(angle)};
    }
    std::vector<std::complex<double>> a(m, {0.0, 0.0});
    std::vector<std::complex<double>> b(m, {0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * w[j];
    b[0] = std::conj(w[0]);
    for (std::size_t j = 1; j < n; ++j) b[j] = b[m - j] = std::conj(w[j]);
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t j = 0; j < m; ++j) a[j] *= b[j];
    fft_pow2(a, true);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * w[k];
    return out;
}

std::vector<double> power_spectrum(const TimeSeries& ts) {
    const std::size_t n = ts.size();
    if (n < 4) throw std::invalid_argument("series too short for a power spectrum");
    double mu = 0.0;
    for (double v : ts.values) mu += v;
    mu /= static_cast<double>(n);
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double hann =
            0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(n - 1)));
        x[i] = {(ts.values[i] - mu) * hann, 0.0};
    }
    const auto spec = dft(x);
    std::vector<double> power(n / 2 + 1);
    for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spec[k]);
    return power;
}

std::size_t dominant_frequency_bin(const std::vector<double>& power) {
    if (power.size() < 2) throw std::invalid_argument("spectrum too short");
    std::size_t best = 0;
    double best_val = 0.0;
    for (std::size_t k = 1; k < power.size(); ++k) {
        if (power[k] > best_val) {
            best_val = power[k];
            best = k;
        }
    }
    if (best == 0 || best_val <= 1e-20)
        throw std::runtime_error("spectrum has no nonzero-frequency peak");
    return best;
}

double dominant_frequency(const TimeSeries& ts) {
    const auto power = power_spectrum(ts);
    const std::size_t bin = dominant_frequency_bin(power);
    return static_cast<double>(bin) / (static_cast<double>(ts.size()) * ts.dt);
}

}  // namespace delaykit
