#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace delaykit {

/// Uniformly sampled scalar series. Values are finite after construction
/// through any of the generators or the CSV loader.
struct TimeSeries {
    std::vector<double> values;
    double dt = 1.0;
    std::string name;

    std::size_t size() const { return values.size(); }
};

/// Ordered list of positive, distinct delay lags in samples. Lag 0 is
/// implicit as the first coordinate, so the embedding dimension is
/// lags.size() + 1.
struct EmbeddingSpec {
    std::vector<int> lags;

    int dim() const { return static_cast<int>(lags.size()) + 1; }
    int max_lag() const;
    void validate(std::size_t n) const;

    /// Uniform spec with lags tau, 2*tau, ..., (m-1)*tau.
    static EmbeddingSpec uniform(int tau, int m);
};

/// Row-major m-dimensional delay vectors. time_index[k] is the original
/// sample index of coordinate 0 (the most recent value) of point k.
struct PointCloud {
    int dim = 1;
    std::vector<double> data;
    std::vector<std::int64_t> time_index;

    std::size_t n_pts() const { return time_index.size(); }
    std::span<const double> point(std::size_t k) const {
        return {data.data() + k * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
    double* row(std::size_t k) {
        return data.data() + k * static_cast<std::size_t>(dim);
    }
    const double* row(std::size_t k) const {
        return data.data() + k * static_cast<std::size_t>(dim);
    }
};

double point_dist2(const PointCloud& cloud, std::size_t a, std::size_t b);
double point_dist(const PointCloud& cloud, std::size_t a, std::size_t b);

struct RecurrenceMatrix {
    std::size_t size = 0;
    double threshold = 0.0;
    std::vector<std::uint8_t> bits;  // row-major size x size

    bool at(std::size_t i, std::size_t j) const { return bits[i * size + j] != 0; }
};

/// Parameters of the synthetic fast-slow (spiking-bursting) surrogate.
/// The two time scales are explicit so tests can pin expected embedding
/// lags up front: spikes repeat every fast_period samples inside bursts,
/// bursts repeat every slow_period samples.
struct SurrogateParams {
    double fast_period = 20.0;    // samples per spike cycle
    double slow_period = 2000.0;  // samples per burst cycle
    double amp_fast = 0.35;       // spike amplitude relative to slow wave
    double duty = 0.45;           // fraction of the slow cycle spent bursting
    double wobble = 0.01;         // relative phase-speed jitter
    std::uint64_t seed = 1;
};

TimeSeries generate_sines(const std::vector<double>& freqs,
                          const std::vector<double>& phases,
                          const std::vector<double>& amps, double dt,
                          std::size_t n);

TimeSeries generate_lorenz(double dt_int, int subsample, std::size_t n_out,
                           const std::array<double, 3>& x0 = {1.0, 1.0, 1.0});

TimeSeries generate_fastslow(const SurrogateParams& params, std::size_t n);

TimeSeries normalize(const TimeSeries& ts);

/// Adds Gaussian noise with variance var(ts)/snr (snr is a linear power
/// ratio). Deterministic per seed.
TimeSeries add_noise(const TimeSeries& ts, double snr, std::uint64_t seed);

PointCloud delay_embed(const TimeSeries& ts, const EmbeddingSpec& spec);

/// Coordinates are numerical time derivatives of orders 0..m-1
/// (second-order central differences, one-sided at the ends).
PointCloud derivative_embed(const TimeSeries& ts, int m);

/// 3D cloud: (cumulative trapezoid of the mean-removed signal, signal,
/// first derivative).
PointCloud intdiff_embed(const TimeSeries& ts);

struct PcaEmbedding {
    PointCloud cloud;
    std::vector<double> singular_values;  // descending
};

PcaEmbedding pca_embed(const TimeSeries& ts, int window, int d);

/// Indices of the k nearest points to `query` (Euclidean), restricted to
/// |time_index difference| > theiler, ascending by distance with ties
/// broken by lower index. Throws when fewer than k points are admissible.
std::vector<std::size_t> neighbor_search(const PointCloud& cloud,
                                         std::size_t query, std::size_t k,
                                         std::int64_t theiler);

RecurrenceMatrix recurrence_plot(const PointCloud& cloud,
                                 double threshold_quantile);

/// Reads one numeric column (0-based) from a CSV file. A non-numeric first
/// row is skipped as a header; any later non-numeric or non-finite entry is
/// an error naming the row.
TimeSeries load_csv(const std::string& path, int column, double dt);

double series_mean(const TimeSeries& ts);
/// Sample variance (n-1 denominator).
double series_variance(const TimeSeries& ts);

}  // namespace delaykit
