#include "delaykit/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "delaykit/kernels.hpp"
#include "delaykit/linalg.hpp"
#include "delaykit/rng.hpp"

namespace delaykit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int EmbeddingSpec::max_lag() const {
    int m = 0;
    for (int lag : lags) m = std::max(m, lag);
    return m;
}

void EmbeddingSpec::validate(std::size_t n) const {
    std::unordered_set<int> seen;
    for (int lag : lags) {
        if (lag < 1) throw std::invalid_argument("embedding lag must be >= 1");
        if (!seen.insert(lag).second)
            throw std::invalid_argument("duplicate embedding lag " + std::to_string(lag));
        if (static_cast<std::size_t>(lag) >= n)
            throw std::invalid_argument("embedding lag " + std::to_string(lag) +
                                        " >= series length " + std::to_string(n));
    }
}

EmbeddingSpec EmbeddingSpec::uniform(int tau, int m) {
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    EmbeddingSpec spec;
    for (int j = 1; j < m; ++j) spec.lags.push_back(j * tau);
    return spec;
}

double point_dist2(const PointCloud& cloud, std::size_t a, std::size_t b) {
    return knl::dist2(cloud.row(a), cloud.row(b),
                      static_cast<std::size_t>(cloud.dim));
}

double point_dist(const PointCloud& cloud, std::size_t a, std::size_t b) {
    return std::sqrt(point_dist2(cloud, a, b));
}

double series_mean(const TimeSeries& ts) {
    return knl::sum(ts.values.data(), ts.size()) / static_cast<double>(ts.size());
}

double series_variance(const TimeSeries& ts) {
    const std::size_t n = ts.size();
    if (n < 2) throw std::invalid_argument("variance needs at least 2 samples");
    const double mu = series_mean(ts);
    double acc = 0.0;
    for (double v : ts.values) acc += (v - mu) * (v - mu);
    return acc / static_cast<double>(n - 1);
}

TimeSeries generate_sines(const std::vector<double>& freqs,
                          const std::vector<double>& phases,
                          const std::vector<double>& amps, double dt,
                          std::size_t n) {
    if (freqs.size() != phases.size() || freqs.size() != amps.size())
        throw std::invalid_argument("freqs, phases and amps must have equal length");
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
    TimeSeries ts;
    ts.dt = dt;
    ts.name = "sines";
    ts.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        double v = 0.0;
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            v += amps[i] * std::sin(2.0 * kPi * freqs[i] * t + kPi * phases[i]);
        }
        ts.values[k] = v;
    }
    return ts;
}

namespace {

struct LorenzState {
    double x, y, z;
};

inline LorenzState lorenz_deriv(const LorenzState& s) {
    constexpr double sigma = 10.0;
    constexpr double rho = 28.0;
    constexpr double beta = 8.0 / 3.0;
    return {sigma * (s.y - s.x), s.x * (rho - s.z) - s.y, s.x * s.y - beta * s.z};
}

inline LorenzState rk4_step(const LorenzState& s, double h) {
    const LorenzState k1 = lorenz_deriv(s);
    const LorenzState s2{s.x + 0.5 * h * k1.x, s.y + 0.5 * h * k1.y, s.z + 0.5 * h * k1.z};
    const LorenzState k2 = lorenz_deriv(s2);
    const LorenzState s3{s.x + 0.5 * h * k2.x, s.y + 0.5 * h * k2.y, s.z + 0.5 * h * k2.z};
    const LorenzState k3 = lorenz_deriv(s3);
    const LorenzState s4{s.x + h * k3.x, s.y + h * k3.y, s.z + h * k3.z};
    const LorenzState k4 = lorenz_deriv(s4);
    return {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            s.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

}  // namespace

TimeSeries generate_lorenz(double dt_int, int subsample, std::size_t n_out,
                           const std::array<double, 3>& x0) {
    if (dt_int <= 0.0) throw std::invalid_argument("dt_int must be > 0");
    if (subsample < 1) throw std::invalid_argument("subsample must be >= 1");
    if (n_out < 1) throw std::invalid_argument("n_out must be >= 1");
    constexpr int kTransientSteps = 5000;  // integrator steps, discarded

    LorenzState s{x0[0], x0[1], x0[2]};
    for (int i = 0; i < kTransientSteps; ++i) s = rk4_step(s, dt_int);

    TimeSeries ts;
    ts.dt = dt_int * subsample;
    ts.name = "lorenz_x";
    ts.values.resize(n_out);
    ts.values[0] = s.x;
    for (std::size_t k = 1; k < n_out; ++k) {
        for (int i = 0; i < subsample; ++i) s = rk4_step(s, dt_int);
        if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z))
            throw std::runtime_error("Lorenz integration diverged");
        ts.values[k] = s.x;
    }
    return ts;
}

TimeSeries generate_fastslow(const SurrogateParams& p, std::size_t n) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (p.fast_period < 4.0 || p.slow_period <= p.fast_period)
        throw std::invalid_argument("surrogate periods must satisfy 4 <= fast < slow");
    if (p.duty <= 0.0 || p.duty >= 1.0)
        throw std::invalid_argument("duty must lie in (0,1)");
    // Non-bursting regimes: bursts too short to hold spikes, or no fast
    // component at all.
    if (!(p.amp_fast > 0.0) || p.duty * p.slow_period < 2.0 * p.fast_period)
        throw std::runtime_error(
            "surrogate parameters yield a non-bursting trace (bursts shorter than "
            "two spike cycles)");

    Rng rng(seed_hash(p.seed, 0x66617374));
    const double w_fast = 2.0 * kPi / p.fast_period;
    const double w_slow = 2.0 * kPi / p.slow_period;
    // Burst gate: smooth window that is open for `duty` of the slow cycle.
    const double gate_on = std::cos(kPi * p.duty);

    TimeSeries ts;
    ts.dt = 1.0;
    ts.name = "fastslow";
    ts.values.resize(n);

    double phi_s = 2.0 * kPi * rng.uniform();
    double phi_f = 2.0 * kPi * rng.uniform();
    double jitter_s = 0.0;
    double jitter_f = 0.0;
    std::size_t bursts = 0;
    bool gate_prev = false;
    for (std::size_t k = 0; k < n; ++k) {
        // AR(1) phase-speed jitter keeps successive cycles from overlapping
        // exactly while holding the mean period at the configured value.
        jitter_s = 0.995 * jitter_s + 0.1 * p.wobble * rng.gaussian();
        jitter_f = 0.95 * jitter_f + 0.31 * p.wobble * rng.gaussian();
        phi_s += w_slow * (1.0 + jitter_s);
        phi_f += w_fast * (1.0 + jitter_f);

        const double c = std::cos(phi_s);
        const double gate_raw = (c - gate_on) / (1.0 - gate_on);
        const double gate = gate_raw <= 0.0 ? 0.0 : std::min(1.0, 1.5 * gate_raw);
        const bool gate_open = gate > 0.5;
        if (gate_open && !gate_prev) ++bursts;
        gate_prev = gate_open;

        const double slow = std::sin(phi_s) + 0.25 * std::sin(2.0 * phi_s);
        ts.values[k] = slow + p.amp_fast * gate * std::sin(phi_f);
    }
    // The count check only applies when the series is long enough to hold
    // two bursts; short series (e.g. n = 2) stay valid.
    if (static_cast<double>(n) >= 2.0 * p.slow_period && bursts < 2)
        throw std::runtime_error("surrogate parameters yield a non-bursting trace (" +
                                 std::to_string(bursts) + " bursts)");
    return ts;
}

TimeSeries normalize(const TimeSeries& ts) {
    if (ts.size() < 2) throw std::invalid_argument("series too short to normalize");
    const double var = series_variance(ts);
    if (var <= 0.0) throw std::invalid_argument("cannot normalize a zero-variance series");
    const double mu = series_mean(ts);
    const double inv_sd = 1.0 / std::sqrt(var);
    TimeSeries out;
    out.dt = ts.dt;
    out.name = ts.name;
    out.values.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        out.values[i] = (ts.values[i] - mu) * inv_sd;
    return out;
}

TimeSeries add_noise(const TimeSeries& ts, double snr, std::uint64_t seed) {
    if (snr <= 0.0) throw std::invalid_argument("snr must be > 0");
    const double noise_sd = std::sqrt(series_variance(ts) / snr);
    Rng rng(seed_hash(seed, 0x6e6f6973));
    TimeSeries out;
    out.dt = ts.dt;
    out.name = ts.name;
    out.values.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        out.values[i] = ts.values[i] + noise_sd * rng.gaussian();
    return out;
}

PointCloud delay_embed(const TimeSeries& ts, const EmbeddingSpec& spec) {
    spec.validate(ts.size());
    const int max_lag = spec.max_lag();
    const std::size_t n_pts = ts.size() - static_cast<std::size_t>(max_lag);
    PointCloud cloud;
    cloud.dim = spec.dim();
    cloud.data.resize(n_pts * static_cast<std::size_t>(cloud.dim));
    cloud.time_index.resize(n_pts);
    for (std::size_t k = 0; k < n_pts; ++k) {
        const std::size_t t = k + static_cast<std::size_t>(max_lag);
        double* row = cloud.row(k);
        row[0] = ts.values[t];
        for (std::size_t j = 0; j < spec.lags.size(); ++j)
            row[j + 1] = ts.values[t - static_cast<std::size_t>(spec.lags[j])];
        cloud.time_index[k] = static_cast<std::int64_t>(t);
    }
    return cloud;
}

namespace {

// Second-order accurate first derivative, one-sided at the ends.
std::vector<double> derivative(const std::vector<double>& x, double dt) {
    const std::size_t n = x.size();
    std::vector<double> d(n);
    const double inv2dt = 1.0 / (2.0 * dt);
    d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) * inv2dt;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - x[i - 1]) * inv2dt;
    d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) * inv2dt;
    return d;
}

}  // namespace

PointCloud derivative_embed(const TimeSeries& ts, int m) {
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    if (ts.size() <= 2 * static_cast<std::size_t>(m))
        throw std::invalid_argument("series too short for derivative embedding");
    const std::size_t n = ts.size();
    PointCloud cloud;
    cloud.dim = m;
    cloud.data.resize(n * static_cast<std::size_t>(m));
    cloud.time_index.resize(n);
    std::vector<double> coord = ts.values;
    for (int j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            cloud.data[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)] =
                coord[i];
        if (j + 1 < m) coord = derivative(coord, ts.dt);
    }
    for (std::size_t i = 0; i < n; ++i)
        cloud.time_index[i] = static_cast<std::int64_t>(i);
    return cloud;
}

PointCloud intdiff_embed(const TimeSeries& ts) {
    if (ts.size() <= 4) throw std::invalid_argument("series too short for intdiff embedding");
    const std::size_t n = ts.size();
    const double mu = series_mean(ts);
    std::vector<double> integral(n);
    integral[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        integral[i] = integral[i - 1] +
                      0.5 * ts.dt * ((ts.values[i - 1] - mu) + (ts.values[i] - mu));
    }
    const std::vector<double> deriv = derivative(ts.values, ts.dt);
    PointCloud cloud;
    cloud.dim = 3;
    cloud.data.resize(n * 3);
    cloud.time_index.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cloud.data[i * 3 + 0] = integral[i];
        cloud.data[i * 3 + 1] = ts.values[i];
        cloud.data[i * 3 + 2] = deriv[i];
        cloud.time_index[i] = static_cast<std::int64_t>(i);
    }
    return cloud;
}

PcaEmbedding pca_embed(const TimeSeries& ts, int window, int d) {
    const std::size_t n = ts.size();
    if (window < 1 || static_cast<std::size_t>(window) > n / 2)
        throw std::invalid_argument("window must satisfy 1 <= window <= N/2");
    if (d < 1 || d > window) throw std::invalid_argument("d must satisfy 1 <= d <= window");
    const std::size_t m = static_cast<std::size_t>(window);
    const std::size_t n_rows = n - m + 1;
    const double row_scale = 1.0 / std::sqrt(static_cast<double>(n_rows));

    // Trajectory matrix row i: (x(t_i), x(t_i - 1), ..., x(t_i - (M-1))),
    // scaled by N^{-1/2}; covariance C = X^T X.
    std::vector<double> cov(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double acc = knl::dot(ts.values.data() + (m - 1 - i),
                                  ts.values.data() + (m - 1 - j), n_rows);
            acc *= row_scale * row_scale;
            cov[i * m + j] = acc;
            cov[j * m + i] = acc;
        }
    }
    const SymmetricEigen eig = jacobi_eigen(cov, m);

    PcaEmbedding out;
    out.singular_values.resize(m);
    for (std::size_t k = 0; k < m; ++k)
        out.singular_values[k] = std::sqrt(std::max(0.0, eig.values[k]));

    out.cloud.dim = d;
    out.cloud.data.resize(n_rows * static_cast<std::size_t>(d));
    out.cloud.time_index.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::size_t t = r + m - 1;
        for (int k = 0; k < d; ++k) {
            const double* evec = eig.vectors.data() + static_cast<std::size_t>(k) * m;
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += ts.values[t - j] * evec[j];
            out.cloud.data[r * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] =
                acc * row_scale;
        }
        out.cloud.time_index[r] = static_cast<std::int64_t>(t);
    }
    return out;
}

std::vector<std::size_t> neighbor_search(const PointCloud& cloud,
                                         std::size_t query, std::size_t k,
                                         std::int64_t theiler) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (theiler < 0) throw std::invalid_argument("theiler must be >= 0");
    if (query >= cloud.n_pts()) throw std::invalid_argument("query out of range");
    const std::int64_t tq = cloud.time_index[query];
    std::vector<std::pair<double, std::size_t>> candidates;
    candidates.reserve(cloud.n_pts());
    for (std::size_t i = 0; i < cloud.n_pts(); ++i) {
        if (std::llabs(cloud.time_index[i] - tq) <= theiler) continue;
        candidates.emplace_back(point_dist2(cloud, query, i), i);
    }
    if (candidates.size() < k)
        throw std::runtime_error("fewer than k admissible neighbors");
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = candidates[i].second;
    return out;
}

RecurrenceMatrix recurrence_plot(const PointCloud& cloud,
                                 double threshold_quantile) {
    if (threshold_quantile <= 0.0 || threshold_quantile >= 1.0)
        throw std::invalid_argument("threshold_quantile must lie in (0,1)");
    const std::size_t n = cloud.n_pts();
    RecurrenceMatrix rm;
    rm.size = n;
    rm.bits.assign(n * n, 0);
    if (n == 1) {
        rm.bits[0] = 1;
        rm.threshold = 0.0;
        return rm;
    }

    // Threshold from a deterministic sample of pairwise distances: all pairs
    // when feasible, otherwise a fixed-stride subset.
    const std::size_t n_pairs = n * (n - 1) / 2;
    constexpr std::size_t kMaxSample = 2'000'000;
    const std::size_t stride = n_pairs <= kMaxSample ? 1 : (n_pairs + kMaxSample - 1) / kMaxSample;
    std::vector<double> sample;
    sample.reserve(std::min(n_pairs, kMaxSample) + 1);
    std::size_t counter = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (counter++ % stride == 0) sample.push_back(point_dist2(cloud, i, j));
        }
    }
    std::sort(sample.begin(), sample.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(threshold_quantile * static_cast<double>(sample.size())));
    const double eps2 = sample[std::min(sample.size() - 1, rank == 0 ? 0 : rank - 1)];
    rm.threshold = std::sqrt(eps2);

    for (std::size_t i = 0; i < n; ++i) {
        rm.bits[i * n + i] = 1;
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::uint8_t hit = point_dist2(cloud, i, j) <= eps2 ? 1 : 0;
            rm.bits[i * n + j] = hit;
            rm.bits[j * n + i] = hit;
        }
    }
    return rm;
}

TimeSeries load_csv(const std::string& path, int column, double dt) {
    if (column < 0) throw std::invalid_argument("column must be >= 0");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    TimeSeries ts;
    ts.dt = dt;
    ts.name = path;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') continue;  // comment/metadata lines
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (static_cast<std::size_t>(column) >= fields.size())
            throw std::runtime_error("row " + std::to_string(row) + ": missing column " +
                                     std::to_string(column));
        const std::string& cell = fields[static_cast<std::size_t>(column)];
        double value = 0.0;
        std::size_t consumed = 0;
        bool ok = true;
        try {
            value = std::stod(cell, &consumed);
        } catch (const std::exception&) {
            ok = false;
        }
        if (ok) {
            while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
                ++consumed;
            ok = consumed == cell.size();
        }
        if (!ok) {
            // A non-numeric first content row is a header.
            if (ts.values.empty() && !header_seen) {
                header_seen = true;
                continue;
            }
            throw std::runtime_error("row " + std::to_string(row) + ": non-numeric value '" +
                                     cell + "'");
        }
        if (!std::isfinite(value))
            throw std::runtime_error("row " + std::to_string(row) + ": non-finite value");
        ts.values.push_back(value);
    }
    if (ts.values.empty()) throw std::runtime_error("empty series in " + path);
    return ts;
}

}  // namespace delaykit
