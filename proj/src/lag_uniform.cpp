#include "delaykit/lag_uniform.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "delaykit/fft.hpp"
#include "delaykit/kernels.hpp"
#include "delaykit/linalg.hpp"
#include "delaykit/neighbors.hpp"
#include "delaykit/rng.hpp"

namespace delaykit {

LagProfile autocorrelation(const TimeSeries& ts, int tau_max) {
    const std::size_t n = ts.size();
    if (tau_max < 1 || static_cast<std::size_t>(tau_max) >= n / 2)
        throw std::invalid_argument("tau_max must satisfy 1 <= tau_max < N/2");
    const double mu = series_mean(ts);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = ts.values[i] - mu;
    const double a0 = knl::dot(centered.data(), centered.data(), n);
    LagProfile profile;
    profile.method = "autocorrelation";
    if (a0 <= 0.0) {
        for (int tau = 0; tau <= tau_max; ++tau) profile.push_gap(tau);
        return profile;
    }
    profile.push(0, 1.0, static_cast<int>(n));
    for (int tau = 1; tau <= tau_max; ++tau) {
        const std::size_t overlap = n - static_cast<std::size_t>(tau);
        const double a =
            knl::dot(centered.data(), centered.data() + tau, overlap) / a0;
        profile.push(tau, a, static_cast<int>(overlap));
    }
    return profile;
}

LagProfile mutual_information(const TimeSeries& ts, int tau_max, int bins) {
    const std::size_t n = ts.size();
    if (bins < 2) throw std::invalid_argument("bins must be >= 2");
    if (tau_max < 1 || static_cast<std::size_t>(tau_max) >= n / 2)
        throw std::invalid_argument("tau_max must satisfy 1 <= tau_max < N/2");
    const auto [lo_it, hi_it] = std::minmax_element(ts.values.begin(), ts.values.end());
    const double lo = *lo_it;
    const double width = (*hi_it - lo);
    LagProfile profile;
    profile.method = "mutual_information";
    profile.params["bins"] = std::to_string(bins);
    if (width <= 0.0) {
        for (int tau = 0; tau <= tau_max; ++tau) profile.push_gap(tau);
        return profile;
    }
    const double inv_bin = static_cast<double>(bins) / width;
    std::vector<int> bin_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        int b = static_cast<int>((ts.values[i] - lo) * inv_bin);
        bin_of[i] = std::min(b, bins - 1);
    }
    const std::size_t nb = static_cast<std::size_t>(bins);
    std::vector<double> joint(nb * nb);
    std::vector<double> px(nb), py(nb);
    for (int tau = 0; tau <= tau_max; ++tau) {
        std::fill(joint.begin(), joint.end(), 0.0);
        const std::size_t pairs = n - static_cast<std::size_t>(tau);
        for (std::size_t t = 0; t < pairs; ++t)
            joint[static_cast<std::size_t>(bin_of[t]) * nb +
                  static_cast<std::size_t>(bin_of[t + static_cast<std::size_t>(tau)])] += 1.0;
        std::fill(px.begin(), px.end(), 0.0);
        std::fill(py.begin(), py.end(), 0.0);
        const double inv_pairs = 1.0 / static_cast<double>(pairs);
        for (std::size_t i = 0; i < nb; ++i) {
            for (std::size_t j = 0; j < nb; ++j) {
                const double p = joint[i * nb + j] * inv_pairs;
                joint[i * nb + j] = p;
                px[i] += p;
                py[j] += p;
            }
        }
        double mi = 0.0;
        for (std::size_t i = 0; i < nb; ++i) {
            if (px[i] <= 0.0) continue;
            for (std::size_t j = 0; j < nb; ++j) {
                const double p = joint[i * nb + j];
                if (p <= 0.0) continue;
                mi += p * std::log2(p / (px[i] * py[j]));
            }
        }
        profile.push(tau, mi, static_cast<int>(pairs));
    }
    return profile;
}

int quarter_period(const TimeSeries& ts) {
    if (ts.size() < 16) throw std::invalid_argument("series too short for quarter_period");
    const auto power = power_spectrum(ts);
    const std::size_t bin = dominant_frequency_bin(power);
    // w_c = bin / (N dt), so 1 / (4 w_c dt) = N / (4 bin).
    const double tau =
        static_cast<double>(ts.size()) / (4.0 * static_cast<double>(bin));
    return static_cast<int>(std::lround(tau));
}

LagProfile recurrence_distance(const TimeSeries& ts, int tau_max) {
    const std::size_t n = ts.size();
    if (tau_max < 1 || n <= 5 * static_cast<std::size_t>(tau_max))
        throw std::invalid_argument("recurrence_distance needs N > 5 tau_max");
    LagProfile profile;
    profile.method = "recurrence_distance";
    for (int tau = 1; tau <= tau_max; ++tau) {
        const std::size_t t0 = static_cast<std::size_t>(tau);
        const std::size_t t1 = n - 1 - 4 * static_cast<std::size_t>(tau);
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t t = t0; t <= t1; ++t) {
            const double d0 = ts.values[t] - ts.values[t + 4 * static_cast<std::size_t>(tau)];
            const double d1 = ts.values[t - static_cast<std::size_t>(tau)] -
                              ts.values[t + 3 * static_cast<std::size_t>(tau)];
            acc += std::sqrt(d0 * d0 + d1 * d1);
            ++count;
        }
        profile.push(tau, acc / static_cast<double>(count), static_cast<int>(count));
    }
    return profile;
}

namespace {

// Deduplicating sampler over unordered point pairs.
struct PairSampler {
    Rng& rng;
    std::size_t n;
    std::set<std::pair<std::size_t, std::size_t>> seen;

    bool next(std::size_t& i, std::size_t& j) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            i = static_cast<std::size_t>(rng.uniform_int(n));
            j = static_cast<std::size_t>(rng.uniform_int(n));
            if (i == j) continue;
            if (i > j) std::swap(i, j);
            if (seen.insert({i, j}).second) return true;
        }
        return false;
    }
};

double sampled_distance_percentile(const SoaCloud& soa, Rng& rng, double pct,
                                   std::size_t n_sample) {
    std::vector<double> dists;
    dists.reserve(n_sample);
    PairSampler sampler{rng, soa.n_pts(), {}};
    std::size_t i = 0, j = 0;
    for (std::size_t s = 0; s < n_sample; ++s) {
        if (!sampler.next(i, j)) break;
        dists.push_back(std::sqrt(soa.dist2(i, j)));
    }
    if (dists.empty()) return 0.0;
    std::sort(dists.begin(), dists.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(pct * static_cast<double>(dists.size())));
    return dists[std::min(dists.size() - 1, rank == 0 ? 0 : rank - 1)];
}

}  // namespace

GridProfile gao_zheng(const TimeSeries& ts, const std::vector<int>& ms,
                      int tau_max, int k, double r, int theiler, int n_ref,
                      std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (n_ref < 1) throw std::invalid_argument("n_ref must be >= 1");
    GridProfile grid;
    grid.method = "gao_zheng";
    grid.ms = ms;
    for (int tau = 1; tau <= tau_max; ++tau) grid.taus.push_back(tau);
    grid.values.assign(ms.size() * grid.taus.size(), 0.0);
    grid.n_used.assign(grid.values.size(), 0);
    grid.gap.assign(grid.values.size(), 0);
    grid.params["k"] = std::to_string(k);

    for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        const int m = ms[mi];
        for (std::size_t ti = 0; ti < grid.taus.size(); ++ti) {
            const int tau = grid.taus[ti];
            const std::size_t cell = grid.index(mi, ti);
            const auto spec = EmbeddingSpec::uniform(tau, m);
            if (static_cast<std::size_t>(spec.max_lag()) + 8 >= ts.size()) {
                grid.values[cell] = std::numeric_limits<double>::quiet_NaN();
                grid.gap[cell] = 1;
                continue;
            }
            const PointCloud cloud = delay_embed(ts, spec);
            const SoaCloud soa(cloud);
            const std::size_t evolvable =
                cloud.n_pts() > static_cast<std::size_t>(k)
                    ? cloud.n_pts() - static_cast<std::size_t>(k)
                    : 0;
            Rng rng(seed_hash(seed, static_cast<std::uint64_t>(m),
                              static_cast<std::uint64_t>(tau)));
            const double r_cell =
                r > 0.0 ? r : sampled_distance_percentile(soa, rng, 0.10, 2000);
            double acc = 0.0;
            int found = 0;
            PairSampler sampler{rng, evolvable, {}};
            std::size_t i = 0, j = 0;
            const int max_attempts = 100 * n_ref;
            for (int attempt = 0; attempt < max_attempts && found < n_ref; ++attempt) {
                if (!sampler.next(i, j)) break;
                if (std::llabs(cloud.time_index[i] - cloud.time_index[j]) <= theiler)
                    continue;
                const double d0 = std::sqrt(soa.dist2(i, j));
                if (d0 <= 0.0 || d0 > r_cell) continue;
                const double d1 = std::sqrt(
                    soa.dist2(i + static_cast<std::size_t>(k), j + static_cast<std::size_t>(k)));
                if (d1 <= 0.0) continue;
                acc += std::log(d1 / d0);
                ++found;
            }
            if (found < std::max(1, n_ref / 10)) {
                grid.values[cell] = std::numeric_limits<double>::quiet_NaN();
                grid.gap[cell] = 1;
            } else {
                grid.values[cell] = acc / static_cast<double>(found);
                grid.n_used[cell] = found;
            }
        }
    }
    return grid;
}

GridProfile characteristic_lengths(const TimeSeries& ts, const std::vector<int>& ms,
                                   int tau_max, double fraction, int theiler,
                                   int n_ref, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw std::invalid_argument("fraction must lie in (0, 1]");
    GridProfile grid;
    grid.method = "characteristic_lengths";
    grid.ms = ms;
    for (int tau = 1; tau <= tau_max; ++tau) grid.taus.push_back(tau);
    grid.values.assign(ms.size() * grid.taus.size(), 0.0);
    grid.n_used.assign(grid.values.size(), 0);
    grid.gap.assign(grid.values.size(), 0);
    grid.params["fraction"] = std::to_string(fraction);
    int capped_total = 0;

    std::vector<double> scratch;
    for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        const int m = ms[mi];
        for (std::size_t ti = 0; ti < grid.taus.size(); ++ti) {
            const int tau = grid.taus[ti];
            const std::size_t cell = grid.index(mi, ti);
            const auto spec = EmbeddingSpec::uniform(tau, m);
            if (static_cast<std::size_t>(spec.max_lag()) + 8 >= ts.size()) {
                grid.values[cell] = std::numeric_limits<double>::quiet_NaN();
                grid.gap[cell] = 1;
                continue;
            }
            const PointCloud cloud = delay_embed(ts, spec);
            const SoaCloud soa(cloud);
            Rng rng(seed_hash(seed, static_cast<std::uint64_t>(m),
                              static_cast<std::uint64_t>(tau)));
            // J: characteristic length from sampled pairs.
            double j_acc = 0.0;
            int j_count = 0;
            {
                PairSampler sampler{rng, soa.n_pts(), {}};
                std::size_t a = 0, b = 0;
                for (int s = 0; s < n_ref; ++s) {
                    if (!sampler.next(a, b)) break;
                    j_acc += std::sqrt(soa.dist2(a, b));
                    ++j_count;
                }
            }
            if (j_count == 0) {
                grid.values[cell] = std::numeric_limits<double>::quiet_NaN();
                grid.gap[cell] = 1;
                continue;
            }
            const double threshold = fraction * (j_acc / static_cast<double>(j_count));

            const auto refs =
                sample_without_replacement(soa.n_pts(), static_cast<std::size_t>(n_ref), rng);
            double t_acc = 0.0;
            int used = 0;
            int capped = 0;
            for (const std::size_t ref : refs) {
                const auto nn = soa.knn(ref, 1, theiler, scratch);
                if (nn.empty()) continue;
                const std::size_t nb = nn.front();
                std::size_t t = 1;
                bool diverged = false;
                while (ref + t < soa.n_pts() && nb + t < soa.n_pts()) {
                    if (std::sqrt(soa.dist2(ref + t, nb + t)) > threshold) {
                        diverged = true;
                        break;
                    }
                    ++t;
                }
                if (!diverged) ++capped;
                t_acc += static_cast<double>(t);
                ++used;
            }
            if (used == 0) {
                grid.values[cell] = std::numeric_limits<double>::quiet_NaN();
                grid.gap[cell] = 1;
            } else {
                grid.values[cell] = t_acc / static_cast<double>(used);
                grid.n_used[cell] = used;
                capped_total += capped;
            }
        }
    }
    grid.params["capped_pairs"] = std::to_string(capped_total);
    return grid;
}

GridProfile wavering_product(const TimeSeries& ts, const std::vector<int>& ms,
                             int tau_max, int n_neighbors, int n_ref, int theiler,
                             std::uint64_t seed) {
    if (n_neighbors < 1) throw std::invalid_argument("n_neighbors must be >= 1");
    for (int m : ms)
        if (m < 2) throw std::invalid_argument("wavering_product needs m >= 2");
    GridProfile grid;
    grid.method = "wavering_product";
    grid.ms = ms;
    for (int tau = 1; tau <= tau_max; ++tau) grid.taus.push_back(tau);
    grid.values.assign(ms.size() * grid.taus.size(), 0.0);
    grid.n_used.assign(grid.values.size(), 0);
    grid.gap.assign(grid.values.size(), 0);
    grid.params["n_neighbors"] = std::to_string(n_neighbors);
    int skipped_pairs_total = 0;

    std::vector<double> scratch;
    for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        const int m = ms[mi];
        for (std::size_t ti = 0; ti < grid.taus.size(); ++ti) {
            const int tau = grid.taus[ti];
            const std::size_t cell = grid.index(mi, ti);
            // One (m+1)-dimensional embedding; orders m-1, m, m+1 are
            // coordinate prefixes of it, all on a common time range.
            const auto spec_up = EmbeddingSpec::uniform(tau, m + 1);
            if (static_cast<std::size_t>(spec_up.max_lag()) + 8 >= ts.size()) {
                grid.values[cell] = std::numeric_limits<double>::quiet_NaN();
                grid.gap[cell] = 1;
                continue;
            }
            const PointCloud cloud = delay_embed(ts, spec_up);
            const SoaCloud soa_mid(cloud, m);
            Rng rng(seed_hash(seed, static_cast<std::uint64_t>(m),
                              static_cast<std::uint64_t>(tau)));
            const auto refs = sample_without_replacement(
                cloud.n_pts(), static_cast<std::size_t>(n_ref), rng);
            auto dist_prefix = [&](std::size_t a, std::size_t b, int d) {
                return std::sqrt(knl::dist2(cloud.row(a), cloud.row(b),
                                            static_cast<std::size_t>(d)));
            };
            double w_acc = 0.0;
            int used = 0;
            int skipped_pairs = 0;
            for (const std::size_t ref : refs) {
                const auto nn = soa_mid.knn(ref, static_cast<std::size_t>(n_neighbors),
                                            theiler, scratch);
                if (nn.size() < static_cast<std::size_t>(n_neighbors)) continue;
                double w_i = 1.0;
                bool ok = true;
                for (const std::size_t nb : nn) {
                    const double d_mid = dist_prefix(ref, nb, m);
                    const double d_up = dist_prefix(ref, nb, m + 1);
                    const double d_down = dist_prefix(ref, nb, m - 1);
                    if (d_mid <= 0.0 || d_down <= 0.0) {
                        ++skipped_pairs;
                        ok = false;
                        break;
                    }
                    w_i *= (d_up / d_mid) * (d_mid / d_down);
                }
                if (!ok) continue;
                w_acc += w_i;
                ++used;
            }
            if (used == 0) {
                grid.values[cell] = std::numeric_limits<double>::quiet_NaN();
                grid.gap[cell] = 1;
            } else {
                grid.values[cell] = std::log(w_acc / static_cast<double>(used));
                grid.n_used[cell] = used;
            }
            skipped_pairs_total += skipped_pairs;
        }
    }
    grid.params["skipped_pairs"] = std::to_string(skipped_pairs_total);
    return grid;
}

LagProfile fill_factor(const TimeSeries& ts, int m, int tau_max, int n_samples,
                       std::uint64_t seed) {
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    const auto power = power_spectrum(ts);
    const std::size_t bin = dominant_frequency_bin(power);
    const double t_c_samples = static_cast<double>(ts.size()) / static_cast<double>(bin);
    int tau_hi = std::min(tau_max, static_cast<int>(std::ceil(t_c_samples / 2.0)) - 1);
    const auto [lo_it, hi_it] = std::minmax_element(ts.values.begin(), ts.values.end());
    const double range = *hi_it - *lo_it;
    const double log_range_m = static_cast<double>(m) * std::log(range);

    LagProfile profile;
    profile.method = "fill_factor";
    profile.params["m"] = std::to_string(m);
    profile.params["t_c_samples"] = std::to_string(t_c_samples);
    std::vector<double> mat(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    for (int tau = 1; tau <= tau_hi; ++tau) {
        const auto spec = EmbeddingSpec::uniform(tau, m);
        if (static_cast<std::size_t>(spec.max_lag()) + static_cast<std::size_t>(m) + 2 >=
            ts.size()) {
            profile.push_gap(tau);
            continue;
        }
        const PointCloud cloud = delay_embed(ts, spec);
        Rng rng(seed_hash(seed, static_cast<std::uint64_t>(tau)));
        double vol_acc = 0.0;
        int draws = 0;
        for (int s = 0; s < n_samples; ++s) {
            // m+1 distinct points; the first is the reference corner.
            std::vector<std::size_t> pick;
            pick.reserve(static_cast<std::size_t>(m) + 1);
            int guard = 0;
            while (pick.size() < static_cast<std::size_t>(m) + 1 && guard++ < 1000) {
                const std::size_t cand =
                    static_cast<std::size_t>(rng.uniform_int(cloud.n_pts()));
                if (std::find(pick.begin(), pick.end(), cand) == pick.end())
                    pick.push_back(cand);
            }
            if (pick.size() < static_cast<std::size_t>(m) + 1) break;
            const double* ref = cloud.row(pick[0]);
            for (int c = 0; c < m; ++c) {
                const double* p = cloud.row(pick[static_cast<std::size_t>(c) + 1]);
                for (int rr = 0; rr < m; ++rr)
                    mat[static_cast<std::size_t>(rr) * m + static_cast<std::size_t>(c)] =
                        p[rr] - ref[rr];
            }
            vol_acc += abs_det(mat, static_cast<std::size_t>(m));
            ++draws;
        }
        if (draws == 0 || vol_acc <= 0.0) {
            profile.push_gap(tau);
        } else {
            const double f =
                std::log(vol_acc / static_cast<double>(draws)) - log_range_m;
            profile.push(tau, f, draws);
        }
    }
    if (profile.size() < 1) throw std::runtime_error("fill_factor: empty tau interval");
    return profile;
}

namespace {

struct NeighborhoodSetup {
    PointCloud cloud;
    SoaCloud soa;
    std::vector<std::size_t> candidates;  // cloud indices with valid futures
};

// Reference/neighbor candidates whose futures up to t + h_max stay inside
// the series.
NeighborhoodSetup make_setup(const TimeSeries& ts, const EmbeddingSpec& spec,
                             int h_max) {
    PointCloud cloud = delay_embed(ts, spec);
    SoaCloud soa(cloud);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < cloud.n_pts(); ++i) {
        if (cloud.time_index[i] + h_max < static_cast<std::int64_t>(ts.size()))
            candidates.push_back(i);
    }
    return {std::move(cloud), std::move(soa), std::move(candidates)};
}

}  // namespace

double noise_amplification(const TimeSeries& ts, const EmbeddingSpec& spec,
                           const std::vector<int>& horizons, int k, int theiler,
                           int n_ref, std::uint64_t seed, NeighborhoodStats* stats) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (horizons.empty()) throw std::invalid_argument("horizons must be nonempty");
    const int h_max = *std::max_element(horizons.begin(), horizons.end());
    auto setup = make_setup(ts, spec, h_max);

    // Restrict the searchable cloud to candidates with valid futures.
    PointCloud restricted;
    restricted.dim = setup.cloud.dim;
    for (const std::size_t i : setup.candidates) {
        const double* row = setup.cloud.row(i);
        restricted.data.insert(restricted.data.end(), row, row + setup.cloud.dim);
        restricted.time_index.push_back(setup.cloud.time_index[i]);
    }
    if (restricted.n_pts() < static_cast<std::size_t>(k) + 1)
        throw std::runtime_error("insufficient admissible neighbors");
    SoaCloud soa(restricted);

    Rng rng(seed_hash(seed, 0x6e616d70));
    const auto refs = sample_without_replacement(
        restricted.n_pts(), static_cast<std::size_t>(n_ref), rng);
    std::vector<double> scratch;
    double acc = 0.0;
    std::size_t terms = 0;
    int refs_used = 0, refs_skipped = 0;
    std::vector<double> future(static_cast<std::size_t>(k) + 1);
    for (const std::size_t ref : refs) {
        const auto nn = soa.knn(ref, static_cast<std::size_t>(k), theiler, scratch);
        if (nn.size() < static_cast<std::size_t>(k)) {
            ++refs_skipped;
            continue;
        }
        const double eps = std::sqrt(soa.dist2(ref, nn.back()));
        bool skipped = false;
        for (const int h : horizons) {
            future[0] =
                ts.values[static_cast<std::size_t>(restricted.time_index[ref] + h)];
            for (std::size_t j = 0; j < nn.size(); ++j)
                future[j + 1] =
                    ts.values[static_cast<std::size_t>(restricted.time_index[nn[j]] + h)];
            const double n_pts = static_cast<double>(future.size());
            const double mean = knl::sum(future.data(), future.size()) / n_pts;
            double var = 0.0;
            for (const double v : future) var += (v - mean) * (v - mean);
            var /= n_pts;
            if (eps <= 0.0) {
                // Coincident neighborhoods with coincident futures amplify
                // nothing; a spread over a zero radius is undefined and the
                // reference is dropped.
                if (var > 0.0) {
                    skipped = true;
                    break;
                }
                ++terms;
                continue;
            }
            acc += std::sqrt(var) / eps;
            ++terms;
        }
        if (skipped) {
            ++refs_skipped;
            continue;
        }
        ++refs_used;
    }
    if (terms == 0) throw std::runtime_error("insufficient admissible neighbors");
    if (stats != nullptr) {
        stats->refs_used = refs_used;
        stats->refs_skipped = refs_skipped;
    }
    return acc / static_cast<double>(terms);
}

double l_statistic(const TimeSeries& ts, const EmbeddingSpec& spec, int t_max,
                   int k, int theiler, int n_ref, std::uint64_t seed,
                   NeighborhoodStats* stats) {
    if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    auto setup = make_setup(ts, spec, t_max);
    PointCloud restricted;
    restricted.dim = setup.cloud.dim;
    for (const std::size_t i : setup.candidates) {
        const double* row = setup.cloud.row(i);
        restricted.data.insert(restricted.data.end(), row, row + setup.cloud.dim);
        restricted.time_index.push_back(setup.cloud.time_index[i]);
    }
    if (restricted.n_pts() < static_cast<std::size_t>(k) + 1)
        throw std::runtime_error("insufficient admissible neighbors");
    SoaCloud soa(restricted);

    Rng rng(seed_hash(seed, 0x6c737461));
    const auto refs = sample_without_replacement(
        restricted.n_pts(), static_cast<std::size_t>(n_ref), rng);
    std::vector<double> scratch;
    double sigma2_acc = 0.0;
    double inv_eps2_acc = 0.0;
    int refs_used = 0, refs_skipped = 0;
    std::vector<double> future(static_cast<std::size_t>(k) + 1);
    for (const std::size_t ref : refs) {
        const auto nn = soa.knn(ref, static_cast<std::size_t>(k), theiler, scratch);
        if (nn.size() < static_cast<std::size_t>(k)) {
            ++refs_skipped;
            continue;
        }
        const double eps2 = soa.dist2(ref, nn.back());
        if (eps2 <= 0.0) {
            ++refs_skipped;
            continue;
        }
        double var_acc = 0.0;
        for (int h = 1; h <= t_max; ++h) {
            future[0] =
                ts.values[static_cast<std::size_t>(restricted.time_index[ref] + h)];
            for (std::size_t j = 0; j < nn.size(); ++j)
                future[j + 1] =
                    ts.values[static_cast<std::size_t>(restricted.time_index[nn[j]] + h)];
            const double n_pts = static_cast<double>(future.size());
            const double mean = knl::sum(future.data(), future.size()) / n_pts;
            double var = 0.0;
            for (const double v : future) var += (v - mean) * (v - mean);
            var_acc += var / n_pts;
        }
        sigma2_acc += (var_acc / static_cast<double>(t_max)) / eps2;
        inv_eps2_acc += 1.0 / eps2;
        ++refs_used;
    }
    if (refs_used == 0) throw std::runtime_error("insufficient admissible neighbors");
    if (stats != nullptr) {
        stats->refs_used = refs_used;
        stats->refs_skipped = refs_skipped;
    }
    const double sigma2 = sigma2_acc / static_cast<double>(refs_used);
    const double alpha2 = 1.0 / inv_eps2_acc;
    return 0.5 * std::log(sigma2 * alpha2);
}

namespace {

// Kennel criterion for one lag set: fraction of points whose nearest
// neighbor in the base space separates by more than rtol times its base
// distance in the appended coordinate.
double fnn_for_lagset(const TimeSeries& ts, const std::vector<int>& base_lags,
                      int new_lag, double rtol, int theiler) {
    EmbeddingSpec spec_up;
    spec_up.lags = base_lags;
    spec_up.lags.push_back(new_lag);
    spec_up.validate(ts.size());
    const PointCloud cloud = delay_embed(ts, spec_up);
    if (cloud.n_pts() < 2) throw std::runtime_error("insufficient points for FNN");
    const int base_dim = cloud.dim - 1;
    // The appended coordinate sits in the last column; embed order keeps
    // base lags first.
    const KdTree tree(cloud, base_dim);
    std::size_t fnn = 0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < cloud.n_pts(); ++i) {
        const std::size_t j = tree.nearest(i, theiler);
        if (j == kNoNeighbor) continue;
        const double base_d2 = knl::dist2(cloud.row(i), cloud.row(j),
                                          static_cast<std::size_t>(base_dim));
        if (base_d2 <= 0.0) continue;
        const double extra = std::abs(cloud.row(i)[base_dim] - cloud.row(j)[base_dim]);
        if (extra / std::sqrt(base_d2) > rtol) ++fnn;
        ++counted;
    }
    if (counted == 0) throw std::runtime_error("insufficient points for FNN");
    return static_cast<double>(fnn) / static_cast<double>(counted);
}

}  // namespace

LagProfile fnn_fraction(const TimeSeries& ts, int tau, const std::vector<int>& ms,
                        double rtol, int theiler) {
    if (rtol <= 1.0) throw std::invalid_argument("rtol must be > 1");
    if (!std::is_sorted(ms.begin(), ms.end()))
        throw std::invalid_argument("ms must be ascending");
    LagProfile profile;
    profile.method = "fnn";
    profile.params["tau"] = std::to_string(tau);
    profile.params["rtol"] = std::to_string(rtol);
    for (const int m : ms) {
        std::vector<int> base;
        for (int j = 1; j < m; ++j) base.push_back(j * tau);
        const double frac = fnn_for_lagset(ts, base, m * tau, rtol, theiler);
        // Grid is indexed by dimension here rather than lag.
        profile.push(m, frac, static_cast<int>(ts.size()));
    }
    return profile;
}

double fnn_fraction_lags(const TimeSeries& ts, const std::vector<int>& lags,
                         int new_lag, double rtol, int theiler) {
    if (rtol <= 1.0) throw std::invalid_argument("rtol must be > 1");
    return fnn_for_lagset(ts, lags, new_lag, rtol, theiler);
}

}  // namespace delaykit
