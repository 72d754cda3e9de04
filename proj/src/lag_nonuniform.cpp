#include "delaykit/lag_nonuniform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "delaykit/kernels.hpp"
#include "delaykit/lag_uniform.hpp"
#include "delaykit/linalg.hpp"
#include "delaykit/neighbors.hpp"
#include "delaykit/rng.hpp"

namespace delaykit {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::delta_l_positive: return "delta_L_positive";
        case Termination::fnn_threshold: return "fnn_threshold";
        case Termination::max_dims: return "max_dims";
        case Termination::mdl_increase: return "mdl_increase";
    }
    return "unknown";
}

LagProfile garcia_almeida(const TimeSeries& ts, const std::vector<int>& existing,
                          int tau_max, int theiler) {
    if (tau_max < 1 || static_cast<std::size_t>(tau_max) >= ts.size() / 2)
        throw std::invalid_argument("tau_max must satisfy 1 <= tau_max < N/2");
    LagProfile profile;
    profile.method = "garcia_almeida";
    std::size_t skipped_total = 0;
    for (int tau = 1; tau <= tau_max; ++tau) {
        if (std::find(existing.begin(), existing.end(), tau) != existing.end()) {
            profile.push_gap(tau);
            continue;
        }
        EmbeddingSpec spec;
        spec.lags = existing;
        spec.lags.push_back(tau);
        const PointCloud cloud = delay_embed(ts, spec);
        if (cloud.n_pts() < 3) {
            profile.push_gap(tau);
            continue;
        }
        const KdTree tree(cloud);
        std::size_t hits = 0;
        std::size_t counted = 0;
        std::size_t skipped = 0;
        for (std::size_t i = 0; i + 1 < cloud.n_pts(); ++i) {
            const std::size_t j = tree.nearest(i, theiler);
            if (j == kNoNeighbor || j + 1 >= cloud.n_pts()) continue;
            const double d1 = point_dist(cloud, i, j);
            const double d2 = point_dist(cloud, i + 1, j + 1);
            if (d1 <= 0.0) {
                // Coincident pairs that stay coincident are genuine
                // neighbors; an undefined ratio (d2 > 0) is skipped.
                if (d2 > 0.0) {
                    ++skipped;
                    continue;
                }
            } else if (d2 / d1 > 10.0) {
                ++hits;
            }
            ++counted;
        }
        skipped_total += skipped;
        if (counted == 0) {
            profile.push_gap(tau);
        } else {
            profile.push(tau, static_cast<double>(hits) / static_cast<double>(counted),
                         static_cast<int>(counted));
        }
    }
    profile.params["zero_d1_skipped"] = std::to_string(skipped_total);
    const auto selected = first_minimum(profile);
    if (selected.has_value()) profile.params["selected"] = std::to_string(*selected);
    return profile;
}

int binomial_rejection_count(int delta, double alpha) {
    if (delta < 1 || delta > 62) throw std::invalid_argument("delta out of range");
    // Smallest K with P(Bin(delta, 1/2) >= K) <= alpha, via exact tails.
    double tail = 0.0;
    const double scale = std::ldexp(1.0, -delta);  // 2^-delta
    for (int k = delta; k >= 0; --k) {
        // C(delta, k)
        double comb = 1.0;
        for (int i = 0; i < delta - k; ++i)
            comb = comb * static_cast<double>(delta - i) / static_cast<double>(i + 1);
        tail += comb * scale;
        if (tail > alpha) return k + 1;
    }
    return 0;
}

ContinuityProfile continuity_statistic(const TimeSeries& ts,
                                       const std::vector<int>& existing,
                                       int tau_max, const ContinuityParams& params) {
    if (params.alpha <= 0.0 || params.alpha >= 0.5)
        throw std::invalid_argument("alpha must lie in (0, 0.5)");
    if (params.delta_points.empty())
        throw std::invalid_argument("delta_points must be nonempty");
    if (tau_max < 1) throw std::invalid_argument("tau_max must be >= 1");

    EmbeddingSpec spec;
    spec.lags = existing;
    const PointCloud cloud = delay_embed(ts, spec);

    // A common reference set must support every candidate lag, so restrict
    // to time indices >= tau_max.
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < cloud.n_pts(); ++i)
        if (cloud.time_index[i] >= tau_max) pool.push_back(i);
    const int max_delta =
        *std::max_element(params.delta_points.begin(), params.delta_points.end());
    if (pool.size() < static_cast<std::size_t>(max_delta) + 2)
        throw std::runtime_error("series too short for continuity statistic");

    PointCloud restricted;
    restricted.dim = cloud.dim;
    for (const std::size_t i : pool) {
        const double* row = cloud.row(i);
        restricted.data.insert(restricted.data.end(), row, row + cloud.dim);
        restricted.time_index.push_back(cloud.time_index[i]);
    }
    SoaCloud soa(restricted);

    Rng rng(seed_hash(params.seed, 0x636f6e74));
    const auto refs = sample_without_replacement(
        restricted.n_pts(), static_cast<std::size_t>(params.n_ref), rng);

    std::vector<int> kmin(params.delta_points.size());
    std::vector<std::uint8_t> delta_ok(params.delta_points.size());
    for (std::size_t di = 0; di < params.delta_points.size(); ++di) {
        const int delta = params.delta_points[di];
        const int k = binomial_rejection_count(delta, params.alpha);
        // A rejection must be possible at this neighborhood size.
        delta_ok[di] = k >= 1 && k <= delta;
        kmin[di] = k;
    }
    if (std::find(delta_ok.begin(), delta_ok.end(), std::uint8_t{1}) == delta_ok.end())
        throw std::invalid_argument("alpha too small for every delta in delta_points");

    ContinuityProfile out;
    out.delta_points = params.delta_points;
    out.alpha = params.alpha;
    out.taus.resize(static_cast<std::size_t>(tau_max));
    out.eps_star.assign(static_cast<std::size_t>(tau_max), 0.0);
    out.n_used.assign(static_cast<std::size_t>(tau_max), 0);
    out.gap.assign(static_cast<std::size_t>(tau_max), 0);
    for (int tau = 1; tau <= tau_max; ++tau)
        out.taus[static_cast<std::size_t>(tau - 1)] = tau;

    std::vector<double> scratch;
    std::vector<double> lag_dist(static_cast<std::size_t>(max_delta));
    std::vector<double> sorted;
    for (const std::size_t ref : refs) {
        const auto nn = soa.knn(ref, static_cast<std::size_t>(max_delta),
                                params.theiler, scratch);
        if (nn.size() < static_cast<std::size_t>(max_delta)) continue;
        const std::int64_t t0 = restricted.time_index[ref];
        for (int tau = 1; tau <= tau_max; ++tau) {
            const double x0 = ts.values[static_cast<std::size_t>(t0 - tau)];
            for (std::size_t j = 0; j < nn.size(); ++j) {
                const std::int64_t tj = restricted.time_index[nn[j]];
                lag_dist[j] = std::abs(ts.values[static_cast<std::size_t>(tj - tau)] - x0);
            }
            double eps_ref = 0.0;
            for (std::size_t di = 0; di < params.delta_points.size(); ++di) {
                if (!delta_ok[di]) continue;
                const int delta = params.delta_points[di];
                sorted.assign(lag_dist.begin(), lag_dist.begin() + delta);
                std::sort(sorted.begin(), sorted.end());
                // kmin-th smallest lagged distance: the smallest eps that
                // still yields kmin successes.
                eps_ref = std::max(eps_ref, sorted[static_cast<std::size_t>(kmin[di] - 1)]);
            }
            out.eps_star[static_cast<std::size_t>(tau - 1)] += eps_ref;
            out.n_used[static_cast<std::size_t>(tau - 1)] += 1;
        }
    }
    for (int tau = 1; tau <= tau_max; ++tau) {
        const std::size_t i = static_cast<std::size_t>(tau - 1);
        if (out.n_used[i] == 0) {
            out.eps_star[i] = std::numeric_limits<double>::quiet_NaN();
            out.gap[i] = 1;
        } else {
            out.eps_star[i] /= static_cast<double>(out.n_used[i]);
        }
    }
    return out;
}

LagSequence pecuzal_select(const TimeSeries& ts, int tau_max, int max_dims,
                           const LParams& l_params,
                           const ContinuityParams& continuity_params) {
    if (max_dims < 2) throw std::invalid_argument("max_dims must be >= 2");
    LagSequence seq;
    seq.method = "pecuzal";
    seq.params["tau_max"] = std::to_string(tau_max);

    // Lags accumulate at the old end of the embedding window, i.e. each
    // candidate is measured from the window start. Running the backward
    // machinery on the time-reversed series realizes exactly that and
    // reports lags in the same frame as the reference results.
    TimeSeries reversed;
    reversed.dt = ts.dt;
    reversed.name = ts.name;
    reversed.values.assign(ts.values.rbegin(), ts.values.rend());

    EmbeddingSpec current;
    double l_current = l_statistic(reversed, current, l_params.t_max, l_params.k,
                                   l_params.theiler, l_params.n_ref,
                                   seed_hash(l_params.seed, 0));
    seq.params["l_initial"] = std::to_string(l_current);

    for (int cycle = 1; current.dim() < max_dims; ++cycle) {
        ContinuityParams cp = continuity_params;
        cp.seed = seed_hash(continuity_params.seed, static_cast<std::uint64_t>(cycle));
        const ContinuityProfile profile =
            continuity_statistic(reversed, current.lags, tau_max, cp);

        // Candidate lags: strict interior maxima of the smoothed profile.
        const auto maxima = local_maxima_indices(profile.eps_star, true);
        std::vector<int> candidates;
        for (const std::size_t idx : maxima) {
            const int tau = profile.taus[idx];
            if (std::find(current.lags.begin(), current.lags.end(), tau) ==
                current.lags.end())
                candidates.push_back(tau);
        }
        if (candidates.empty()) {
            seq.terminated_by = Termination::delta_l_positive;
            return seq;
        }

        int best_tau = -1;
        double best_l = std::numeric_limits<double>::infinity();
        for (const int tau : candidates) {
            EmbeddingSpec trial = current;
            trial.lags.push_back(tau);
            const double l_trial = l_statistic(
                reversed, trial, l_params.t_max, l_params.k, l_params.theiler,
                l_params.n_ref, seed_hash(l_params.seed, static_cast<std::uint64_t>(cycle)));
            if (l_trial < best_l || (l_trial == best_l && tau < best_tau)) {
                best_l = l_trial;
                best_tau = tau;
            }
        }
        if (!(best_l < l_current - l_params.min_decrease)) {
            seq.terminated_by = Termination::delta_l_positive;
            return seq;
        }
        current.lags.push_back(best_tau);
        seq.lags.push_back(best_tau);
        seq.scores.push_back(best_l);
        l_current = best_l;
    }
    seq.terminated_by = Termination::max_dims;
    return seq;
}

LagSequence mdop_select(const TimeSeries& ts, int tau_max, double fnn_threshold,
                        int max_dims, int theiler, int n_ref, std::uint64_t seed) {
    if (max_dims < 2) throw std::invalid_argument("max_dims must be >= 2");
    if (tau_max < 1) throw std::invalid_argument("tau_max must be >= 1");
    constexpr double kFnnRtol = 10.0;
    LagSequence seq;
    seq.method = "mdop";
    seq.params["tau_max"] = std::to_string(tau_max);
    seq.params["fnn_threshold"] = std::to_string(fnn_threshold);

    EmbeddingSpec current;
    for (int cycle = 1; current.dim() < max_dims; ++cycle) {
        const PointCloud cloud = delay_embed(ts, current);
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < cloud.n_pts(); ++i)
            if (cloud.time_index[i] >= tau_max) pool.push_back(i);
        if (pool.size() < 8) throw std::runtime_error("series too short for MDOP");

        PointCloud restricted;
        restricted.dim = cloud.dim;
        for (const std::size_t i : pool) {
            const double* row = cloud.row(i);
            restricted.data.insert(restricted.data.end(), row, row + cloud.dim);
            restricted.time_index.push_back(cloud.time_index[i]);
        }
        SoaCloud soa(restricted);
        Rng rng(seed_hash(seed, static_cast<std::uint64_t>(cycle)));
        const auto refs = sample_without_replacement(
            restricted.n_pts(), static_cast<std::size_t>(n_ref), rng);

        // Theiler-separated nearest-neighbor pairs in the current embedding.
        std::vector<double> scratch;
        std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
        std::vector<double> inv_dx;
        for (const std::size_t ref : refs) {
            const auto nn = soa.knn(ref, 1, theiler, scratch);
            if (nn.empty()) continue;
            const double dx2 = soa.dist2(ref, nn.front());
            if (dx2 <= 0.0) continue;  // zero-separation pair, skipped
            pairs.emplace_back(restricted.time_index[ref],
                               restricted.time_index[nn.front()]);
            inv_dx.push_back(1.0 / std::sqrt(dx2));
        }
        if (pairs.empty()) throw std::runtime_error("MDOP found no usable pairs");

        int best_tau = -1;
        double best_beta = -std::numeric_limits<double>::infinity();
        for (int tau = 1; tau <= tau_max; ++tau) {
            if (std::find(current.lags.begin(), current.lags.end(), tau) !=
                current.lags.end())
                continue;
            double log_acc = 0.0;
            std::size_t used = 0;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                const double df =
                    std::abs(ts.values[static_cast<std::size_t>(pairs[p].first - tau)] -
                             ts.values[static_cast<std::size_t>(pairs[p].second - tau)]);
                if (df <= 0.0) continue;  // exact tie, skipped
                log_acc += std::log(df * inv_dx[p]);
                ++used;
            }
            if (used == 0) continue;
            const double beta = std::exp(log_acc / static_cast<double>(used));
            if (beta > best_beta) {
                best_beta = beta;
                best_tau = tau;
            }
        }
        if (best_tau < 0) throw std::runtime_error("MDOP found no candidate lag");

        const double fnn =
            fnn_fraction_lags(ts, current.lags, best_tau, kFnnRtol, theiler);
        current.lags.push_back(best_tau);
        seq.lags.push_back(best_tau);
        seq.scores.push_back(best_beta);
        if (fnn < fnn_threshold) {
            seq.terminated_by = Termination::fnn_threshold;
            return seq;
        }
    }
    seq.terminated_by = Termination::max_dims;
    return seq;
}

namespace {

struct ArDesign {
    // y(t) = x(t) predicted from x(t - tau); rows t = tau_max .. N-1.
    std::size_t rows = 0;
    int tau_max = 0;
    const TimeSeries* ts = nullptr;

    double y(std::size_t r) const {
        return ts->values[r + static_cast<std::size_t>(tau_max)];
    }
    const double* column(int tau) const {
        return ts->values.data() + static_cast<std::size_t>(tau_max - tau);
    }
};

// Least-squares fit with intercept; returns mse and coefficients
// (intercept first, then one per lag in the given order).
double ar_fit(const ArDesign& d, const std::vector<int>& lags,
              std::vector<double>& coef, bool& ridge_used) {
    const std::size_t k = lags.size() + 1;
    std::vector<double> gram(k * k, 0.0);
    std::vector<double> rhs(k, 0.0);
    const std::size_t n = d.rows;
    gram[0] = static_cast<double>(n);
    std::vector<double> yvec(n);
    for (std::size_t r = 0; r < n; ++r) yvec[r] = d.y(r);
    rhs[0] = knl::sum(yvec.data(), n);
    for (std::size_t a = 0; a < lags.size(); ++a) {
        const double* col_a = d.column(lags[a]);
        gram[(a + 1) * k] = gram[a + 1] = knl::sum(col_a, n);
        rhs[a + 1] = knl::dot(col_a, yvec.data(), n);
        for (std::size_t b = a; b < lags.size(); ++b) {
            const double g = knl::dot(col_a, d.column(lags[b]), n);
            gram[(a + 1) * k + (b + 1)] = g;
            gram[(b + 1) * k + (a + 1)] = g;
        }
    }
    ridge_used = false;
    if (!cholesky_solve(gram, k, rhs, coef)) {
        double trace = 0.0;
        for (std::size_t i = 0; i < k; ++i) trace += gram[i * k + i];
        const double lambda = 1e-10 * trace;
        for (std::size_t i = 0; i < k; ++i) gram[i * k + i] += lambda;
        if (!cholesky_solve(gram, k, rhs, coef))
            throw std::runtime_error("AR normal equations unsolvable");
        ridge_used = true;
    }
    double sse = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double pred = coef[0];
        for (std::size_t a = 0; a < lags.size(); ++a)
            pred += coef[a + 1] * d.column(lags[a])[r];
        const double e = d.y(r) - pred;
        sse += e * e;
    }
    return sse / static_cast<double>(n);
}

double description_length(double mse, std::size_t n, std::size_t n_params) {
    const double floor_mse = std::max(mse, 1e-300);
    return static_cast<double>(n) * std::log2(floor_mse) +
           0.5 * static_cast<double>(n_params) * std::log2(static_cast<double>(n));
}

}  // namespace

double ar_description_length(const TimeSeries& ts, int tau_max,
                             const std::vector<int>& lags,
                             std::vector<double>* coefficients) {
    if (ts.size() <= 3 * static_cast<std::size_t>(tau_max))
        throw std::invalid_argument("series too short: need N > 3 tau_max");
    ArDesign d{ts.size() - static_cast<std::size_t>(tau_max), tau_max, &ts};
    std::vector<double> coef;
    bool ridge = false;
    const double mse = ar_fit(d, lags, coef, ridge);
    if (coefficients != nullptr) *coefficients = coef;
    return description_length(mse, d.rows, lags.size() + 1);
}

LagSequence reduced_ar_select(const TimeSeries& ts, int tau_max) {
    if (tau_max < 1) throw std::invalid_argument("tau_max must be >= 1");
    if (ts.size() <= 3 * static_cast<std::size_t>(tau_max))
        throw std::invalid_argument("series too short: need N > 3 tau_max");
    ArDesign d{ts.size() - static_cast<std::size_t>(tau_max), tau_max, &ts};

    LagSequence seq;
    seq.method = "reduced_ar";
    seq.params["tau_max"] = std::to_string(tau_max);
    std::vector<int> chosen;
    std::vector<double> coef;
    bool ridge_any = false;
    bool ridge = false;
    double dl_current;
    {
        const double mse = ar_fit(d, chosen, coef, ridge);
        dl_current = description_length(mse, d.rows, 1);
    }

    auto residual = [&](const std::vector<int>& lags, std::vector<double>& e) {
        std::vector<double> c;
        bool r = false;
        ar_fit(d, lags, c, r);
        ridge_any = ridge_any || r;
        e.resize(d.rows);
        for (std::size_t t = 0; t < d.rows; ++t) {
            double pred = c[0];
            for (std::size_t a = 0; a < lags.size(); ++a)
                pred += c[a + 1] * d.column(lags[a])[t];
            e[t] = d.y(t) - pred;
        }
    };

    std::vector<double> e;
    residual(chosen, e);
    while (chosen.size() < static_cast<std::size_t>(tau_max)) {
        // Most significant candidate against the current residual.
        int best_tau = -1;
        double best_mu = -1.0;
        for (int tau = 1; tau <= tau_max; ++tau) {
            if (std::find(chosen.begin(), chosen.end(), tau) != chosen.end()) continue;
            const double mu = std::abs(knl::dot(d.column(tau), e.data(), d.rows));
            if (mu > best_mu) {
                best_mu = mu;
                best_tau = tau;
            }
        }
        if (best_tau < 0) break;
        // Verification of the proposal: significance is measured by the
        // description length the candidate actually achieves; when another
        // candidate beats the largest-|mu| pick, it replaces it.
        {
            double best_cand_dl = 1e300;
            int best_cand = -1;
            std::vector<double> cand_coef;
            bool cand_ridge = false;
            for (int tau = 1; tau <= tau_max; ++tau) {
                if (std::find(chosen.begin(), chosen.end(), tau) != chosen.end()) continue;
                std::vector<int> cand = chosen;
                cand.push_back(tau);
                const double mse = ar_fit(d, cand, cand_coef, cand_ridge);
                const double dl = description_length(mse, d.rows, cand.size() + 1);
                if (dl < best_cand_dl) {
                    best_cand_dl = dl;
                    best_cand = tau;
                }
            }
            if (best_cand > 0) best_tau = best_cand;
        }
        std::vector<int> trial = chosen;
        trial.push_back(best_tau);
        std::vector<int> dropped;

        // Verification: the least significant member (by leave-one-out
        // residual correlation) must be the newcomer; otherwise the stale
        // member is dropped before re-evaluating.
        for (int guard = 0; trial.size() > 1 && guard < tau_max; ++guard) {
            int weakest = -1;
            double weakest_mu = std::numeric_limits<double>::infinity();
            for (const int member : trial) {
                std::vector<int> rest;
                for (const int t : trial)
                    if (t != member) rest.push_back(t);
                std::vector<double> e_rest;
                residual(rest, e_rest);
                const double mu =
                    std::abs(knl::dot(d.column(member), e_rest.data(), d.rows));
                if (mu < weakest_mu) {
                    weakest_mu = mu;
                    weakest = member;
                }
            }
            if (weakest == best_tau) break;
            trial.erase(std::remove(trial.begin(), trial.end(), weakest), trial.end());
            dropped.push_back(weakest);
        }

        const double mse = ar_fit(d, trial, coef, ridge);
        ridge_any = ridge_any || ridge;
        const double dl_trial = description_length(mse, d.rows, trial.size() + 1);
        if (!(dl_trial < dl_current)) break;
        for (const int gone : dropped) {
            for (std::size_t i = 0; i < seq.lags.size(); ++i) {
                if (seq.lags[i] == gone) {
                    seq.lags.erase(seq.lags.begin() + static_cast<std::ptrdiff_t>(i));
                    seq.scores.erase(seq.scores.begin() + static_cast<std::ptrdiff_t>(i));
                    break;
                }
            }
        }
        chosen = trial;
        dl_current = dl_trial;
        seq.lags.push_back(best_tau);
        seq.scores.push_back(dl_trial);
        residual(chosen, e);
    }
    seq.terminated_by = Termination::mdl_increase;
    if (ridge_any) seq.params["ridge"] = "1";
    {
        std::vector<double> final_coef;
        ar_description_length(ts, tau_max, chosen, &final_coef);
        std::string cs;
        for (std::size_t i = 0; i < final_coef.size(); ++i) {
            if (i) cs += ",";
            cs += std::to_string(final_coef[i]);
        }
        seq.params["coefficients"] = cs;
        seq.params["description_length"] = std::to_string(dl_current);
    }
    return seq;
}

}  // namespace delaykit
