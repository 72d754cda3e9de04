#include "delaykit/stops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "delaykit/geometry.hpp"
#include "delaykit/kernels.hpp"
#include "delaykit/linalg.hpp"
#include "delaykit/rng.hpp"
#include "delaykit/threadpool.hpp"

namespace delaykit {

std::vector<std::int64_t> sample_strand_starts(const TimeSeries& ts, int tau,
                                               int n_strands, std::uint64_t seed) {
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    if (n_strands < 1) throw std::invalid_argument("n_strands must be >= 1");
    const std::int64_t n = static_cast<std::int64_t>(ts.size());
    const std::int64_t lo = tau;            // x(t - tau) must exist
    const std::int64_t hi = n - 4 * static_cast<std::int64_t>(tau);  // start + 4 tau < N
    if (hi <= lo) throw std::invalid_argument("series too short for strands of this tau");
    const std::size_t m = static_cast<std::size_t>(hi - lo);

    // Embedded candidate (x(t), x(t - tau)) per admissible start t.
    std::vector<double> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t t = static_cast<std::size_t>(lo) + i;
        xs[i] = ts.values[t];
        ys[i] = ts.values[t - static_cast<std::size_t>(tau)];
    }

    const std::size_t want = static_cast<std::size_t>(n_strands);
    std::vector<std::int64_t> starts;
    if (want >= m) {
        starts.resize(m);
        for (std::size_t i = 0; i < m; ++i) starts[i] = lo + static_cast<std::int64_t>(i);
        return starts;
    }

    Rng rng(seed_hash(seed, 0x6b6d7070, static_cast<std::uint64_t>(tau)));
    std::vector<double> weight(m, std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> chosen(m, 0);
    std::vector<double> scratch(m);

    std::size_t first = static_cast<std::size_t>(rng.uniform_int(m));
    chosen[first] = 1;
    starts.push_back(lo + static_cast<std::int64_t>(first));
    knl::dist2_2d(xs.data(), ys.data(), xs[first], ys[first], m, weight.data());

    while (starts.size() < want) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (!chosen[i]) total += weight[i];
        std::size_t pick = m;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (chosen[i]) continue;
                acc += weight[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == m) {  // numeric edge: take the last positive weight
                for (std::size_t i = m; i-- > 0;) {
                    if (!chosen[i] && weight[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        }
        if (pick == m) {
            // All remaining candidates coincide with chosen points; fall back
            // to a uniform draw over the unchosen ones.
            std::size_t remaining = 0;
            for (std::size_t i = 0; i < m; ++i)
                if (!chosen[i]) ++remaining;
            std::size_t skip = static_cast<std::size_t>(rng.uniform_int(remaining));
            for (std::size_t i = 0; i < m; ++i) {
                if (chosen[i]) continue;
                if (skip == 0) {
                    pick = i;
                    break;
                }
                --skip;
            }
        }
        chosen[pick] = 1;
        starts.push_back(lo + static_cast<std::int64_t>(pick));
        knl::dist2_2d(xs.data(), ys.data(), xs[pick], ys[pick], m, scratch.data());
        for (std::size_t i = 0; i < m; ++i) weight[i] = std::min(weight[i], scratch[i]);
    }
    return starts;
}

Strand build_strand(const TimeSeries& ts, std::int64_t start, int tau, int n_p) {
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    if (n_p < 2) throw std::invalid_argument("n_p must be >= 2");
    const std::int64_t n = static_cast<std::int64_t>(ts.size());
    if (start < tau || start + 4 * static_cast<std::int64_t>(tau) >= n)
        throw std::invalid_argument("strand window out of range");
    Strand strand;
    strand.start = start;
    strand.tau = tau;
    strand.subsample = std::max(1, (4 * tau) / n_p);
    strand.points.dim = 2;
    for (std::int64_t t = start; t < start + 4 * static_cast<std::int64_t>(tau);
         t += strand.subsample) {
        strand.points.data.push_back(ts.values[static_cast<std::size_t>(t)]);
        strand.points.data.push_back(
            ts.values[static_cast<std::size_t>(t - tau)]);
        strand.points.time_index.push_back(t);
    }
    return strand;
}

double rho_star(const Strand& strand) {
    const std::size_t n = strand.points.n_pts();
    if (n < 2) throw std::invalid_argument("strand needs at least 2 points");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        acc += point_dist(strand.points, i, i + 1);
    return acc / static_cast<double>(n - 1);
}

StrandScore score_strand(const Strand& strand, int n_hole) {
    if (n_hole < 3) throw std::invalid_argument("n_hole must be >= 3");
    StrandScore score;
    if (strand.points.n_pts() < 3) return score;

    const Filtration filt = build_rips(strand.points);
    const PersistenceDiagram diagram = compute_persistence(filt);
    const auto [pers, feature] = max_persistence(diagram, 1);
    if (!feature.has_value()) return score;

    score.max_pers = pers;
    score.n_boundary = static_cast<int>(feature->representative.size());
    const double rho = rho_star(strand);
    if (!(pers > rho) || score.n_boundary < n_hole) return score;

    // Circularity: eigenvalue ratio of the boundary-point covariance.
    const auto& loop = feature->representative;
    double mx = 0.0, my = 0.0;
    for (const int v : loop) {
        mx += strand.points.row(static_cast<std::size_t>(v))[0];
        my += strand.points.row(static_cast<std::size_t>(v))[1];
    }
    mx /= static_cast<double>(loop.size());
    my /= static_cast<double>(loop.size());
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (const int v : loop) {
        const double dx = strand.points.row(static_cast<std::size_t>(v))[0] - mx;
        const double dy = strand.points.row(static_cast<std::size_t>(v))[1] - my;
        cxx += dx * dx;
        cxy += dx * dy;
        cyy += dy * dy;
    }
    double l1 = 0.0, l2 = 0.0;
    eigen2x2(cxx, cxy, cyy, l1, l2);
    if (!(l1 > 0.0)) return score;
    const double alpha = std::max(0.0, l2) / l1;

    // Efficiency: hole area over the hull area of all strand points.
    std::vector<Point2> ring(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
        ring[i] = {strand.points.row(static_cast<std::size_t>(loop[i]))[0],
                   strand.points.row(static_cast<std::size_t>(loop[i]))[1]};
    }
    std::vector<Point2> all(strand.points.n_pts());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = {strand.points.row(i)[0], strand.points.row(i)[1]};
    const double hull_area = convex_hull_area(all);
    if (!(hull_area > 0.0)) return score;  // degenerate hull: invalid
    const double gamma = std::min(1.0, polygon_area(ring) / hull_area);

    score.alpha = alpha;
    score.gamma = gamma;
    score.s = alpha * gamma;
    score.valid = true;
    return score;
}

SignificanceSpectrum significance_spectrum(const TimeSeries& ts,
                                           const std::vector<int>& taus,
                                           int n_strands, int n_p, int n_hole,
                                           std::uint64_t seed, int threads) {
    if (!std::is_sorted(taus.begin(), taus.end()) ||
        std::adjacent_find(taus.begin(), taus.end()) != taus.end())
        throw std::invalid_argument("taus must be strictly ascending");
    for (const int tau : taus) {
        if (tau < 1 || 4 * static_cast<std::size_t>(tau) + 1 >= ts.size())
            throw std::invalid_argument("tau out of range for this series");
    }
    SignificanceSpectrum spec;
    spec.taus = taus;
    const std::size_t nt = taus.size();
    spec.p_mean.assign(nt, 0.0);
    spec.s_mean.assign(nt, 0.0);
    spec.s_std.assign(nt, 0.0);
    spec.alpha_mean.assign(nt, 0.0);
    spec.gamma_mean.assign(nt, 0.0);
    spec.n_valid.assign(nt, 0);
    spec.params["n_strands"] = std::to_string(n_strands);
    spec.params["n_p"] = std::to_string(n_p);
    spec.params["n_hole"] = std::to_string(n_hole);
    spec.params["seed"] = std::to_string(seed);

    parallel_for(threads, nt, [&](std::size_t ti) {
        const int tau = taus[ti];
        const auto starts = sample_strand_starts(
            ts, tau, n_strands, seed_hash(seed, static_cast<std::uint64_t>(tau)));
        double p_acc = 0.0, s_acc = 0.0, s2_acc = 0.0, a_acc = 0.0, g_acc = 0.0;
        int valid = 0;
        for (const std::int64_t start : starts) {
            const Strand strand = build_strand(ts, start, tau, n_p);
            const StrandScore score = score_strand(strand, n_hole);
            if (!score.valid) continue;
            ++valid;
            p_acc += score.max_pers;
            s_acc += score.s;
            s2_acc += score.s * score.s;
            a_acc += score.alpha;
            g_acc += score.gamma;
        }
        if (valid == 0) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            spec.p_mean[ti] = nan;
            spec.s_mean[ti] = nan;
            spec.s_std[ti] = nan;
            spec.alpha_mean[ti] = nan;
            spec.gamma_mean[ti] = nan;
            return;
        }
        const double nv = static_cast<double>(valid);
        spec.p_mean[ti] = p_acc / nv;
        spec.s_mean[ti] = s_acc / nv;
        const double var = std::max(0.0, s2_acc / nv - (s_acc / nv) * (s_acc / nv));
        spec.s_std[ti] = std::sqrt(var);
        spec.alpha_mean[ti] = a_acc / nv;
        spec.gamma_mean[ti] = g_acc / nv;
        spec.n_valid[ti] = valid;
    });
    return spec;
}

namespace {

struct Peak {
    std::size_t index;
    double prominence;
};

}  // namespace

std::vector<int> find_peaks(const SignificanceSpectrum& spec,
                            double min_prominence, int top_k) {
    if (min_prominence < 0.0) throw std::invalid_argument("min_prominence must be >= 0");
    const auto& v = spec.s_mean;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const double x : v) {
        if (!std::isfinite(x)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (!(hi > lo)) return {};
    const double threshold = min_prominence * (hi - lo);

    std::vector<Peak> peaks;
    const std::size_t n = v.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!std::isfinite(v[i]) || !std::isfinite(v[i - 1])) continue;
        if (!(v[i - 1] < v[i])) continue;
        std::size_t j = i + 1;
        while (j < n && std::isfinite(v[j]) && v[j] == v[i]) ++j;
        if (j >= n || !std::isfinite(v[j]) || !(v[j] < v[i])) continue;

        // Prominence: descend on each side to the lowest point before a
        // strictly higher value (or a gap / the grid edge).
        double base = -std::numeric_limits<double>::infinity();
        for (int dir = 0; dir < 2; ++dir) {
            double side_min = v[i];
            bool found_higher = false;
            if (dir == 0) {
                for (std::size_t k = i; k-- > 0;) {
                    if (!std::isfinite(v[k])) break;
                    if (v[k] > v[i]) {
                        found_higher = true;
                        break;
                    }
                    side_min = std::min(side_min, v[k]);
                }
            } else {
                for (std::size_t k = j; k < n; ++k) {
                    if (!std::isfinite(v[k])) break;
                    if (v[k] > v[i]) {
                        found_higher = true;
                        break;
                    }
                    side_min = std::min(side_min, v[k]);
                }
            }
            (void)found_higher;
            base = std::max(base, side_min);
        }
        const double prom = v[i] - base;
        if (prom >= threshold) peaks.push_back({i, prom});
    }
    std::sort(peaks.begin(), peaks.end(), [&](const Peak& a, const Peak& b) {
        if (a.prominence != b.prominence) return a.prominence > b.prominence;
        return spec.taus[a.index] < spec.taus[b.index];
    });
    if (top_k >= 0 && peaks.size() > static_cast<std::size_t>(top_k))
        peaks.resize(static_cast<std::size_t>(top_k));
    std::vector<int> out;
    out.reserve(peaks.size());
    for (const Peak& p : peaks) out.push_back(spec.taus[p.index]);
    return out;
}

}  // namespace delaykit
