#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "delaykit/lag_nonuniform.hpp"
#include "delaykit/lag_uniform.hpp"
#include "delaykit/profiles.hpp"
#include "delaykit/rng.hpp"
#include "delaykit/series.hpp"

using namespace delaykit;

namespace {

TimeSeries gaussian_noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    TimeSeries ts;
    ts.dt = 1.0;
    ts.values.resize(n);
    for (auto& v : ts.values) v = rng.gaussian();
    return ts;
}

// AR process driven by the deterministic noise stream.
TimeSeries ar_series(const std::vector<std::pair<int, double>>& terms, double noise_sd,
                     std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    TimeSeries ts;
    ts.dt = 1.0;
    ts.values.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double v = noise_sd * rng.gaussian();
        for (const auto& [lag, coef] : terms) {
            if (t >= static_cast<std::size_t>(lag))
                v += coef * ts.values[t - static_cast<std::size_t>(lag)];
        }
        ts.values[t] = v;
    }
    return ts;
}

}  // namespace

TEST_CASE("garcia almeida: rigid drift gives zero, constants stay defined") {
    // Linear ramp: every pair keeps its separation one step ahead.
    TimeSeries ramp;
    ramp.dt = 1.0;
    for (int k = 0; k < 600; ++k) ramp.values.push_back(0.01 * k);
    const auto profile = garcia_almeida(ramp, {}, 10, 0);
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.gap[i]) continue;
        CHECK(profile.values[i] == 0.0);
    }

    // Constant series: d2 == d1 == 0 for every pair, no false neighbors.
    TimeSeries constant{std::vector<double>(300, 1.0), 1.0, ""};
    const auto cp = garcia_almeida(constant, {}, 5, 0);
    for (std::size_t i = 0; i < cp.size(); ++i) {
        REQUIRE(!cp.gap[i]);
        CHECK(cp.values[i] == 0.0);
    }
}

TEST_CASE("garcia almeida false-neighbor onset tracks the mi minimum on lorenz") {
    // For finely sampled flows the one-step ratio stays near 1 until the
    // candidate lag decorrelates the added coordinate, so N(tau) sits on a
    // noise floor and then climbs; that onset is the dynamically relevant
    // feature and lines up with the MI minimum.
    const auto lorenz = normalize(generate_lorenz(0.0004, 10, 25000));
    const auto profile = garcia_almeida(lorenz, {}, 80, 41);
    double floor_level = 0.0;
    for (int tau = 1; tau <= 10; ++tau)
        floor_level = std::max(floor_level, profile.values[static_cast<std::size_t>(tau - 1)]);
    int onset = -1;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.values[i] > 5.0 * floor_level) {
            onset = profile.taus[i];
            break;
        }
    }
    REQUIRE(onset > 0);
    const auto mi = mutual_information(lorenz, 80, 16);
    const auto mi_min = first_minimum(mi);
    REQUIRE(mi_min.has_value());
    CHECK(std::abs(onset - *mi_min) <= static_cast<int>(std::ceil(0.2 * *mi_min)));

    const auto again = garcia_almeida(lorenz, {}, 80, 41);
    CHECK(again.values == profile.values);
}

TEST_CASE("binomial rejection counts") {
    CHECK(binomial_rejection_count(8, 0.05) == 7);  // tail 9/256 ~ 0.035
    CHECK(binomial_rejection_count(5, 0.05) == 5);  // only the full house rejects
    CHECK(binomial_rejection_count(13, 0.05) == 10);
    CHECK_THROWS(binomial_rejection_count(0, 0.05));
}

TEST_CASE("continuity statistic: an existing lag scores near the noise floor") {
    const auto lorenz = normalize(generate_lorenz(0.0004, 10, 10000));
    ContinuityParams params;
    params.theiler = 40;
    params.n_ref = 300;
    params.seed = 5;
    const auto profile = continuity_statistic(lorenz, {45}, 60, params);
    REQUIRE(profile.taus.size() == 60);
    // tau = 45 duplicates an embedding coordinate: deterministic dependence
    const double at_dup = profile.eps_star[44];
    CHECK(at_dup < 0.05);  // unit-variance series: 5% of the signal std
    double peak = 0.0;
    for (std::size_t i = 0; i < profile.eps_star.size(); ++i)
        peak = std::max(peak, profile.eps_star[i]);
    CHECK(at_dup < peak);
}

TEST_CASE("continuity statistic scales linearly under amplitude doubling") {
    const auto lorenz = normalize(generate_lorenz(0.0004, 10, 6000));
    TimeSeries doubled = lorenz;
    for (auto& v : doubled.values) v *= 2.0;
    ContinuityParams params;
    params.theiler = 40;
    params.n_ref = 200;
    params.seed = 9;
    const auto a = continuity_statistic(lorenz, {}, 50, params);
    const auto b = continuity_statistic(doubled, {}, 50, params);
    for (std::size_t i = 0; i < a.eps_star.size(); ++i) {
        if (a.gap[i]) continue;
        CHECK(b.eps_star[i] == 2.0 * a.eps_star[i]);
    }
    CHECK(local_maxima_indices(a.eps_star, true) == local_maxima_indices(b.eps_star, true));
}

TEST_CASE("pecuzal terminates immediately on iid noise") {
    const auto noise = gaussian_noise(6000, 31);
    LParams lp;
    lp.t_max = 20;
    lp.theiler = 5;
    lp.n_ref = 300;
    lp.seed = 3;
    ContinuityParams cp;
    cp.theiler = 5;
    cp.n_ref = 300;
    cp.seed = 3;
    const auto seq = pecuzal_select(noise, 40, 5, lp, cp);
    CHECK(seq.lags.empty());
    CHECK(seq.terminated_by == Termination::delta_l_positive);
}

TEST_CASE("pecuzal scores decrease strictly and lags stay in range") {
    const auto lorenz = normalize(generate_lorenz(0.0004, 10, 12000));
    LParams lp;
    lp.t_max = 40;
    lp.theiler = 40;
    lp.n_ref = 300;
    lp.seed = 11;
    ContinuityParams cp;
    cp.theiler = 40;
    cp.n_ref = 300;
    cp.seed = 11;
    const auto seq = pecuzal_select(lorenz, 60, 4, lp, cp);
    REQUIRE(!seq.lags.empty());
    std::set<int> unique(seq.lags.begin(), seq.lags.end());
    CHECK(unique.size() == seq.lags.size());
    for (const int lag : seq.lags) {
        CHECK(lag >= 1);
        CHECK(lag <= 60);
    }
    for (std::size_t i = 1; i < seq.scores.size(); ++i)
        CHECK(seq.scores[i] < seq.scores[i - 1]);
}

TEST_CASE("mdop selects positive finite scores and never duplicates lags") {
    const auto lorenz = normalize(generate_lorenz(0.0004, 10, 10000));
    const auto seq = mdop_select(lorenz, 50, 0.05, 4, 40, 400, 13);
    REQUIRE(!seq.lags.empty());
    std::set<int> unique(seq.lags.begin(), seq.lags.end());
    CHECK(unique.size() == seq.lags.size());
    for (const double s : seq.scores) {
        CHECK(s > 0.0);
        CHECK(std::isfinite(s));
    }
    for (const int lag : seq.lags) {
        CHECK(lag >= 1);
        CHECK(lag <= 50);
    }
    const auto again = mdop_select(lorenz, 50, 0.05, 4, 40, 400, 13);
    CHECK(again.lags == seq.lags);
}

TEST_CASE("reduced ar identifies an ar(1) process") {
    const auto ts = ar_series({{1, 0.9}}, 0.01, 4000, 21);
    const auto seq = reduced_ar_select(ts, 8);
    REQUIRE(seq.lags == std::vector<int>{1});
    // coefficients in params: intercept first, then one per lag
    const std::string coefs = seq.params.at("coefficients");
    const auto comma = coefs.find(',');
    const double a1 = std::stod(coefs.substr(comma + 1));
    CHECK(a1 == doctest::Approx(0.9).epsilon(0.012));
}

TEST_CASE("greedy reduced ar matches exhaustive mdl search on ar(2)") {
    const auto ts = ar_series({{1, 0.5}, {5, 0.3}}, 0.05, 2000, 77);
    const int tau_max = 8;
    const auto seq = reduced_ar_select(ts, tau_max);

    // Exhaustive oracle over every lag subset of size <= 3.
    std::vector<int> best_subset;
    double best_dl = ar_description_length(ts, tau_max, {});
    std::vector<std::vector<int>> subsets;
    for (int a = 1; a <= tau_max; ++a) {
        subsets.push_back({a});
        for (int b = a + 1; b <= tau_max; ++b) {
            subsets.push_back({a, b});
            for (int c = b + 1; c <= tau_max; ++c) subsets.push_back({a, b, c});
        }
    }
    for (const auto& subset : subsets) {
        const double dl = ar_description_length(ts, tau_max, subset);
        if (dl < best_dl) {
            best_dl = dl;
            best_subset = subset;
        }
    }
    std::vector<int> got = seq.lags;
    std::sort(got.begin(), got.end());
    CHECK(got == best_subset);
    CHECK(ar_description_length(ts, tau_max, seq.lags) ==
          doctest::Approx(best_dl).epsilon(1e-12));
}

TEST_CASE("reduced ar selects nothing from iid noise") {
    const auto noise = gaussian_noise(4000, 41);
    const auto seq = reduced_ar_select(noise, 8);
    CHECK(seq.lags.empty());
    CHECK(seq.terminated_by == Termination::mdl_increase);
}

TEST_CASE("reduced ar description length decreases across additions") {
    const auto ts = ar_series({{1, 0.4}, {3, 0.35}}, 0.1, 3000, 55);
    const auto seq = reduced_ar_select(ts, 8);
    for (std::size_t i = 1; i < seq.scores.size(); ++i)
        CHECK(seq.scores[i] < seq.scores[i - 1]);
}
