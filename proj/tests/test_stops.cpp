#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "delaykit/rng.hpp"
#include "delaykit/series.hpp"
#include "delaykit/stops.hpp"

using namespace delaykit;

namespace {

constexpr double kPi = 3.14159265358979323846;

Strand strand_from_points(const std::vector<std::pair<double, double>>& pts, int tau) {
    Strand s;
    s.tau = tau;
    s.subsample = 1;
    s.points.dim = 2;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        s.points.data.push_back(pts[i].first);
        s.points.data.push_back(pts[i].second);
        s.points.time_index.push_back(static_cast<std::int64_t>(i));
    }
    return s;
}

std::vector<std::pair<double, double>> circle_points(int n, double r) {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * kPi * k / n;
        pts.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return pts;
}

}  // namespace

TEST_CASE("sample_strand_starts: exhaustion, determinism, admissible window") {
    const auto ts = generate_sines({1.0}, {0.0}, {1.0}, 0.01, 200);
    const int tau = 10;
    // admissible starts: tau <= t < N - 4 tau
    const auto all = sample_strand_starts(ts, tau, 10000, 1);
    CHECK(all.size() == 200 - 5 * tau);
    std::set<std::int64_t> unique(all.begin(), all.end());
    CHECK(unique.size() == all.size());
    CHECK(*unique.begin() == tau);
    CHECK(*unique.rbegin() == 200 - 4 * tau - 1);

    const auto a = sample_strand_starts(ts, tau, 20, 99);
    const auto b = sample_strand_starts(ts, tau, 20, 99);
    CHECK(a == b);
    std::set<std::int64_t> ua(a.begin(), a.end());
    CHECK(ua.size() == a.size());
}

TEST_CASE("d2 seeding splits two clusters almost surely") {
    // Two widely separated oscillation levels produce two clusters in the
    // embedded plane; D^2 weighting should pick one start per cluster.
    TimeSeries ts;
    ts.dt = 1.0;
    const int n = 1200;
    for (int k = 0; k < n; ++k) {
        const double level = k < n / 2 ? -10.0 : 10.0;
        ts.values.push_back(level + 0.1 * std::sin(0.7 * k));
    }
    const int tau = 5;
    int split = 0;
    const int trials = 10000;
    for (int seed = 0; seed < trials; ++seed) {
        const auto starts = sample_strand_starts(ts, tau, 2, static_cast<std::uint64_t>(seed));
        REQUIRE(starts.size() == 2);
        const bool first_low = starts[0] < n / 2;
        const bool second_low = starts[1] < n / 2;
        if (first_low != second_low) ++split;
    }
    CHECK(static_cast<double>(split) / trials >= 0.99);
}

TEST_CASE("build_strand subsample rule") {
    const auto ts = generate_sines({1.0}, {0.0}, {1.0}, 0.001, 25000);
    const auto s1 = build_strand(ts, 300, 250, 250);
    CHECK(s1.subsample == 4);
    CHECK(s1.points.n_pts() == 250);

    const auto s2 = build_strand(ts, 20, 10, 250);
    CHECK(s2.subsample == 1);
    CHECK(s2.points.n_pts() == 40);

    const auto s3 = build_strand(ts, 100, 62, 250);
    CHECK(s3.subsample == 1);
    CHECK(s3.points.n_pts() == 248);

    CHECK_THROWS(build_strand(ts, 24900, 100, 250));  // window crosses the end
    CHECK_THROWS(build_strand(ts, 50, 100, 250));     // lag before series start

    // points are (x(t), x(t - tau)) on the subsampled window
    CHECK(s2.points.row(0)[0] == ts.values[20]);
    CHECK(s2.points.row(0)[1] == ts.values[10]);
    CHECK(s2.points.time_index[1] == 21);
}

TEST_CASE("rho_star oracle values") {
    std::vector<std::pair<double, double>> line;
    for (int k = 0; k < 10; ++k) line.push_back({static_cast<double>(k), 0.0});
    CHECK(rho_star(strand_from_points(line, 1)) == doctest::Approx(1.0));

    std::vector<std::pair<double, double>> dup = {{0, 0}, {0, 0}, {3, 0}};
    CHECK(rho_star(strand_from_points(dup, 1)) == doctest::Approx(1.5));

    const int n = 32;
    const double r = 2.0;
    CHECK(rho_star(strand_from_points(circle_points(n, r), 1)) ==
          doctest::Approx(2.0 * r * std::sin(kPi / n)).epsilon(1e-12));
}

TEST_CASE("score_strand on a clean circle") {
    const auto strand = strand_from_points(circle_points(32, 1.0), 8);
    const auto score = score_strand(strand, 8);
    CHECK(score.valid);
    CHECK(score.alpha >= 0.95);
    CHECK(score.gamma >= 0.9);
    CHECK(score.s == doctest::Approx(score.alpha * score.gamma));
    CHECK(score.n_boundary >= 8);
}

TEST_CASE("score_strand on an ellipse approaches the axis ratio") {
    std::vector<std::pair<double, double>> pts;
    const int n = 64;
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * kPi * k / n;
        pts.push_back({2.0 * std::cos(a), 1.0 * std::sin(a)});
    }
    const auto score = score_strand(strand_from_points(pts, 8), 8);
    CHECK(score.valid);
    // covariance diag(a^2/2, b^2/2): ratio -> (b/a)^2 = 0.25
    CHECK(score.alpha == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("a straight tail deflates efficiency") {
    auto pts = circle_points(24, 1.0);
    for (int k = 1; k <= 24; ++k) pts.push_back({1.0 + 0.12 * k, 0.0});
    const auto score = score_strand(strand_from_points(pts, 8), 8);
    CHECK(score.valid);
    CHECK(score.gamma < 0.6);
}

TEST_CASE("degenerate strands are invalid, never crash") {
    std::vector<std::pair<double, double>> line;
    for (int k = 0; k < 20; ++k) line.push_back({static_cast<double>(k), 0.0});
    const auto score = score_strand(strand_from_points(line, 4), 8);
    CHECK(!score.valid);
    CHECK(score.s == 0.0);

    std::vector<std::pair<double, double>> tiny = {{0, 0}, {1, 0}};
    CHECK(!score_strand(strand_from_points(tiny, 1), 8).valid);
}

TEST_CASE("spectrum of a pure sine peaks at a quarter period") {
    const int period = 80;
    TimeSeries ts;
    ts.dt = 1.0;
    for (int k = 0; k < 6000; ++k)
        ts.values.push_back(std::sin(2.0 * kPi * k / period));
    std::vector<int> taus;
    for (int t = 10; t <= 30; ++t) taus.push_back(t);
    const auto spec = significance_spectrum(ts, taus, 60, 250, 8, 7, 1);

    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec.n_valid[i] == 0) continue;
        CHECK(spec.s_mean[i] >= 0.0);
        CHECK(spec.s_mean[i] <= 1.0);
    }
    const auto peaks = find_peaks(spec, 0.1, 1);
    REQUIRE(!peaks.empty());
    CHECK(std::abs(peaks[0] - period / 4) <= std::max(1.0, 0.04 * period / 4.0));
}

TEST_CASE("spectrum is bit-identical across thread counts and reruns") {
    const int period = 60;
    TimeSeries ts;
    ts.dt = 1.0;
    for (int k = 0; k < 3000; ++k)
        ts.values.push_back(std::sin(2.0 * kPi * k / period) + 0.2 * std::sin(4.4 * kPi * k / period));
    std::vector<int> taus;
    for (int t = 8; t <= 24; t += 2) taus.push_back(t);
    const auto s1 = significance_spectrum(ts, taus, 40, 250, 8, 5, 1);
    const auto s2 = significance_spectrum(ts, taus, 40, 250, 8, 5, 2);
    const auto s3 = significance_spectrum(ts, taus, 40, 250, 8, 5, 1);
    CHECK(s1.s_mean == s2.s_mean);
    CHECK(s1.p_mean == s2.p_mean);
    CHECK(s1.n_valid == s2.n_valid);
    CHECK(s1.s_mean == s3.s_mean);
}

TEST_CASE("power-of-two amplitude scaling leaves the spectrum bit-identical") {
    const int period = 80;
    TimeSeries ts;
    ts.dt = 1.0;
    for (int k = 0; k < 4000; ++k)
        ts.values.push_back(std::sin(2.0 * kPi * k / period));
    TimeSeries scaled = ts;
    for (auto& v : scaled.values) v *= 4.0;

    std::vector<int> taus;
    for (int t = 14; t <= 26; ++t) taus.push_back(t);
    const auto a = significance_spectrum(ts, taus, 40, 250, 8, 3, 1);
    const auto b = significance_spectrum(scaled, taus, 40, 250, 8, 3, 1);
    CHECK(a.s_mean == b.s_mean);
    CHECK(a.alpha_mean == b.alpha_mean);
    CHECK(a.gamma_mean == b.gamma_mean);
    CHECK(a.n_valid == b.n_valid);
    // persistence means scale exactly with the amplitude
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.n_valid[i] == 0) continue;
        CHECK(b.p_mean[i] == 4.0 * a.p_mean[i]);
    }
}

TEST_CASE("general affine transform leaves the peak set unchanged") {
    const int period = 80;
    TimeSeries ts;
    ts.dt = 1.0;
    for (int k = 0; k < 4000; ++k)
        ts.values.push_back(std::sin(2.0 * kPi * k / period));
    TimeSeries mapped = ts;
    for (auto& v : mapped.values) v = 2.0 * v + 3.0;

    std::vector<int> taus;
    for (int t = 12; t <= 28; ++t) taus.push_back(t);
    const auto a = significance_spectrum(ts, taus, 40, 250, 8, 3, 1);
    const auto b = significance_spectrum(mapped, taus, 40, 250, 8, 3, 1);
    CHECK(find_peaks(a, 0.1, 3) == find_peaks(b, 0.1, 3));
}

TEST_CASE("more strands only tightens the mean") {
    const int period = 80;
    TimeSeries ts;
    ts.dt = 1.0;
    for (int k = 0; k < 8000; ++k)
        ts.values.push_back(std::sin(2.0 * kPi * k / period));
    std::vector<int> taus;
    for (int t = 16; t <= 24; ++t) taus.push_back(t);
    const auto small = significance_spectrum(ts, taus, 60, 250, 8, 7, 1);
    const auto big = significance_spectrum(ts, taus, 150, 250, 8, 7, 1);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (small.n_valid[i] < 30 || big.n_valid[i] < 30) continue;
        const double bound =
            3.0 * big.s_std[i] / std::sqrt(static_cast<double>(big.n_valid[i]));
        CHECK(std::abs(small.s_mean[i] - big.s_mean[i]) <= bound + 1e-12);
    }
}

TEST_CASE("find_peaks basics") {
    SignificanceSpectrum spec;
    auto fill = [&](const std::vector<double>& v) {
        spec.taus.clear();
        spec.s_mean = v;
        spec.n_valid.assign(v.size(), 10);
        for (std::size_t i = 0; i < v.size(); ++i) spec.taus.push_back(static_cast<int>(i + 1));
    };
    fill({1, 2, 3, 4, 5});
    CHECK(find_peaks(spec, 0.0, 5).empty());

    fill({0, 1, 2, 3, 2, 1, 0});
    const auto apex = find_peaks(spec, 0.1, 3);
    REQUIRE(apex.size() == 1);
    CHECK(apex[0] == 4);

    // gaps are barriers: the value right after the gap has no finite left
    // neighbor and cannot be a peak, however large
    fill({0, 3, 0, std::numeric_limits<double>::quiet_NaN(), 5, 1, 0.5});
    spec.n_valid[3] = 0;
    const auto peaks = find_peaks(spec, 0.05, 5);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == 2);
    // an interior peak inside the post-gap segment is found normally
    fill({0, 3, 0, std::numeric_limits<double>::quiet_NaN(), 1, 5, 0.5});
    spec.n_valid[3] = 0;
    const auto peaks2 = find_peaks(spec, 0.05, 5);
    REQUIRE(peaks2.size() == 2);
    CHECK(peaks2[0] == 6);
    CHECK(peaks2[1] == 2);

    // top_k truncation keeps the most prominent
    fill({0, 10, 0, 4, 0, 2, 0});
    const auto top2 = find_peaks(spec, 0.0, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0] == 2);
    CHECK(top2[1] == 4);
}
