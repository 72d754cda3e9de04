#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "delaykit/persistence.hpp"
#include "delaykit/series.hpp"

namespace delaykit {

/// A contiguous window of length 4*tau, 2D-embedded with lag tau and
/// subsampled by k so the point count stays near the configured budget.
struct Strand {
    std::int64_t start = 0;  // first time index of the window
    int tau = 1;
    int subsample = 1;       // k = max(1, floor(4 tau / n_p))
    PointCloud points;       // coordinates (x(t), x(t - tau))

    int raw_len() const { return 4 * tau; }
};

struct StrandScore {
    double max_pers = 0.0;
    double alpha = 0.0;   // circularity: lambda2 / lambda1 of the boundary
    double gamma = 0.0;   // efficiency: hole area / convex hull area
    double s = 0.0;       // alpha * gamma
    bool valid = false;   // max_pers > rho* and n_boundary >= n_hole
    int n_boundary = 0;
};

struct SignificanceSpectrum {
    std::vector<int> taus;
    std::vector<double> p_mean;      // mean max persistence over valid strands
    std::vector<double> s_mean;
    std::vector<double> s_std;
    std::vector<double> alpha_mean;
    std::vector<double> gamma_mean;
    std::vector<int> n_valid;
    std::map<std::string, std::string> params;

    std::size_t size() const { return taus.size(); }
};

/// Strand start indices chosen by k-means++ D^2-weighted seeding over the
/// 2D embedded points, so strands spread across the reconstructed state
/// space. Returns every admissible start when fewer than n_strands exist.
std::vector<std::int64_t> sample_strand_starts(const TimeSeries& ts, int tau,
                                               int n_strands, std::uint64_t seed);

Strand build_strand(const TimeSeries& ts, std::int64_t start, int tau, int n_p);

/// Mean distance between temporally adjacent (subsampled) strand points;
/// the persistence floor for a significant hole.
double rho_star(const Strand& strand);

StrandScore score_strand(const Strand& strand, int n_hole);

SignificanceSpectrum significance_spectrum(const TimeSeries& ts,
                                           const std::vector<int>& taus,
                                           int n_strands, int n_p, int n_hole,
                                           std::uint64_t seed, int threads = 1);

/// Local maxima of s_mean with prominence at least
/// min_prominence * (max - min), descending by prominence, then truncated
/// to top_k. Gaps act as barriers.
std::vector<int> find_peaks(const SignificanceSpectrum& spec,
                            double min_prominence, int top_k);

}  // namespace delaykit
