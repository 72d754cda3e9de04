#pragma once

#include <cstdint>
#include <vector>

#include "delaykit/profiles.hpp"
#include "delaykit/series.hpp"

namespace delaykit {

/// Biased autocovariance normalized by lag zero; A(0) = 1 exactly.
LagProfile autocorrelation(const TimeSeries& ts, int tau_max);

/// Mutual information in bits from an equal-width 2D histogram over the
/// overlapping pairs (x(t), x(t+tau)). Zero-count cells contribute zero.
LagProfile mutual_information(const TimeSeries& ts, int tau_max, int bins = 16);

/// tau = round(1 / (4 w_c dt)) with w_c the dominant nonzero frequency of
/// the mean-removed, Hann-windowed power spectrum.
int quarter_period(const TimeSeries& ts);

/// Mean displacement between (x(t), x(t-tau)) and its image 3 lags later,
/// d(tau) = <|| (x(t),x(t-tau)) - (x(t+4tau),x(t+3tau)) ||>.
LagProfile recurrence_distance(const TimeSeries& ts, int tau_max);

/// Gao-Zheng separation-growth statistic Lambda(k, m, tau) over sampled
/// close, Theiler-separated point pairs. r <= 0 picks the 10th percentile
/// of sampled pairwise distances per cell.
GridProfile gao_zheng(const TimeSeries& ts, const std::vector<int>& ms,
                      int tau_max, int k, double r, int theiler, int n_ref,
                      std::uint64_t seed);

/// Characteristic-length statistic C(m, tau): mean time for sampled
/// nearest-neighbor pairs to separate beyond fraction * J(m, tau).
GridProfile characteristic_lengths(const TimeSeries& ts, const std::vector<int>& ms,
                                   int tau_max, double fraction, int theiler,
                                   int n_ref, std::uint64_t seed);

/// Schuster-Liebert wavering product W(m, tau); neighbor order distortion
/// between embeddings of order m-1, m, m+1.
GridProfile wavering_product(const TimeSeries& ts, const std::vector<int>& ms,
                             int tau_max, int n_neighbors, int n_ref, int theiler,
                             std::uint64_t seed);

/// Buzug-Pfister fill factor: log of the mean (m+1)-point parallelepiped
/// volume over the signal range^m, evaluated on tau in (0, T_c/2).
LagProfile fill_factor(const TimeSeries& ts, int m, int tau_max, int n_samples,
                       std::uint64_t seed);

struct NeighborhoodStats {
    int refs_used = 0;
    int refs_skipped = 0;  // zero-radius or out-of-range references
};

/// Casdagli noise amplification: conditional spread of scalar futures over
/// k-neighborhoods, normalized by the neighborhood radius.
double noise_amplification(const TimeSeries& ts, const EmbeddingSpec& spec,
                           const std::vector<int>& horizons, int k, int theiler,
                           int n_ref, std::uint64_t seed,
                           NeighborhoodStats* stats = nullptr);

/// Uzal L-statistic: log(sigma * alpha_k) with sigma^2 averaged over
/// horizons 1..t_max and alpha_k^2 = [sum eps_k^-2]^-1.
double l_statistic(const TimeSeries& ts, const EmbeddingSpec& spec, int t_max,
                   int k, int theiler, int n_ref, std::uint64_t seed,
                   NeighborhoodStats* stats = nullptr);

/// Kennel false-nearest-neighbor fraction for uniform embeddings of the
/// given dimensions at fixed tau.
LagProfile fnn_fraction(const TimeSeries& ts, int tau, const std::vector<int>& ms,
                        double rtol, int theiler);

/// FNN fraction of an arbitrary lag set when new_lag is appended;
/// used as the MDOP termination statistic.
double fnn_fraction_lags(const TimeSeries& ts, const std::vector<int>& lags,
                         int new_lag, double rtol, int theiler);

}  // namespace delaykit
