#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "delaykit/profiles.hpp"
#include "delaykit/series.hpp"

namespace delaykit {

enum class Termination {
    delta_l_positive,
    fnn_threshold,
    max_dims,
    mdl_increase,
};

const char* to_string(Termination t);

/// Lags in selection order with the per-cycle objective value that chose
/// each one.
struct LagSequence {
    std::vector<int> lags;
    std::vector<double> scores;
    Termination terminated_by = Termination::max_dims;
    std::string method;
    std::map<std::string, std::string> params;
};

/// Garcia-Almeida N-statistic: fraction of points whose one-step distance
/// ratio d2/d1 exceeds 10, in the space spanned by the existing lags plus
/// the candidate. The candidate lag is the first minimum of the profile.
LagProfile garcia_almeida(const TimeSeries& ts, const std::vector<int>& existing,
                          int tau_max, int theiler);

struct ContinuityParams {
    // A single large neighborhood: pooling quantiles of different orders
    // across sizes inflates eps* toward extreme statistics (for sizes
    // below 8 the alpha = 0.05 rejection needs every neighbor inside eps),
    // which drags profile peaks sideways. Size 13 rejects at 10 successes.
    std::vector<int> delta_points = {13};
    double alpha = 0.05;
    int n_ref = 500;
    int theiler = 0;
    std::uint64_t seed = 1;
};

struct ContinuityProfile {
    std::vector<int> taus;
    std::vector<double> eps_star;  // NaN where gap
    std::vector<int> n_used;
    std::vector<std::uint8_t> gap;
    std::vector<int> delta_points;
    double alpha = 0.05;
};

/// Pecora continuity statistic <eps*>(tau) against an existing lag set.
/// For each reference and neighborhood size, eps shrinks through the
/// sorted lagged distances until the one-sided binomial test (p* = 0.5)
/// fails to reject; eps* is the smallest rejecting eps, maximized over
/// neighborhood sizes and averaged over references.
ContinuityProfile continuity_statistic(const TimeSeries& ts,
                                       const std::vector<int>& existing,
                                       int tau_max, const ContinuityParams& params);

/// Fewest successes out of delta trials rejecting p = 0.5 at level alpha.
int binomial_rejection_count(int delta, double alpha);

struct LParams {
    int t_max = 40;
    int k = 3;
    int theiler = 0;
    int n_ref = 500;
    std::uint64_t seed = 1;
    // Sampling noise floor of the L estimate: candidates must beat the
    // current L by at least this much to count as a decrease.
    double min_decrease = 0.05;
};

/// PECUZAL-style driver: candidates are the local maxima of the
/// continuity profile, the accepted lag is the candidate with the most
/// negative change of the L-statistic, termination when no candidate
/// decreases L.
LagSequence pecuzal_select(const TimeSeries& ts, int tau_max, int max_dims,
                           const LParams& l_params,
                           const ContinuityParams& continuity_params);

/// MDOP: each cycle appends the lag maximizing the geometric mean of
/// |dF/dx| over sampled neighbor pairs; stops at max_dims or when the FNN
/// fraction of the grown embedding drops below fnn_threshold.
LagSequence mdop_select(const TimeSeries& ts, int tau_max, double fnn_threshold,
                        int max_dims, int theiler, int n_ref, std::uint64_t seed);

/// Judd-Mees reduced autoregressive lag selection by minimum description
/// length, greedy with a most-significant-residual update step.
LagSequence reduced_ar_select(const TimeSeries& ts, int tau_max);

/// Description length in bits of the AR model on the given lags
/// (intercept always included): N log2(mse) + 0.5 (k+1) log2(N).
double ar_description_length(const TimeSeries& ts, int tau_max,
                             const std::vector<int>& lags,
                             std::vector<double>* coefficients = nullptr);

}  // namespace delaykit
