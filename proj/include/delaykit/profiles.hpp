#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace delaykit {

/// A statistic evaluated over a tau grid. Cells that could not be
/// evaluated hold NaN with gap[i] set; they are never silently dropped
/// and extremum scans treat them as barriers.
struct LagProfile {
    std::vector<int> taus;          // strictly increasing
    std::vector<double> values;     // NaN where gap
    std::vector<int> n_used;        // samples or pairs behind each cell
    std::vector<std::uint8_t> gap;
    std::string method;
    std::map<std::string, std::string> params;

    void push(int tau, double value, int used);
    void push_gap(int tau);
    std::size_t size() const { return taus.size(); }
};

/// A statistic over an (m, tau) grid, row-major by m.
struct GridProfile {
    std::vector<int> ms;
    std::vector<int> taus;
    std::vector<double> values;
    std::vector<int> n_used;
    std::vector<std::uint8_t> gap;
    std::string method;
    std::map<std::string, std::string> params;

    std::size_t index(std::size_t mi, std::size_t ti) const {
        return mi * taus.size() + ti;
    }
    double at(std::size_t mi, std::size_t ti) const { return values[index(mi, ti)]; }
    LagProfile row(std::size_t mi) const;
};

/// Smallest tau at an interior local minimum (plateaus resolve to their
/// first index; gaps act as barriers). Empty when no interior minimum
/// exists; never returns a boundary tau.
std::optional<int> first_minimum(const LagProfile& profile);

/// All interior local minima, in ascending tau order (same plateau and
/// gap rules as first_minimum).
std::vector<int> local_minima(const LagProfile& profile);

/// Interior local maxima of a value sequence after optional 3-point
/// moving-average smoothing; returns indices into the sequence.
std::vector<std::size_t> local_maxima_indices(const std::vector<double>& values,
                                              bool smooth3);

}  // namespace delaykit
