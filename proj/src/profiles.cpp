#include "delaykit/profiles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace delaykit {

void LagProfile::push(int tau, double value, int used) {
    if (!taus.empty() && tau <= taus.back())
        throw std::invalid_argument("profile taus must be strictly increasing");
    if (!std::isfinite(value)) {
        push_gap(tau);
        return;
    }
    taus.push_back(tau);
    values.push_back(value);
    n_used.push_back(used);
    gap.push_back(0);
}

void LagProfile::push_gap(int tau) {
    if (!taus.empty() && tau <= taus.back())
        throw std::invalid_argument("profile taus must be strictly increasing");
    taus.push_back(tau);
    values.push_back(std::numeric_limits<double>::quiet_NaN());
    n_used.push_back(0);
    gap.push_back(1);
}

LagProfile GridProfile::row(std::size_t mi) const {
    LagProfile p;
    p.method = method;
    p.params = params;
    p.params["m"] = std::to_string(ms[mi]);
    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
        if (gap[index(mi, ti)])
            p.push_gap(taus[ti]);
        else
            p.push(taus[ti], at(mi, ti), n_used[index(mi, ti)]);
    }
    return p;
}

namespace {

// Scans for interior minima of v. A minimum is v[i-1] > v[i] followed, after
// any run of equal values, by a strictly greater value; all cells involved
// must be finite.
std::vector<std::size_t> minima_indices(const std::vector<double>& v) {
    std::vector<std::size_t> out;
    const std::size_t n = v.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!std::isfinite(v[i]) || !std::isfinite(v[i - 1])) continue;
        if (!(v[i - 1] > v[i])) continue;
        std::size_t j = i + 1;
        while (j < n && std::isfinite(v[j]) && v[j] == v[i]) ++j;
        if (j < n && std::isfinite(v[j]) && v[j] > v[i]) out.push_back(i);
    }
    return out;
}

}  // namespace

std::optional<int> first_minimum(const LagProfile& profile) {
    if (profile.size() < 3) throw std::invalid_argument("profile needs at least 3 points");
    const auto idx = minima_indices(profile.values);
    if (idx.empty()) return std::nullopt;
    return profile.taus[idx.front()];
}

std::vector<int> local_minima(const LagProfile& profile) {
    std::vector<int> out;
    for (std::size_t i : minima_indices(profile.values)) out.push_back(profile.taus[i]);
    return out;
}

std::vector<std::size_t> local_maxima_indices(const std::vector<double>& values,
                                              bool smooth3) {
    std::vector<double> v = values;
    if (smooth3 && v.size() >= 3) {
        std::vector<double> s(v.size());
        s.front() = v.front();
        s.back() = v.back();
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (std::isfinite(v[i - 1]) && std::isfinite(v[i]) && std::isfinite(v[i + 1]))
                s[i] = (v[i - 1] + v[i] + v[i + 1]) / 3.0;
            else
                s[i] = v[i];
        }
        v = std::move(s);
    }
    std::vector<std::size_t> out;
    const std::size_t n = v.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!std::isfinite(v[i]) || !std::isfinite(v[i - 1])) continue;
        if (!(v[i - 1] < v[i])) continue;
        std::size_t j = i + 1;
        while (j < n && std::isfinite(v[j]) && v[j] == v[i]) ++j;
        if (j < n && std::isfinite(v[j]) && v[j] < v[i]) out.push_back(i);
    }
    return out;
}

}  // namespace delaykit
