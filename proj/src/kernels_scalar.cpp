#include "delaykit/kernels.hpp"

#include <limits>

namespace delaykit::knl::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sumsq(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dist2(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        out[i] = dx * dx + dy * dy;
    }
}

void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first) {
    if (first) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = c[i] - q;
            out[i] = d * d;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = c[i] - q;
            out[i] += d * d;
        }
    }
}


std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = n;
    for (std::size_t i = 0; i < n; ++i) {
        double m = a[i] > b[i] ? a[i] : b[i];
        if (m < floor_val) m = floor_val;
        if (m < best) {
            best = m;
            best_i = i;
        }
    }
    min_out = best;
    return best_i;
}

}  // namespace delaykit::knl::scalar
