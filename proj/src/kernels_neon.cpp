#include "delaykit/kernels.hpp"

#if defined(DELAYKIT_HAVE_NEON_TU)

#include <arm_neon.h>
#include <limits>

namespace delaykit::knl::neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return vaddvq_f64(acc) + tail;
}

double sum(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i];
    return vaddvq_f64(acc) + tail;
}

double sumsq(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t v = vld1q_f64(a + i);
        acc = vfmaq_f64(acc, v, v);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * a[i];
    return vaddvq_f64(acc) + tail;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dist2(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return vaddvq_f64(acc) + tail;
}

void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out) {
    const float64x2_t vqx = vdupq_n_f64(qx);
    const float64x2_t vqy = vdupq_n_f64(qy);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t dx = vsubq_f64(vld1q_f64(xs + i), vqx);
        const float64x2_t dy = vsubq_f64(vld1q_f64(ys + i), vqy);
        vst1q_f64(out + i, vfmaq_f64(vmulq_f64(dy, dy), dx, dx));
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - qx;
        const double dy = ys[i] - qy;
        out[i] = dx * dx + dy * dy;
    }
}

void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first) {
    const float64x2_t vq = vdupq_n_f64(q);
    std::size_t i = 0;
    if (first) {
        for (; i + 2 <= n; i += 2) {
            const float64x2_t d = vsubq_f64(vld1q_f64(c + i), vq);
            vst1q_f64(out + i, vmulq_f64(d, d));
        }
        for (; i < n; ++i) {
            const double d = c[i] - q;
            out[i] = d * d;
        }
    } else {
        for (; i + 2 <= n; i += 2) {
            const float64x2_t d = vsubq_f64(vld1q_f64(c + i), vq);
            vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), d, d));
        }
        for (; i < n; ++i) {
            const double d = c[i] - q;
            out[i] += d * d;
        }
    }
}


std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out) {
    const float64x2_t vfloor = vdupq_n_f64(floor_val);
    float64x2_t vbest = vdupq_n_f64(std::numeric_limits<double>::infinity());
    float64x2_t vidx = vdupq_n_f64(static_cast<double>(n));
    float64x2_t vcur = {0.0, 1.0};
    const float64x2_t vtwo = vdupq_n_f64(2.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t m =
            vmaxq_f64(vmaxq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), vfloor);
        const uint64x2_t lt = vcltq_f64(m, vbest);
        vbest = vbslq_f64(lt, m, vbest);
        vidx = vbslq_f64(lt, vcur, vidx);
        vcur = vaddq_f64(vcur, vtwo);
    }
    double best[2], idx[2];
    vst1q_f64(best, vbest);
    vst1q_f64(idx, vidx);
    double out = std::numeric_limits<double>::infinity();
    double out_i = static_cast<double>(n);
    for (int k = 0; k < 2; ++k) {
        if (best[k] < out || (best[k] == out && idx[k] < out_i)) {
            out = best[k];
            out_i = idx[k];
        }
    }
    std::size_t best_i = static_cast<std::size_t>(out_i);
    for (; i < n; ++i) {
        double m = a[i] > b[i] ? a[i] : b[i];
        if (m < floor_val) m = floor_val;
        if (m < out) {
            out = m;
            best_i = i;
        }
    }
    min_out = out;
    return out == std::numeric_limits<double>::infinity() ? n : best_i;
}

}  // namespace delaykit::knl::neon

#endif  // DELAYKIT_HAVE_NEON_TU
