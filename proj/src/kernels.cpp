#include "delaykit/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace delaykit::knl {

namespace {

struct Backend {
    const char* name;
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sumsq)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*dist2)(const double*, const double*, std::size_t);
    void (*dist2_2d)(const double*, const double*, double, double, std::size_t, double*);
    void (*sq_diff_accum)(const double*, double, double*, std::size_t, bool);
    std::size_t (*argmin_pairwise_max)(const double*, const double*, double, std::size_t, double&);
};

constexpr Backend kScalar{
    "scalar",    scalar::dot,      scalar::sum,
    scalar::sumsq, scalar::axpy,   scalar::dist2,
    scalar::dist2_2d, scalar::sq_diff_accum, scalar::argmin_pairwise_max,
};

#if defined(DELAYKIT_HAVE_AVX2_TU)
constexpr Backend kAvx2{
    "avx2",    avx2::dot,      avx2::sum,
    avx2::sumsq, avx2::axpy,   avx2::dist2,
    avx2::dist2_2d, avx2::sq_diff_accum, avx2::argmin_pairwise_max,
};
#endif

#if defined(DELAYKIT_HAVE_NEON_TU)
constexpr Backend kNeon{
    "neon",    neon::dot,      neon::sum,
    neon::sumsq, neon::axpy,   neon::dist2,
    neon::dist2_2d, neon::sq_diff_accum, neon::argmin_pairwise_max,
};
#endif

Backend select_backend() {
    // DELAYKIT_SIMD=scalar forces the reference path.
    const char* env = std::getenv("DELAYKIT_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalar;
#if defined(DELAYKIT_HAVE_AVX2_TU)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return kAvx2;
#endif
#if defined(DELAYKIT_HAVE_NEON_TU)
    return kNeon;
#endif
    return kScalar;
}

const Backend& backend() {
    static const Backend b = select_backend();
    return b;
}

}  // namespace

const char* backend_name() { return backend().name; }

double dot(const double* a, const double* b, std::size_t n) {
    return backend().dot(a, b, n);
}

double sum(const double* a, std::size_t n) { return backend().sum(a, n); }

double sumsq(const double* a, std::size_t n) { return backend().sumsq(a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    backend().axpy(alpha, x, y, n);
}

double dist2(const double* a, const double* b, std::size_t n) {
    return backend().dist2(a, b, n);
}

void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out) {
    backend().dist2_2d(xs, ys, qx, qy, n, out);
}

void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first) {
    backend().sq_diff_accum(c, q, out, n, first);
}

std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out) {
    return backend().argmin_pairwise_max(a, b, floor_val, n, min_out);
}

}  // namespace delaykit::knl
