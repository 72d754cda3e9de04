#pragma once

#include <cstddef>

// Arithmetic inner loops used across the toolkit. Each kernel exists as a
// scalar reference implementation plus optional SIMD variants; the entry
// points at the bottom dispatch once at startup based on the host CPU.
// SIMD variants reorder reductions, so results may differ from the scalar
// reference in the last bits; equivalence is tested to tight tolerances.
namespace delaykit::knl {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dist2(const double* a, const double* b, std::size_t n);
// out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2
void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out);
// out[i] = (c[i]-q)^2 when first, else out[i] += (c[i]-q)^2.
// Building block for structure-of-arrays distance sweeps in any dimension.
void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first);
// min over i of max(a[i], b[i], floor) and the first index attaining it;
// +inf entries drop out naturally. Hot loop of the Rips cofacet scan.
// Returns n when every entry is +inf.
std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out);
}  // namespace scalar

#if defined(DELAYKIT_HAVE_AVX2_TU)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dist2(const double* a, const double* b, std::size_t n);
void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out);
void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first);
std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out);
}  // namespace avx2
#endif

#if defined(DELAYKIT_HAVE_NEON_TU)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dist2(const double* a, const double* b, std::size_t n);
void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out);
void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first);
std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out);
}  // namespace neon
#endif

/// Name of the backend selected at startup: "avx2", "neon" or "scalar".
const char* backend_name();

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double dist2(const double* a, const double* b, std::size_t n);
void dist2_2d(const double* xs, const double* ys, double qx, double qy,
              std::size_t n, double* out);
void sq_diff_accum(const double* c, double q, double* out, std::size_t n,
                   bool first);
std::size_t argmin_pairwise_max(const double* a, const double* b, double floor_val,
                                std::size_t n, double& min_out);

}  // namespace delaykit::knl
