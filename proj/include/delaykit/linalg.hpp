#pragma once

#include <cstddef>
#include <vector>

// Small dense linear algebra helpers. Matrices are row-major.
namespace delaykit {

/// Eigen-decomposition of a symmetric n x n matrix via cyclic Jacobi
/// rotations. Returns eigenvalues in descending order; eigenvectors[k*n..]
/// is the row-major eigenvector for eigenvalues[k].
struct SymmetricEigen {
    std::vector<double> values;
    std::vector<double> vectors;
};

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n);

/// |det| of an n x n matrix via partial-pivot LU. Destroys the input.
double abs_det(std::vector<double>& a, std::size_t n);

/// Solves the symmetric positive definite system A x = b by Cholesky
/// factorization. Returns false when the factorization breaks down.
bool cholesky_solve(std::vector<double> a, std::size_t n,
                    const std::vector<double>& b, std::vector<double>& x);

/// Eigenvalues of a symmetric 2x2 matrix [[a, b], [b, c]], larger first.
void eigen2x2(double a, double b, double c, double& lambda1, double& lambda2);

}  // namespace delaykit
