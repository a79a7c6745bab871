#pragma once

#include <cstddef>
#include <vector>

namespace mprad {

// Row-major square symmetric matrix eigendecomposition via cyclic Jacobi
// rotations. Deterministic: fixed sweep order, eigenpairs sorted by
// descending eigenvalue (ties by original column index), and each
// eigenvector's entry of largest magnitude made positive.
struct SymmetricEigen {
    std::vector<double> eigenvalues;  // descending
    std::vector<double> eigenvectors; // row-major, column k = k-th eigenvector
    std::size_t n = 0;

    double vector_entry(std::size_t row, std::size_t k) const { return eigenvectors[row * n + k]; }
};

SymmetricEigen symmetric_eigen(std::vector<double> a, std::size_t n);

} // namespace mprad
