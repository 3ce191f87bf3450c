#pragma once

#include <vector>

#include "helmdd/sparse.hpp"

namespace helmdd {

/// Approximate-minimum-degree ordering of the symmetrized pattern of A
/// (pattern of A + A^T, diagonal ignored). Returns the elimination order:
/// perm[k] is the index eliminated at step k. Used as a fill-reducing
/// column ordering for the sparse LU.
std::vector<int> amd_order(const SparseComplexMatrix& a);

} // namespace helmdd
