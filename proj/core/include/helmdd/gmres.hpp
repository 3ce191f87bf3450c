#pragma once

#include <functional>
#include <span>
#include <vector>

#include "helmdd/sparse.hpp"

namespace helmdd {

using LinearOp = std::function<void(std::span<const Complex>, std::span<Complex>)>;

struct GmresConfig {
    double tolerance = 1e-6; // relative residual reduction
    int max_iterations = 500;

    enum class Start { Zero, Random };
    Start start = Start::Zero;
    std::uint64_t seed = 0; // seeds the uniform-[0,1] real start vector

    /// Left: iterate on P(b - A x), residual measured after preconditioning.
    /// Right: iterate on A P y with x = x0 + P y, residual is the true one.
    /// The weighted inner product is supported on the left side only.
    enum class Side { Left, Right };
    Side side = Side::Left;

    /// Inner product weight: Euclidean when null, otherwise a Hermitian
    /// positive definite matrix (the energy matrix in practice).
    const SparseComplexMatrix* weight = nullptr;

    /// Keep the Arnoldi basis in the result (debugging aid for the
    /// orthonormality checks on small problems).
    bool keep_basis = false;
    /// Also record the unpreconditioned residual per iteration (costs one
    /// extra operator application and solution update each step).
    bool record_unpreconditioned = false;
};

struct GmresResult {
    std::vector<Complex> solution;
    int iterations = 0; // Arnoldi steps taken
    bool converged = false;
    bool breakdown = false; // exact solution found in the Krylov space
    std::vector<double> residual_history; // length iterations + 1
    std::vector<double> unpreconditioned_history;
    std::vector<std::vector<Complex>> basis;
};

/// Preconditioned full GMRES with modified Gram-Schmidt and one conditional
/// reorthogonalization pass. An empty preconditioner means the identity.
/// On the left side it minimizes || P (b - A x) || in the configured inner
/// product; on the right side it minimizes the true residual || b - A x ||_2.
GmresResult gmres(const LinearOp& apply_a, const LinearOp& apply_p, std::span<const Complex> rhs,
                  const GmresConfig& cfg = {});

} // namespace helmdd
