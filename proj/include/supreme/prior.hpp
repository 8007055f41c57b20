#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "supreme/matrix.hpp"

namespace supreme {

// Soft assignment of each row of x to each centroid under a Student's-t
// kernel with `alpha` degrees of freedom; rows normalise to 1.
Matrix initial_assignments(const Matrix& x, const Matrix& centroids, double alpha);

// Pairwise positive probabilities r[i][j] = <p_i, p_j> for a batch of
// assignment rows. Symmetric, entries in [0, 1].
Matrix pair_constraints(const Matrix& assignments);

struct ConfidenceWeights {
    Matrix entropy;      // pairwise joint entropies H, symmetric
    double entropy_max;  // log(k^2)
    Matrix weights;      // softmax over pair scores; diagonal forced to 1
};

// Joint-entropy confidence of each pair in a batch. Scores are
// (H_max - H) / (H_max * tau); the softmax normalises over off-diagonal
// pairs (or all pairs when include_diagonal is set), then the diagonal is
// overwritten with 1 so self pairs always count in full.
ConfidenceWeights confidence_weights(const Matrix& assignments, double tau,
                                     bool include_diagonal = false);

// Frozen transfer prior computed once from the pretrained embedding.
struct TransferPrior {
    Matrix centroids;    // k x d_v
    Matrix assignments;  // n x k, rows sum to 1
    double alpha = 1.0;
    double tau = 0.5;

    std::size_t k() const { return centroids.rows; }

    // PRI1 cache: magic, u32 k, u32 d_v, u32 n, f64 alpha, f64 tau,
    // f64 centroids row-major, f64 assignments row-major.
    void save(const std::filesystem::path& path) const;
    static TransferPrior load(const std::filesystem::path& path);
};

struct PriorBuild {
    TransferPrior prior;
    std::vector<int> hard_assignment;  // k-means labels, for baseline reporting
    double inertia = 0.0;
    int iterations = 0;
};

PriorBuild build_prior(const Matrix& embedded, std::size_t k, double alpha, double tau,
                       std::uint64_t seed, int restarts = 10);

}  // namespace supreme
