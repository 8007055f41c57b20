#pragma once

#include <cstdint>
#include <vector>

#include "supreme/matrix.hpp"

namespace supreme {

struct KMeansResult {
    Matrix centroids;             // k x d
    std::vector<int> assignment;  // n
    double inertia = 0.0;
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Converges when assignments stop
// changing or after max_iter sweeps; an emptied cluster is re-seeded at the
// point farthest from its current centroid. Deterministic given the seed;
// the best of `restarts` runs (lowest inertia) is returned.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, int restarts = 10,
                    int max_iter = 300);

}  // namespace supreme
