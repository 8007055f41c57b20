#include "supreme/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "supreme/error.hpp"
#include "supreme/rng.hpp"

namespace supreme {

namespace {

Matrix plusplus_init(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows;
    Matrix centroids(k, x.cols);
    std::vector<double> d2(n, 0.0);

    std::size_t first = rng.below(n);
    for (std::size_t j = 0; j < x.cols; ++j) centroids.at(0, j) = x.at(first, j);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), centroids.row(0), x.cols);

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total <= 0.0) {
            pick = rng.below(n);
        } else {
            const double r = rng.uniform01() * total;
            double cum = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        }
        for (std::size_t j = 0; j < x.cols; ++j) centroids.at(c, j) = x.at(pick, j);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(x.row(i), centroids.row(c), x.cols));
        }
    }
    return centroids;
}

int nearest_centroid(const Matrix& centroids, const double* point, std::size_t d) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows; ++c) {
        const double dist = squared_distance(point, centroids.row(c), d);
        if (dist < best_d) {
            best_d = dist;
            best = static_cast<int>(c);
        }
    }
    return best;
}

KMeansResult lloyd(const Matrix& x, std::size_t k, Rng& rng, int max_iter) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    KMeansResult res;
    res.centroids = plusplus_init(x, k, rng);
    std::vector<int> assign(n, -1), prev(n, -1);

    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter + 1;
        for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_centroid(res.centroids, x.row(i), d);

        // re-seed emptied clusters at the point farthest from its centroid
        std::vector<std::size_t> counts(k, 0);
        for (int a : assign) ++counts[static_cast<std::size_t>(a)];
        std::vector<bool> taken(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double worst = -1.0;
            std::size_t pick = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                const std::size_t a = static_cast<std::size_t>(assign[i]);
                if (counts[a] <= 1) continue;  // do not empty another cluster
                const double dist = squared_distance(x.row(i), res.centroids.row(a), d);
                if (dist > worst) {
                    worst = dist;
                    pick = i;
                }
            }
            if (worst < 0.0) continue;  // all points pinned; leave cluster empty
            --counts[static_cast<std::size_t>(assign[pick])];
            assign[pick] = static_cast<int>(c);
            ++counts[c];
            taken[pick] = true;
            for (std::size_t j = 0; j < d; ++j) res.centroids.at(c, j) = x.at(pick, j);
        }

        if (assign == prev) break;
        prev = assign;

        Matrix sums(k, d);
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = static_cast<std::size_t>(assign[i]);
            ++sizes[a];
            for (std::size_t j = 0; j < d; ++j) sums.at(a, j) += x.at(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                res.centroids.at(c, j) = sums.at(c, j) / static_cast<double>(sizes[c]);
            }
        }
    }

    res.assignment = assign;
    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.inertia +=
            squared_distance(x.row(i), res.centroids.row(static_cast<std::size_t>(assign[i])), d);
    }
    return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, int restarts,
                    int max_iter) {
    if (k == 0) throw ValidationError("kmeans: k must be positive");
    if (points.rows < k) {
        throw ValidationError("kmeans: " + std::to_string(points.rows) + " points for k=" +
                              std::to_string(k));
    }
    if (restarts < 1) throw ValidationError("kmeans: restarts must be >= 1");
    Rng rng(derive_seed(seed, 0x6b6d)); // "km"
    KMeansResult best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        KMeansResult run = lloyd(points, k, rng, max_iter);
        if (!have || run.inertia < best.inertia) {
            best = std::move(run);
            have = true;
        }
    }
    return best;
}

}  // namespace supreme
