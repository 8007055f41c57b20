#include "supreme/prior.hpp"

#include <cmath>
#include <string>

#include "supreme/autograd.hpp"
#include "supreme/binio.hpp"
#include "supreme/error.hpp"
#include "supreme/kmeans.hpp"

namespace supreme {

Matrix initial_assignments(const Matrix& x, const Matrix& centroids, double alpha) {
    if (alpha <= 0.0) {
        throw ValidationError(
            "alpha must be positive: the t-distribution kernel degenerates at alpha = 0 "
            "(division by zero); the default is 1.0");
    }
    if (x.cols != centroids.cols) {
        throw ValidationError("initial_assignments: dimension mismatch, points are " +
                              std::to_string(x.cols) + "-d but centroids are " +
                              std::to_string(centroids.cols) + "-d");
    }
    if (centroids.rows == 0) throw ValidationError("initial_assignments: no centroids");

    const double exponent = -(alpha + 1.0) / 2.0;
    Matrix p(x.rows, centroids.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double total = 0.0;
        for (std::size_t c = 0; c < centroids.rows; ++c) {
            const double d2 = squared_distance(x.row(i), centroids.row(c), x.cols);
            const double kernel = std::pow(1.0 + d2 / alpha, exponent);
            p.at(i, c) = kernel;
            total += kernel;
        }
        for (std::size_t c = 0; c < centroids.rows; ++c) p.at(i, c) /= total;
    }
    return p;
}

Matrix pair_constraints(const Matrix& assignments) {
    const std::size_t n = assignments.rows;
    const std::size_t k = assignments.cols;
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < k; ++c) dot += assignments.at(i, c) * assignments.at(j, c);
            r.at(i, j) = dot;
            r.at(j, i) = dot;  // mirrored, so symmetry is exact
        }
    }
    return r;
}

ConfidenceWeights confidence_weights(const Matrix& assignments, double tau,
                                     bool include_diagonal) {
    if (tau <= 0.0) throw ValidationError("confidence temperature tau must be positive");
    const std::size_t n = assignments.rows;
    const std::size_t k = assignments.cols;
    if (k < 2) throw ValidationError("confidence_weights: need at least 2 clusters");

    ConfidenceWeights out;
    out.entropy = Matrix(n, n);
    out.entropy_max = std::log(static_cast<double>(k) * static_cast<double>(k));
    out.weights = Matrix(n, n);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double h = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                const double q = assignments.at(i, c) * assignments.at(j, c);
                h -= q * std::log(std::max(q, ag::kLogFloor));
            }
            out.entropy.at(i, j) = h;
            out.entropy.at(j, i) = h;
        }
    }

    // softmax over the selected pair set, max-shifted for stability
    double z_max = -std::numeric_limits<double>::infinity();
    const double denom = out.entropy_max * tau;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!include_diagonal && i == j) continue;
            const double z = (out.entropy_max - out.entropy.at(i, j)) / denom;
            if (z > z_max) z_max = z;
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!include_diagonal && i == j) continue;
            const double z = (out.entropy_max - out.entropy.at(i, j)) / denom;
            const double e = std::exp(z - z_max);
            out.weights.at(i, j) = e;
            total += e;
        }
    }
    if (total > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (!include_diagonal && i == j) continue;
                out.weights.at(i, j) /= total;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) out.weights.at(i, i) = 1.0;
    return out;
}

void TransferPrior::save(const std::filesystem::path& path) const {
    BinaryWriter w(path);
    w.magic("PRI1");
    w.u32(static_cast<std::uint32_t>(centroids.rows));
    w.u32(static_cast<std::uint32_t>(centroids.cols));
    w.u32(static_cast<std::uint32_t>(assignments.rows));
    w.f64(alpha);
    w.f64(tau);
    for (double v : centroids.data) w.f64(v);
    for (double v : assignments.data) w.f64(v);
    w.close();
}

TransferPrior TransferPrior::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ValidationError("prior cache not found: " + path.string());
    }
    BinaryReader r(path);
    r.expect_magic("PRI1");
    const std::uint32_t k = r.u32();
    const std::uint32_t d = r.u32();
    const std::uint32_t n = r.u32();
    TransferPrior prior;
    prior.alpha = r.f64();
    prior.tau = r.f64();
    prior.centroids = Matrix(k, d);
    for (double& v : prior.centroids.data) v = r.f64();
    prior.assignments = Matrix(n, k);
    for (double& v : prior.assignments.data) v = r.f64();
    r.expect_eof();
    return prior;
}

PriorBuild build_prior(const Matrix& embedded, std::size_t k, double alpha, double tau,
                       std::uint64_t seed, int restarts) {
    KMeansResult km = kmeans(embedded, k, seed, restarts);
    PriorBuild out;
    out.prior.centroids = std::move(km.centroids);
    out.prior.assignments = initial_assignments(embedded, out.prior.centroids, alpha);
    out.prior.alpha = alpha;
    out.prior.tau = tau;
    out.hard_assignment = std::move(km.assignment);
    out.inertia = km.inertia;
    out.iterations = km.iterations;
    return out;
}

}  // namespace supreme
