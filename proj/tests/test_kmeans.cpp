#include <doctest.h>

#include "oracles.hpp"
#include "supreme/error.hpp"
#include "supreme/kmeans.hpp"
#include "supreme/rng.hpp"

using namespace supreme;
namespace oracle = supreme::oracle;

TEST_CASE("one cluster sits at the data mean") {
    Matrix pts(4, 2);
    pts.at(0, 0) = 1.0;
    pts.at(1, 0) = 3.0;
    pts.at(2, 1) = -2.0;
    pts.at(3, 1) = 6.0;
    const KMeansResult res = kmeans(pts, 1, 5);
    CHECK(res.centroids.at(0, 0) == doctest::Approx(1.0));
    CHECK(res.centroids.at(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("k equal to n puts every point in its own cluster") {
    Rng rng(9);
    Matrix pts(6, 3);
    for (double& v : pts.data) v = rng.uniform(-4.0, 4.0);
    const KMeansResult res = kmeans(pts, 6, 13);
    CHECK(res.inertia == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<bool> seen(6, false);
    for (int a : res.assignment) seen[static_cast<std::size_t>(a)] = true;
    for (bool s : seen) CHECK(s);
}

TEST_CASE("fewer points than clusters is rejected") {
    Matrix pts(2, 2);
    CHECK_THROWS_AS(kmeans(pts, 3, 0), ValidationError);
}

TEST_CASE("small instances reach the exhaustive optimum") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4 + rng.below(5);   // 4..8
        const std::size_t k = 2 + rng.below(2);   // 2..3
        Matrix pts(n, 1 + rng.below(2));
        for (double& v : pts.data) v = rng.uniform(-5.0, 5.0);
        const double optimum = oracle::exhaustive_kmeans_inertia(pts, k);
        const KMeansResult res = kmeans(pts, k, rng.next_u64(), 10);
        CHECK(res.inertia >= optimum - 1e-9);
        CHECK(res.inertia <= optimum + 1e-6);
    }
}

TEST_CASE("same seed gives identical results") {
    Rng rng(31);
    Matrix pts(30, 4);
    for (double& v : pts.data) v = rng.uniform(-3.0, 3.0);
    const KMeansResult a = kmeans(pts, 3, 123);
    const KMeansResult b = kmeans(pts, 3, 123);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignment == b.assignment);
    CHECK(a.inertia == b.inertia);
}
