#pragma once

#include <functional>
#include <vector>

#include "supreme/autograd.hpp"
#include "supreme/matrix.hpp"

// Brute-force and closed-form reference computations used by the test and
// acceptance suites. Nothing here shares an algorithm with the production
// code it checks: matchings are enumerated, gradients come from central
// differences, k-means optima from exhaustive assignment enumeration.
namespace supreme::oracle {

struct BruteMatch {
    std::vector<int> permutation;  // row -> column over the padded square table
    long matched = 0;
};

// Best cluster-to-class matching by enumerating all k! permutations of the
// (zero-padded) contingency table. Table sides must be <= 6.
BruteMatch brute_force_matching(const std::vector<std::vector<long>>& contingency);

// Minimum assignment cost over all k! permutations of a square cost matrix.
double brute_force_assignment_cost(const Matrix& cost);

// Central finite differences of `value` with respect to every coordinate of
// `params`, concatenated in order. `value` must recompute the loss from the
// current parameter data on every call.
std::vector<double> finite_difference_grad(const std::function<double()>& value,
                                           const std::vector<ag::TensorPtr>& params, double h);

// Relative error with a unit floor: |a-b| / max(|a|, |b|, floor).
double gradient_error(const std::vector<double>& analytic, const std::vector<double>& estimate,
                      double floor = 1e-3);

// Flattened gradients of `params` after a backward pass.
std::vector<double> collect_grads(const std::vector<ag::TensorPtr>& params);

// Optimal k-means inertia by enumerating all k^n assignments (n <= 8, k <= 3).
double exhaustive_kmeans_inertia(const Matrix& points, std::size_t k);

// Clustering accuracy straight from the enumerated matching.
double direct_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Normalised mutual information recomputed from first principles
// (geometric-mean normalisation).
double direct_nmi(const std::vector<int>& pred, const std::vector<int>& truth);

}  // namespace supreme::oracle
