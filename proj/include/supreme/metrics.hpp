#pragma once

#include <string>
#include <vector>

#include "supreme/matrix.hpp"

namespace supreme {

struct HungarianResult {
    std::vector<int> assignment;  // row -> column
    double cost = 0.0;
};

// Minimum-cost assignment in O(k^3) (Jonker-style shortest augmenting paths
// with potentials). Rectangular inputs are padded with zero costs; NaN costs
// are rejected.
HungarianResult hungarian(const Matrix& cost);

enum class NmiNorm { geometric, arithmetic, max };
NmiNorm parse_nmi_norm(const std::string& name);

struct ClusterEvaluation {
    double acc = 0.0;
    double nmi = 0.0;
    std::vector<std::vector<long>> contingency;  // predicted cluster x true class
    std::vector<int> matching;                   // cluster -> class (-1 if matched to padding)
};

// Accuracy after the optimal cluster-to-class matching (maximum matched
// count via hungarian on complemented counts). Fills acc, contingency and
// matching; nmi is left to evaluate_clustering.
double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                           ClusterEvaluation* detail = nullptr);

// Mutual information normalised by the chosen mean of the two partition
// entropies. Degenerate partitions: 1.0 when both sides are a single
// identical cluster, 0.0 when only one side carries no information.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth,
           NmiNorm norm = NmiNorm::geometric);

ClusterEvaluation evaluate_clustering(const std::vector<int>& pred, const std::vector<int>& truth,
                                      NmiNorm norm = NmiNorm::geometric);

}  // namespace supreme
