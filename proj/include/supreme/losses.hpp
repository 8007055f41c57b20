#pragma once

#include <cstdint>
#include <vector>

#include "supreme/autograd.hpp"
#include "supreme/matrix.hpp"

namespace supreme {

struct LossWeights {
    double balance = 1.0;
    double attr = 1.0;
    double xent = 1.0;

    void validate() const;
};

struct LossReport {
    double clustering = 0.0;
    double balance = 0.0;
    double attr = 0.0;
    double xent = 0.0;
    double total = 0.0;
    std::size_t batch_size = 0;
};

// Confidence-weighted pairwise clustering loss. `constraints` and
// `confidence` are frozen batch matrices (diagonals already overridden by
// the caller when self-supervision is on); the up-to-date positive
// probability pairs each original row i with perturbed row j.
ag::TensorPtr clustering_loss(const ag::TensorPtr& p, const ag::TensorPtr& p_perturbed,
                              const Matrix& constraints, const Matrix& confidence);

// Plain averaged form: uniform 1/n^2 pair weights, no perturbed copy.
// Implemented as the weighted kernel with a constant weight matrix so the
// two paths agree bit-for-bit.
ag::TensorPtr clustering_loss_mean(const ag::TensorPtr& p, const Matrix& constraints);

// log K + sum_k s_k log s_k over approximated cluster sizes s; 0 when the
// batch spreads uniformly, log K at total collapse.
ag::TensorPtr balance_loss(const ag::TensorPtr& p);

// Mean binary entropy of the factor activations; 0 at {0,1}, ln 2 at 0.5.
ag::TensorPtr binary_loss(const ag::TensorPtr& factors);

// Cross-entropy of the source head against provided labels.
ag::TensorPtr source_xent(const ag::TensorPtr& p, const std::vector<std::uint32_t>& labels);

struct TotalLoss {
    ag::TensorPtr value;
    LossReport report;
};

TotalLoss total_loss(const ag::TensorPtr& l_clu, const ag::TensorPtr& l_balance,
                     const ag::TensorPtr& l_attr, const ag::TensorPtr& l_xent,
                     const LossWeights& weights, std::size_t batch_size);

}  // namespace supreme
