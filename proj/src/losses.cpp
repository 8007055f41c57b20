#include "supreme/losses.hpp"

#include <cmath>
#include <string>

#include "supreme/error.hpp"

namespace supreme {

using ag::TensorPtr;

void LossWeights::validate() const {
    for (double v : {balance, attr, xent}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError("loss weights must be finite and >= 0");
        }
    }
}

TensorPtr clustering_loss(const TensorPtr& p, const TensorPtr& p_perturbed,
                          const Matrix& constraints, const Matrix& confidence) {
    const std::size_t n = p->rows;
    if (p_perturbed->rows != n || p_perturbed->cols != p->cols) {
        throw ValidationError("clustering_loss: assignment shapes differ");
    }
    if (constraints.rows != n || constraints.cols != n || confidence.rows != n ||
        confidence.cols != n) {
        throw ValidationError("clustering_loss: pair matrices must be " + std::to_string(n) + "x" +
                              std::to_string(n));
    }
    Matrix coeff(n, n);
    for (std::size_t i = 0; i < coeff.size(); ++i) {
        coeff.data[i] = confidence.data[i] * constraints.data[i];
    }
    auto pair_prob = ag::matmul(p, ag::transpose(p_perturbed));
    return ag::neg(ag::sum(ag::mul(ag::constant(coeff), ag::log_guarded(pair_prob))));
}

TensorPtr clustering_loss_mean(const TensorPtr& p, const Matrix& constraints) {
    const std::size_t n = p->rows;
    const double unit = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    Matrix uniform(n, n, unit);
    return clustering_loss(p, p, constraints, uniform);
}

TensorPtr balance_loss(const TensorPtr& p) {
    const std::size_t n = p->rows;
    const std::size_t k = p->cols;
    if (n == 0 || k == 0) throw ValidationError("balance_loss: empty batch");
    Matrix ones(1, n, 1.0);
    auto sizes = ag::scale(ag::matmul(ag::constant(ones), p), 1.0 / static_cast<double>(n));
    auto entropy = ag::sum(ag::mul(sizes, ag::log_guarded(sizes)));
    return ag::add_scalar(entropy, std::log(static_cast<double>(k)));
}

TensorPtr binary_loss(const TensorPtr& factors) {
    auto one_minus = ag::add_scalar(ag::neg(factors), 1.0);
    auto bits = ag::add(ag::mul(factors, ag::log_guarded(factors)),
                        ag::mul(one_minus, ag::log_guarded(one_minus)));
    return ag::neg(ag::mean(bits));
}

TensorPtr source_xent(const TensorPtr& p, const std::vector<std::uint32_t>& labels) {
    const std::size_t n = p->rows;
    const std::size_t k = p->cols;
    if (labels.size() != n) {
        throw ValidationError("source_xent: " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(n) + " rows");
    }
    Matrix onehot(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= k) {
            throw ValidationError("source_xent: label " + std::to_string(labels[i]) +
                                  " out of range for " + std::to_string(k) + " classes");
        }
        onehot.at(i, labels[i]) = 1.0;
    }
    auto picked = ag::sum(ag::mul(ag::constant(onehot), ag::log_guarded(p)));
    return ag::scale(picked, -1.0 / static_cast<double>(n));
}

TotalLoss total_loss(const TensorPtr& l_clu, const TensorPtr& l_balance, const TensorPtr& l_attr,
                     const TensorPtr& l_xent, const LossWeights& weights, std::size_t batch_size) {
    weights.validate();
    TotalLoss out;
    out.value = ag::add(
        l_clu, ag::add(ag::scale(l_balance, weights.balance),
                       ag::add(ag::scale(l_attr, weights.attr), ag::scale(l_xent, weights.xent))));
    out.report.clustering = l_clu->scalar();
    out.report.balance = l_balance->scalar();
    out.report.attr = l_attr->scalar();
    out.report.xent = l_xent->scalar();
    out.report.total = out.value->scalar();
    out.report.batch_size = batch_size;
    return out;
}

}  // namespace supreme
