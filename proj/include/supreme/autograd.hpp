#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "supreme/matrix.hpp"

namespace supreme::ag {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Floor applied by log_guarded; the gradient is zero below the clamp.
inline constexpr double kLogFloor = 1e-12;

// Node of the implicit computation graph over dense 2-d tensors. Forward
// values are computed eagerly when an op is applied; backward_fn propagates
// this node's grad into its parents. Only the primitives needed by the head
// model and its losses exist — this is not a general autodiff.
class Tensor : public std::enable_shared_from_this<Tensor> {
public:
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;   // row-major, rows*cols
    std::vector<double> grad;   // same length as data once allocated
    bool requires_grad = false;

    std::vector<TensorPtr> parents;
    std::function<void(Tensor&)> backward_fn;

    std::size_t size() const { return rows * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double scalar() const;         // value of a 1x1 tensor
    void ensure_grad();            // allocate zeros if missing
    void zero_grad();
    Matrix values() const;         // copy out as a plain matrix
    Matrix gradient() const;       // copy out grads (throws if absent)
};

TensorPtr leaf(std::size_t rows, std::size_t cols, std::vector<double> values,
               bool requires_grad = false);
TensorPtr leaf(const Matrix& m, bool requires_grad = false);
TensorPtr constant(const Matrix& m);

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
TensorPtr transpose(const TensorPtr& a);
TensorPtr add(const TensorPtr& a, const TensorPtr& b);          // same shape
TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& b);   // b is 1 x cols(a)
TensorPtr add_scalar(const TensorPtr& a, double s);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);          // elementwise
TensorPtr relu(const TensorPtr& a);
TensorPtr sigmoid(const TensorPtr& a);
TensorPtr softmax_rows(const TensorPtr& a);
TensorPtr log_guarded(const TensorPtr& a);                      // log(max(x, kLogFloor))
TensorPtr sum(const TensorPtr& a);
TensorPtr mean(const TensorPtr& a);
TensorPtr neg(const TensorPtr& a);
TensorPtr scale(const TensorPtr& a, double s);

// Reverse pass from a scalar output. Visits every reachable node exactly
// once in reverse topological order; gradients accumulate into leaves.
void backward(const TensorPtr& output);

class AdamOptimizer {
public:
    struct Config {
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    explicit AdamOptimizer(std::vector<TensorPtr> params);
    AdamOptimizer(std::vector<TensorPtr> params, Config cfg);

    // One Adam update with bias correction. Every parameter must carry a
    // gradient (populated by backward); grads are NOT zeroed here.
    void step(double lr);
    void zero_grad();
    long step_count() const { return t_; }
    const std::vector<TensorPtr>& params() const { return params_; }

private:
    std::vector<TensorPtr> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    long t_ = 0;
    Config cfg_;
};

}  // namespace supreme::ag
