#include "supreme/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>

#include "supreme/error.hpp"

namespace supreme::ag {

namespace {

std::string shape_str(const Tensor& t) {
    return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

void check(const TensorPtr& t, const char* op) {
    if (!t) throw ValidationError(std::string(op) + ": null tensor");
}

TensorPtr make_node(std::size_t rows, std::size_t cols, std::vector<TensorPtr> parents) {
    auto t = std::make_shared<Tensor>();
    t->rows = rows;
    t->cols = cols;
    t->data.assign(rows * cols, 0.0);
    t->parents = std::move(parents);
    for (const auto& p : t->parents) {
        if (p->requires_grad) t->requires_grad = true;
    }
    return t;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double Tensor::scalar() const {
    if (size() != 1) throw ValidationError("scalar(): tensor is " + shape_str(*this));
    return data[0];
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

Matrix Tensor::values() const {
    Matrix m(rows, cols);
    m.data = data;
    return m;
}

Matrix Tensor::gradient() const {
    if (grad.size() != data.size()) throw ValidationError("gradient(): no grad populated");
    Matrix m(rows, cols);
    m.data = grad;
    return m;
}

TensorPtr leaf(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad) {
    if (values.size() != rows * cols) {
        throw ValidationError("leaf: " + std::to_string(values.size()) + " values for shape " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    }
    auto t = std::make_shared<Tensor>();
    t->rows = rows;
    t->cols = cols;
    t->data = std::move(values);
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr leaf(const Matrix& m, bool requires_grad) {
    return leaf(m.rows, m.cols, m.data, requires_grad);
}

TensorPtr constant(const Matrix& m) { return leaf(m, false); }

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    check(a, "matmul");
    check(b, "matmul");
    if (a->cols != b->rows) {
        throw ValidationError("matmul: inner dimensions differ, " + shape_str(*a) + " vs " +
                              shape_str(*b));
    }
    auto out = make_node(a->rows, b->cols, {a, b});
    const std::size_t n = a->rows, m = a->cols, p = b->cols;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const double av = a->data[i * m + k];
            for (std::size_t j = 0; j < p; ++j) {
                out->data[i * p + j] += av * b->data[k * p + j];
            }
        }
    }
    out->backward_fn = [n, m, p](Tensor& t) {
        Tensor& pa = *t.parents[0];
        Tensor& pb = *t.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < p; ++j) {
                    const double g = t.grad[i * p + j];
                    for (std::size_t k = 0; k < m; ++k) {
                        pa.grad[i * m + k] += g * pb.data[k * p + j];
                    }
                }
            }
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < m; ++k) {
                    const double av = pa.data[i * m + k];
                    for (std::size_t j = 0; j < p; ++j) {
                        pb.grad[k * p + j] += av * t.grad[i * p + j];
                    }
                }
            }
        }
    };
    return out;
}

TensorPtr transpose(const TensorPtr& a) {
    check(a, "transpose");
    auto out = make_node(a->cols, a->rows, {a});
    for (std::size_t i = 0; i < a->rows; ++i) {
        for (std::size_t j = 0; j < a->cols; ++j) {
            out->data[j * a->rows + i] = a->data[i * a->cols + j];
        }
    }
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.rows; ++i) {
            for (std::size_t j = 0; j < t.cols; ++j) {
                pa.grad[j * t.rows + i] += t.grad[i * t.cols + j];
            }
        }
    };
    return out;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    check(a, "add");
    check(b, "add");
    if (a->rows != b->rows || a->cols != b->cols) {
        throw ValidationError("add: shape mismatch, " + shape_str(*a) + " vs " + shape_str(*b));
    }
    auto out = make_node(a->rows, a->cols, {a, b});
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = a->data[i] + b->data[i];
    out->backward_fn = [](Tensor& t) {
        for (int which = 0; which < 2; ++which) {
            Tensor& p = *t.parents[static_cast<std::size_t>(which)];
            if (!p.requires_grad) continue;
            p.ensure_grad();
            for (std::size_t i = 0; i < t.size(); ++i) p.grad[i] += t.grad[i];
        }
    };
    return out;
}

TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& b) {
    check(a, "add_rowvec");
    check(b, "add_rowvec");
    if (b->rows != 1 || b->cols != a->cols) {
        throw ValidationError("add_rowvec: expected 1x" + std::to_string(a->cols) +
                              " row vector, got " + shape_str(*b));
    }
    auto out = make_node(a->rows, a->cols, {a, b});
    for (std::size_t i = 0; i < a->rows; ++i) {
        for (std::size_t j = 0; j < a->cols; ++j) {
            out->data[i * a->cols + j] = a->data[i * a->cols + j] + b->data[j];
        }
    }
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        Tensor& pb = *t.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < t.size(); ++i) pa.grad[i] += t.grad[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < t.rows; ++i) {
                for (std::size_t j = 0; j < t.cols; ++j) {
                    pb.grad[j] += t.grad[i * t.cols + j];
                }
            }
        }
    };
    return out;
}

TensorPtr add_scalar(const TensorPtr& a, double s) {
    check(a, "add_scalar");
    auto out = make_node(a->rows, a->cols, {a});
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = a->data[i] + s;
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.size(); ++i) pa.grad[i] += t.grad[i];
    };
    return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    check(a, "mul");
    check(b, "mul");
    if (a->rows != b->rows || a->cols != b->cols) {
        throw ValidationError("mul: shape mismatch, " + shape_str(*a) + " vs " + shape_str(*b));
    }
    auto out = make_node(a->rows, a->cols, {a, b});
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = a->data[i] * b->data[i];
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        Tensor& pb = *t.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < t.size(); ++i) pa.grad[i] += t.grad[i] * pb.data[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < t.size(); ++i) pb.grad[i] += t.grad[i] * pa.data[i];
        }
    };
    return out;
}

TensorPtr relu(const TensorPtr& a) {
    check(a, "relu");
    auto out = make_node(a->rows, a->cols, {a});
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = a->data[i] > 0.0 ? a->data[i] : 0.0;
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (pa.data[i] > 0.0) pa.grad[i] += t.grad[i];
        }
    };
    return out;
}

TensorPtr sigmoid(const TensorPtr& a) {
    check(a, "sigmoid");
    auto out = make_node(a->rows, a->cols, {a});
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = stable_sigmoid(a->data[i]);
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double y = t.data[i];
            pa.grad[i] += t.grad[i] * y * (1.0 - y);
        }
    };
    return out;
}

TensorPtr softmax_rows(const TensorPtr& a) {
    check(a, "softmax_rows");
    if (a->cols == 0) throw ValidationError("softmax_rows: zero columns");
    auto out = make_node(a->rows, a->cols, {a});
    for (std::size_t i = 0; i < a->rows; ++i) {
        const double* x = a->data.data() + i * a->cols;
        double* y = out->data.data() + i * a->cols;
        double mx = x[0];
        for (std::size_t j = 1; j < a->cols; ++j) mx = std::max(mx, x[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < a->cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            total += y[j];
        }
        for (std::size_t j = 0; j < a->cols; ++j) y[j] /= total;
    }
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.rows; ++i) {
            const double* y = t.data.data() + i * t.cols;
            const double* g = t.grad.data() + i * t.cols;
            double dot = 0.0;
            for (std::size_t j = 0; j < t.cols; ++j) dot += g[j] * y[j];
            for (std::size_t j = 0; j < t.cols; ++j) {
                pa.grad[i * t.cols + j] += y[j] * (g[j] - dot);
            }
        }
    };
    return out;
}

TensorPtr log_guarded(const TensorPtr& a) {
    check(a, "log_guarded");
    auto out = make_node(a->rows, a->cols, {a});
    for (std::size_t i = 0; i < out->size(); ++i) {
        out->data[i] = std::log(std::max(a->data[i], kLogFloor));
    }
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (pa.data[i] > kLogFloor) pa.grad[i] += t.grad[i] / pa.data[i];
        }
    };
    return out;
}

TensorPtr sum(const TensorPtr& a) {
    check(a, "sum");
    auto out = make_node(1, 1, {a});
    double s = 0.0;
    for (double v : a->data) s += v;
    out->data[0] = s;
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        const double g = t.grad[0];
        for (std::size_t i = 0; i < pa.size(); ++i) pa.grad[i] += g;
    };
    return out;
}

TensorPtr mean(const TensorPtr& a) {
    check(a, "mean");
    if (a->size() == 0) throw ValidationError("mean: empty tensor");
    auto out = make_node(1, 1, {a});
    double s = 0.0;
    for (double v : a->data) s += v;
    out->data[0] = s / static_cast<double>(a->size());
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        const double g = t.grad[0] / static_cast<double>(pa.size());
        for (std::size_t i = 0; i < pa.size(); ++i) pa.grad[i] += g;
    };
    return out;
}

TensorPtr neg(const TensorPtr& a) {
    check(a, "neg");
    auto out = make_node(a->rows, a->cols, {a});
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = -a->data[i];
    out->backward_fn = [](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.size(); ++i) pa.grad[i] -= t.grad[i];
    };
    return out;
}

TensorPtr scale(const TensorPtr& a, double s) {
    check(a, "scale");
    auto out = make_node(a->rows, a->cols, {a});
    for (std::size_t i = 0; i < out->size(); ++i) out->data[i] = a->data[i] * s;
    out->backward_fn = [s](Tensor& t) {
        Tensor& pa = *t.parents[0];
        if (!pa.requires_grad) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < t.size(); ++i) pa.grad[i] += s * t.grad[i];
    };
    return out;
}

void backward(const TensorPtr& output) {
    check(output, "backward");
    if (output->size() != 1) {
        throw ValidationError("backward: output must be scalar, got " + shape_str(*output));
    }
    // iterative post-order DFS; parents are visited in declaration order so
    // the traversal (and therefore accumulation order) is deterministic
    std::vector<Tensor*> order;
    std::vector<std::pair<Tensor*, std::size_t>> stack;
    std::unordered_set<Tensor*> visited;
    stack.emplace_back(output.get(), 0);
    visited.insert(output.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor* parent = node->parents[next].get();
            ++next;
            if (visited.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    output->ensure_grad();
    output->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Tensor* node = *it;
        if (node->requires_grad && node->backward_fn) node->backward_fn(*node);
    }
}

AdamOptimizer::AdamOptimizer(std::vector<TensorPtr> params)
    : AdamOptimizer(std::move(params), Config()) {}

AdamOptimizer::AdamOptimizer(std::vector<TensorPtr> params, Config cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        if (!p) throw ValidationError("adam: null parameter");
        if (!p->requires_grad) throw ValidationError("adam: parameter does not require grad");
        m_.emplace_back(p->size(), 0.0);
        v_.emplace_back(p->size(), 0.0);
    }
}

void AdamOptimizer::step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Tensor& p = *params_[k];
        if (p.grad.size() != p.data.size()) {
            throw ValidationError("adam: parameter " + std::to_string(k) +
                                  " has no gradient; run backward first");
        }
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double g = p.grad[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

void AdamOptimizer::zero_grad() {
    for (const auto& p : params_) p->zero_grad();
}

}  // namespace supreme::ag
