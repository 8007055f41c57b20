#include "supreme/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "supreme/binio.hpp"
#include "supreme/error.hpp"
#include "supreme/losses.hpp"
#include "supreme/rng.hpp"

namespace supreme {

void ModelConfig::validate() const {
    if (input_dim == 0) throw ValidationError("model: input_dim must be positive");
    for (std::size_t w : encoder_widths) {
        if (w == 0) throw ValidationError("model: encoder widths must be positive");
    }
    if (factor_dim == 0) throw ValidationError("model: factor_dim must be positive");
    if (k_source == 0 || k_target == 0) throw ValidationError("model: class counts must be positive");
    if (factor_dim < k_target) {
        throw ValidationError("model: factor_dim (" + std::to_string(factor_dim) +
                              ") must be >= k_target (" + std::to_string(k_target) +
                              ") so the factor space can code every cluster");
    }
    if (init_scale <= 0.0) throw ValidationError("model: init_scale must be positive");
}

namespace {

ag::TensorPtr init_weight(std::size_t fan_in, std::size_t fan_out, double scale, Rng& rng) {
    const double s = scale / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> values(fan_in * fan_out);
    for (double& v : values) v = rng.uniform(-s, s);
    return ag::leaf(fan_in, fan_out, std::move(values), /*requires_grad=*/true);
}

ag::TensorPtr init_bias(std::size_t width) {
    return ag::leaf(1, width, std::vector<double>(width, 0.0), /*requires_grad=*/true);
}

}  // namespace

HeadModel::HeadModel(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    std::size_t in = cfg_.input_dim;
    for (std::size_t width : cfg_.encoder_widths) {
        encoder_.push_back(init_weight(in, width, cfg_.init_scale, rng));
        encoder_.push_back(init_bias(width));
        in = width;
    }
    factor_.push_back(init_weight(in, cfg_.factor_dim, cfg_.init_scale, rng));
    factor_.push_back(init_bias(cfg_.factor_dim));
    source_head_.push_back(init_weight(cfg_.factor_dim, cfg_.k_source, cfg_.init_scale, rng));
    source_head_.push_back(init_bias(cfg_.k_source));
    target_head_.push_back(init_weight(cfg_.factor_dim, cfg_.k_target, cfg_.init_scale, rng));
    target_head_.push_back(init_bias(cfg_.k_target));

    for (const auto* group : {&encoder_, &factor_, &source_head_, &target_head_}) {
        for (const auto& p : *group) params_.push_back(p);
    }
}

HeadModel::Activations HeadModel::forward(const Matrix& batch, bool source_head) const {
    if (batch.cols != cfg_.input_dim) {
        throw ValidationError("forward: batch has dimension " + std::to_string(batch.cols) +
                              ", model expects " + std::to_string(cfg_.input_dim));
    }
    ag::TensorPtr h = ag::constant(batch);
    for (std::size_t layer = 0; layer < cfg_.encoder_widths.size(); ++layer) {
        if (layer > 0) h = ag::relu(h);
        h = ag::add_rowvec(ag::matmul(h, encoder_[2 * layer]), encoder_[2 * layer + 1]);
    }
    Activations act;
    act.features = h;
    act.factors = ag::sigmoid(ag::add_rowvec(ag::matmul(h, factor_[0]), factor_[1]));
    const auto& head = source_head ? source_head_ : target_head_;
    act.assignments = ag::softmax_rows(ag::add_rowvec(ag::matmul(act.factors, head[0]), head[1]));
    return act;
}

HeadModel::Activations HeadModel::forward_target(const Matrix& batch) const {
    return forward(batch, /*source_head=*/false);
}

HeadModel::Activations HeadModel::forward_source(const Matrix& batch) const {
    return forward(batch, /*source_head=*/true);
}

Matrix HeadModel::embed_target(const Matrix& batch) const {
    return forward_target(batch).features->values();
}

Matrix HeadModel::predict_target(const Matrix& batch) const {
    return forward_target(batch).assignments->values();
}

Matrix HeadModel::predict_source(const Matrix& batch) const {
    return forward_source(batch).assignments->values();
}

std::vector<ag::TensorPtr> HeadModel::trainable_parameters(bool freeze_encoder) const {
    if (!freeze_encoder) return params_;
    std::vector<ag::TensorPtr> out;
    for (const auto* group : {&factor_, &source_head_, &target_head_}) {
        for (const auto& p : *group) out.push_back(p);
    }
    return out;
}

void HeadModel::align_target_head(const Matrix& batch_features, const Matrix& assignments,
                                  int epochs, int batch_size, double lr, std::uint64_t seed) {
    if (assignments.rows != batch_features.rows || assignments.cols != cfg_.k_target) {
        throw ValidationError("align_target_head: assignments must be n x k_target");
    }
    if (epochs < 0) throw ValidationError("align_target_head: epochs must be >= 0");
    // trunk is frozen here, so the factor activations can be cached once
    const Matrix factors = forward_target(batch_features).factors->values();
    ag::AdamOptimizer opt(target_head_);
    Rng shuffle_rng(derive_seed(seed, 0x6861)); // "ha"
    const std::size_t n = factors.rows;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(batch_size));
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
            auto fa = ag::constant(gather_rows(factors, idx));
            auto p = ag::softmax_rows(ag::add_rowvec(ag::matmul(fa, target_head_[0]),
                                                     target_head_[1]));
            auto target = ag::constant(gather_rows(assignments, idx));
            auto loss = ag::scale(ag::sum(ag::mul(target, ag::log_guarded(p))),
                                  -1.0 / static_cast<double>(idx.size()));
            ag::backward(loss);
            opt.step(lr);
            opt.zero_grad();
        }
    }
}

void HeadModel::save(const std::filesystem::path& path) const {
    BinaryWriter w(path);
    w.magic("SUP1");
    w.u32(static_cast<std::uint32_t>(cfg_.input_dim));
    w.u32(static_cast<std::uint32_t>(cfg_.encoder_widths.size()));
    for (std::size_t width : cfg_.encoder_widths) w.u32(static_cast<std::uint32_t>(width));
    w.u32(static_cast<std::uint32_t>(cfg_.factor_dim));
    w.u32(static_cast<std::uint32_t>(cfg_.k_source));
    w.u32(static_cast<std::uint32_t>(cfg_.k_target));
    w.u64(cfg_.seed);
    w.f64(cfg_.init_scale);
    for (const auto& p : params_) {
        for (double v : p->data) w.f64(v);
    }
    w.close();
}

HeadModel HeadModel::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ValidationError("checkpoint not found: " + path.string());
    }
    BinaryReader r(path);
    r.expect_magic("SUP1");
    ModelConfig cfg;
    cfg.input_dim = r.u32();
    const std::uint32_t layers = r.u32();
    cfg.encoder_widths.resize(layers);
    for (std::uint32_t i = 0; i < layers; ++i) cfg.encoder_widths[i] = r.u32();
    cfg.factor_dim = r.u32();
    cfg.k_source = r.u32();
    cfg.k_target = r.u32();
    cfg.seed = r.u64();
    cfg.init_scale = r.f64();
    HeadModel model(cfg);
    for (const auto& p : model.params_) {
        for (double& v : p->data) v = r.f64();
    }
    r.expect_eof();
    return model;
}

PretrainReport pretrain(HeadModel& model, const EmbeddingDataset& source, int epochs,
                        int batch_size, double lr, double lambda_attr, std::uint64_t seed) {
    if (source.domain != Domain::source || !source.labelled()) {
        throw ValidationError("pretrain requires a labelled source dataset");
    }
    source.validate();
    if (source.k != model.config().k_source) {
        throw ValidationError("pretrain: dataset has k=" + std::to_string(source.k) +
                              " but the model was built for k_source=" +
                              std::to_string(model.config().k_source));
    }
    if (epochs < 0) throw ValidationError("pretrain: epochs must be >= 0");
    if (batch_size < 1) throw ValidationError("pretrain: batch_size must be >= 1");
    if (!(lr > 0.0)) throw ValidationError("pretrain: lr must be positive");

    PretrainReport report;
    ag::AdamOptimizer opt(model.trainable_parameters(false));
    Rng shuffle_rng(derive_seed(seed, 0x7072)); // "pr"
    const std::size_t n = source.n();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(batch_size));
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
            Matrix batch = gather_rows(source.features, idx);
            std::vector<std::uint32_t> labels(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = source.labels[idx[i]];

            auto act = model.forward_source(batch);
            auto loss = ag::add(source_xent(act.assignments, labels),
                                ag::scale(binary_loss(act.factors), lambda_attr));
            ag::backward(loss);
            // the target head sees no source gradient; give it explicit zeros
            for (const auto& p : opt.params()) p->ensure_grad();
            opt.step(lr);
            opt.zero_grad();
            loss_sum += loss->scalar();
            ++steps;
        }
        report.epoch_loss.push_back(steps ? loss_sum / static_cast<double>(steps) : 0.0);

        const Matrix p = model.predict_source(source.features);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t arg = 0;
            for (std::size_t c = 1; c < p.cols; ++c) {
                if (p.at(i, c) > p.at(i, arg)) arg = c;
            }
            if (arg == source.labels[i]) ++correct;
        }
        report.epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
    }
    return report;
}

}  // namespace supreme
