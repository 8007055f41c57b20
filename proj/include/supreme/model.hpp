#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "supreme/autograd.hpp"
#include "supreme/dataset.hpp"
#include "supreme/matrix.hpp"

namespace supreme {

struct ModelConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> encoder_widths;  // empty = identity encoder
    std::size_t factor_dim = 0;               // shared factor space size D
    std::size_t k_source = 0;
    std::size_t k_target = 0;
    std::uint64_t seed = 0;
    double init_scale = 1.0;  // multiplier on the 1/sqrt(fan_in) init range

    std::size_t feature_dim() const {  // d_v
        return encoder_widths.empty() ? input_dim : encoder_widths.back();
    }
    void validate() const;
};

// Trainable head over fixed input embeddings: an MLP encoder producing the
// visual feature x_v, a sigmoid factor layer producing x_a in (0,1)^D, and
// two classifiers over the shared factor space (one per domain) whose
// softmax gives the assignment distribution p.
class HeadModel {
public:
    explicit HeadModel(const ModelConfig& cfg);

    struct Activations {
        ag::TensorPtr features;     // x_v, n x d_v
        ag::TensorPtr factors;      // x_a, n x D
        ag::TensorPtr assignments;  // p, rows sum to 1
    };

    Activations forward_target(const Matrix& batch) const;
    Activations forward_source(const Matrix& batch) const;

    // Value-only conveniences (no gradients kept by the caller).
    Matrix embed_target(const Matrix& batch) const;    // x_v
    Matrix predict_target(const Matrix& batch) const;  // p under the target head
    Matrix predict_source(const Matrix& batch) const;

    const ModelConfig& config() const { return cfg_; }
    const std::vector<ag::TensorPtr>& parameters() const { return params_; }
    std::vector<ag::TensorPtr> trainable_parameters(bool freeze_encoder) const;

    // Fits only the target head to reference assignments (soft cross-entropy
    // against `assignments`) with the trunk frozen, so joint training starts
    // from the prior's clustering instead of a random head.
    void align_target_head(const Matrix& batch_features, const Matrix& assignments, int epochs,
                           int batch_size, double lr, std::uint64_t seed);

    // SUP1 checkpoint: magic, config block, parameter tensors in declaration
    // order as little-endian f64. Round-trips bit-exactly.
    void save(const std::filesystem::path& path) const;
    static HeadModel load(const std::filesystem::path& path);

private:
    Activations forward(const Matrix& batch, bool source_head) const;

    ModelConfig cfg_;
    // declaration order: encoder (W, b per layer), factor (W, b),
    // source head (W, b), target head (W, b)
    std::vector<ag::TensorPtr> encoder_;
    std::vector<ag::TensorPtr> factor_;
    std::vector<ag::TensorPtr> source_head_;
    std::vector<ag::TensorPtr> target_head_;
    std::vector<ag::TensorPtr> params_;
};

struct PretrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_accuracy;

    double final_accuracy() const { return epoch_accuracy.empty() ? 0.0 : epoch_accuracy.back(); }
};

// Supervised pretraining on labelled source embeddings: cross-entropy plus
// lambda_attr times the binary factor regulariser.
PretrainReport pretrain(HeadModel& model, const EmbeddingDataset& source, int epochs,
                        int batch_size, double lr, double lambda_attr, std::uint64_t seed);

}  // namespace supreme
