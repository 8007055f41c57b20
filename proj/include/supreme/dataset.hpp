#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "supreme/matrix.hpp"

namespace supreme {

enum class Domain : std::uint8_t { source = 0, target = 1 };

// A set of fixed feature vectors with an optional label column. Feature
// values are f32-representable: files store them as little-endian f32 and
// generation rounds accordingly, so write/read round-trips are bit-exact.
// Target labels, when present, exist for evaluation only; training entry
// points accept plain feature matrices and never see them.
struct EmbeddingDataset {
    Matrix features;                     // n x d
    std::vector<std::uint32_t> labels;   // empty when unlabelled
    std::uint32_t k = 0;                 // declared class / cluster count
    Domain domain = Domain::source;

    std::size_t n() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
    bool labelled() const { return !labels.empty(); }
    void validate() const;
};

// EMB1 layout: magic "EMB1"; u32 n, u32 d, u32 k; u8 domain; u8 has-labels;
// n*d f32 features row-major; then n u32 labels when labelled. All values
// little-endian.
void write_dataset(const EmbeddingDataset& ds, const std::filesystem::path& path);
EmbeddingDataset read_dataset(const std::filesystem::path& path);
void write_dataset_csv(const EmbeddingDataset& ds, const std::filesystem::path& path);

struct SynthesisConfig {
    std::size_t dim = 16;
    std::size_t k_source = 4;
    std::size_t k_target = 4;
    std::size_t per_class = 200;
    double separation = 6.0;    // pairwise distance between class means
    double within_std = 1.0;    // isotropic within-class std
    double domain_shift = 0.0;  // per-class offset magnitude applied to target means
    std::uint64_t seed = 0;

    void validate() const;
};

struct TransferPair {
    EmbeddingDataset source;             // labelled
    EmbeddingDataset target;             // unlabelled
    std::vector<std::uint32_t> target_labels;  // held out for evaluation
    Matrix source_means;                 // k_source x dim (diagnostics)
    Matrix target_means;                 // k_target x dim
};

// Deterministic two-domain benchmark generator. Class means sit on a scaled
// orthonormal frame so the configured separation is exact; target means are
// the source means offset by domain_shift along per-class random directions.
TransferPair synthesize_transfer_pair(const SynthesisConfig& cfg);

EmbeddingDataset with_labels(EmbeddingDataset ds, std::vector<std::uint32_t> labels);

}  // namespace supreme
