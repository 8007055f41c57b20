#include "supreme/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "supreme/binio.hpp"
#include "supreme/error.hpp"
#include "supreme/rng.hpp"

namespace supreme {

void EmbeddingDataset::validate() const {
    if (features.data.size() != features.rows * features.cols) {
        throw ValidationError("dataset: feature buffer size mismatch");
    }
    if (labelled() && labels.size() != n()) {
        throw ValidationError("dataset: " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(n()) + " samples");
    }
    for (std::uint32_t y : labels) {
        if (y >= k) {
            throw ValidationError("dataset: label " + std::to_string(y) + " >= k=" +
                                  std::to_string(k));
        }
    }
    for (double v : features.data) {
        if (!std::isfinite(v)) throw ValidationError("dataset: non-finite feature value");
    }
}

void write_dataset(const EmbeddingDataset& ds, const std::filesystem::path& path) {
    ds.validate();
    BinaryWriter w(path);
    w.magic("EMB1");
    w.u32(static_cast<std::uint32_t>(ds.n()));
    w.u32(static_cast<std::uint32_t>(ds.dim()));
    w.u32(ds.k);
    w.u8(static_cast<std::uint8_t>(ds.domain));
    w.u8(ds.labelled() ? 1 : 0);
    for (double v : ds.features.data) w.f32(static_cast<float>(v));
    for (std::uint32_t y : ds.labels) w.u32(y);
    w.close();
}

EmbeddingDataset read_dataset(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ValidationError("dataset not found: " + path.string());
    }
    BinaryReader r(path);
    r.expect_magic("EMB1");
    const std::uint32_t n = r.u32();
    const std::uint32_t d = r.u32();
    const std::uint32_t k = r.u32();
    const std::uint8_t domain = r.u8();
    if (domain > 1) {
        throw ValidationError("invalid domain flag " + std::to_string(domain) + " in " +
                              path.string() + " at offset " + std::to_string(r.offset() - 2));
    }
    const std::uint8_t has_labels = r.u8();
    if (has_labels > 1) {
        throw ValidationError("invalid label flag " + std::to_string(has_labels) + " in " +
                              path.string() + " at offset " + std::to_string(r.offset() - 1));
    }
    EmbeddingDataset ds;
    ds.k = k;
    ds.domain = static_cast<Domain>(domain);
    ds.features = Matrix(n, d);
    for (std::size_t i = 0; i < ds.features.size(); ++i) {
        const std::uint64_t off = r.offset();
        const float v = r.f32();
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite feature in " + path.string() + " at offset " +
                                  std::to_string(off));
        }
        ds.features.data[i] = static_cast<double>(v);
    }
    if (has_labels == 1) {
        ds.labels.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::uint64_t off = r.offset();
            ds.labels[i] = r.u32();
            if (ds.labels[i] >= k) {
                throw ValidationError("label " + std::to_string(ds.labels[i]) + " >= k=" +
                                      std::to_string(k) + " in " + path.string() + " at offset " +
                                      std::to_string(off));
            }
        }
    }
    r.expect_eof();
    return ds;
}

void write_dataset_csv(const EmbeddingDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open file for writing: " + path.string());
    for (std::size_t j = 0; j < ds.dim(); ++j) {
        out << (j ? ",f" : "f") << j;
    }
    if (ds.labelled()) out << ",label";
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.9g", ds.features.at(i, j));
            if (j) out << ",";
            out << buf;
        }
        if (ds.labelled()) out << "," << ds.labels[i];
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void SynthesisConfig::validate() const {
    if (dim == 0) throw ValidationError("synthesis: dim must be positive");
    if (k_source == 0 || k_target == 0) throw ValidationError("synthesis: class counts must be positive");
    if (per_class == 0) throw ValidationError("synthesis: per_class must be positive");
    if (within_std <= 0.0) throw ValidationError("synthesis: within_std must be positive");
    if (separation < 0.0) throw ValidationError("synthesis: separation must be non-negative");
    if (domain_shift < 0.0) throw ValidationError("synthesis: domain_shift must be non-negative");
    const std::size_t k_all = std::max(k_source, k_target);
    if (k_all > dim) {
        throw ValidationError("synthesis: need dim >= max class count to place orthogonal means (" +
                              std::to_string(k_all) + " > " + std::to_string(dim) + ")");
    }
}

namespace {

double round_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Random orthonormal frame of `count` vectors in R^dim via Gram-Schmidt on
// Gaussian draws.
Matrix orthonormal_frame(std::size_t count, std::size_t dim, Rng& rng) {
    Matrix frame(count, dim);
    for (std::size_t i = 0; i < count; ++i) {
        while (true) {
            for (std::size_t j = 0; j < dim; ++j) frame.at(i, j) = rng.normal();
            for (std::size_t prev = 0; prev < i; ++prev) {
                double dot = 0.0;
                for (std::size_t j = 0; j < dim; ++j) dot += frame.at(i, j) * frame.at(prev, j);
                for (std::size_t j = 0; j < dim; ++j) frame.at(i, j) -= dot * frame.at(prev, j);
            }
            double norm2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) norm2 += frame.at(i, j) * frame.at(i, j);
            if (norm2 > 1e-12) {
                const double inv = 1.0 / std::sqrt(norm2);
                for (std::size_t j = 0; j < dim; ++j) frame.at(i, j) *= inv;
                break;
            }
        }
    }
    return frame;
}

EmbeddingDataset sample_classes(const Matrix& means, std::size_t per_class, double std_dev,
                                Domain domain, bool keep_labels, Rng& rng,
                                std::vector<std::uint32_t>* labels_out) {
    const std::size_t k = means.rows;
    const std::size_t d = means.cols;
    EmbeddingDataset ds;
    ds.k = static_cast<std::uint32_t>(k);
    ds.domain = domain;
    ds.features = Matrix(k * per_class, d);
    std::vector<std::uint32_t> labels(k * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            for (std::size_t j = 0; j < d; ++j) {
                ds.features.at(row, j) = round_f32(means.at(c, j) + std_dev * rng.normal());
            }
            labels[row] = static_cast<std::uint32_t>(c);
        }
    }
    if (labels_out) *labels_out = labels;
    if (keep_labels) ds.labels = std::move(labels);
    return ds;
}

}  // namespace

TransferPair synthesize_transfer_pair(const SynthesisConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t k_all = std::max(cfg.k_source, cfg.k_target);

    const Matrix frame = orthonormal_frame(k_all, cfg.dim, rng);
    // orthonormal directions scaled so pairwise mean distance == separation
    const double radius = cfg.separation / std::sqrt(2.0);
    Matrix base_means(k_all, cfg.dim);
    for (std::size_t c = 0; c < k_all; ++c) {
        for (std::size_t j = 0; j < cfg.dim; ++j) base_means.at(c, j) = radius * frame.at(c, j);
    }

    // per-class unit shift directions, drawn even when shift is 0 so that
    // changing only the magnitude keeps everything else identical
    Matrix shift_dirs(k_all, cfg.dim);
    for (std::size_t c = 0; c < k_all; ++c) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (std::size_t j = 0; j < cfg.dim; ++j) {
                shift_dirs.at(c, j) = rng.normal();
                norm2 += shift_dirs.at(c, j) * shift_dirs.at(c, j);
            }
        } while (norm2 <= 1e-12);
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t j = 0; j < cfg.dim; ++j) shift_dirs.at(c, j) *= inv;
    }

    TransferPair pair;
    pair.source_means = Matrix(cfg.k_source, cfg.dim);
    for (std::size_t c = 0; c < cfg.k_source; ++c) {
        for (std::size_t j = 0; j < cfg.dim; ++j) pair.source_means.at(c, j) = base_means.at(c, j);
    }
    pair.target_means = Matrix(cfg.k_target, cfg.dim);
    for (std::size_t c = 0; c < cfg.k_target; ++c) {
        for (std::size_t j = 0; j < cfg.dim; ++j) {
            pair.target_means.at(c, j) =
                base_means.at(c, j) + cfg.domain_shift * shift_dirs.at(c, j);
        }
    }

    pair.source = sample_classes(pair.source_means, cfg.per_class, cfg.within_std, Domain::source,
                                 /*keep_labels=*/true, rng, nullptr);
    pair.target = sample_classes(pair.target_means, cfg.per_class, cfg.within_std, Domain::target,
                                 /*keep_labels=*/false, rng, &pair.target_labels);
    return pair;
}

EmbeddingDataset with_labels(EmbeddingDataset ds, std::vector<std::uint32_t> labels) {
    ds.labels = std::move(labels);
    ds.validate();
    return ds;
}

}  // namespace supreme
