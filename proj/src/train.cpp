#include "supreme/train.hpp"

#include <algorithm>
#include <string>

#include "supreme/error.hpp"
#include "supreme/rng.hpp"

namespace supreme {

Supervision parse_supervision(const std::string& name) {
    if (name == "joint") return Supervision::joint;
    if (name == "transfer") return Supervision::transfer_only;
    if (name == "self") return Supervision::self_only;
    throw ValidationError("unknown supervision mode '" + name + "' (use joint, transfer or self)");
}

std::string supervision_name(Supervision mode) {
    switch (mode) {
        case Supervision::joint: return "joint";
        case Supervision::transfer_only: return "transfer";
        case Supervision::self_only: return "self";
    }
    return "joint";
}

void TrainOptions::validate() const {
    weights.validate();
    if (!(tau > 0.0)) throw ValidationError("train: tau must be positive");
    if (!(alpha > 0.0)) throw ValidationError("train: alpha must be positive");
    if (epochs < 0) throw ValidationError("train: epochs must be >= 0");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (!(lr > 0.0)) throw ValidationError("train: lr must be positive");
    if (refresh_prior_every < 0) throw ValidationError("train: refresh interval must be >= 0");
    if (head_align_epochs < 0) throw ValidationError("train: head_align must be >= 0");
    if (kmeans_restarts < 1) throw ValidationError("train: kmeans_restarts must be >= 1");
}

namespace {

// Endless shuffled index stream over [0, n).
class IndexStream {
public:
    IndexStream(std::size_t n, std::uint64_t seed) : rng_(seed), order_(n) {
        for (std::size_t i = 0; i < n; ++i) order_[i] = i;
        rng_.shuffle(order_);
    }

    std::size_t next() {
        if (pos_ == order_.size()) {
            rng_.shuffle(order_);
            pos_ = 0;
        }
        return order_[pos_++];
    }

private:
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
};

}  // namespace

TrainReport train_joint(HeadModel& model, TransferPrior& prior, const Matrix& target_features,
                        const EmbeddingDataset& source, const TrainOptions& opts,
                        const EpochCallback& on_epoch) {
    opts.validate();
    if (source.domain != Domain::source || !source.labelled()) {
        throw ValidationError("train: a labelled source dataset is required");
    }
    if (source.dim() != target_features.cols) {
        throw ValidationError("train: source dimension " + std::to_string(source.dim()) +
                              " != target dimension " + std::to_string(target_features.cols));
    }
    if (prior.assignments.rows != target_features.rows) {
        throw ValidationError("train: prior covers " + std::to_string(prior.assignments.rows) +
                              " samples, target has " + std::to_string(target_features.rows));
    }
    if (prior.k() != model.config().k_target) {
        throw ValidationError("train: prior has k=" + std::to_string(prior.k()) +
                              " but the model expects k_target=" +
                              std::to_string(model.config().k_target));
    }
    opts.perturb.validate(target_features.cols);

    const std::size_t n = target_features.rows;
    const std::size_t batch = static_cast<std::size_t>(opts.batch_size);

    ag::AdamOptimizer opt(model.trainable_parameters(opts.freeze_encoder));
    Rng shuffle_rng(derive_seed(opts.seed, 0x7467));       // "tg"
    Rng perturb_rng(derive_seed(opts.seed, 0x706 - 1));    // perturbation stream
    IndexStream source_stream(source.n(), derive_seed(opts.seed, 0x7372));  // "sr"

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    // start from the prior's clustering rather than a random target head;
    // hard targets give the sharp start the pairwise sums expect
    if (opts.epochs > 0 && opts.head_align_epochs > 0) {
        Matrix hard(prior.assignments.rows, prior.assignments.cols, 0.0);
        for (std::size_t i = 0; i < hard.rows; ++i) {
            std::size_t arg = 0;
            for (std::size_t c = 1; c < hard.cols; ++c) {
                if (prior.assignments.at(i, c) > prior.assignments.at(i, arg)) arg = c;
            }
            hard.at(i, arg) = 1.0;
        }
        model.align_target_head(target_features, hard, opts.head_align_epochs, opts.batch_size,
                                opts.lr, opts.seed);
    }

    TrainReport report;
    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        if (opts.refresh_prior_every > 0 && epoch > 1 &&
            (epoch - 1) % opts.refresh_prior_every == 0) {
            const Matrix embedded = model.embed_target(target_features);
            PriorBuild rebuilt =
                build_prior(embedded, prior.k(), opts.alpha, opts.tau,
                            derive_seed(opts.seed, 0xA000 + static_cast<std::uint64_t>(epoch)),
                            opts.kmeans_restarts);
            prior = std::move(rebuilt.prior);
        }

        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
            const std::size_t b = idx.size();

            const Matrix prior_rows = gather_rows(prior.assignments, idx);
            Matrix constraints = pair_constraints(prior_rows);
            Matrix confidence =
                confidence_weights(prior_rows, opts.tau, opts.confidence_diag_in_softmax).weights;

            Matrix target_batch = gather_rows(target_features, idx);
            bool perturbed_side = true;
            switch (opts.supervision) {
                case Supervision::joint:
                    for (std::size_t i = 0; i < b; ++i) constraints.at(i, i) = 1.0;
                    break;
                case Supervision::transfer_only:
                    // no self pairs, no perturbed copies
                    for (std::size_t i = 0; i < b; ++i) confidence.at(i, i) = 0.0;
                    perturbed_side = false;
                    break;
                case Supervision::self_only:
                    for (std::size_t i = 0; i < b; ++i) {
                        for (std::size_t j = 0; j < b; ++j) {
                            confidence.at(i, j) = (i == j) ? 1.0 : 0.0;
                        }
                        constraints.at(i, i) = 1.0;
                    }
                    break;
            }

            std::vector<std::size_t> source_idx(b);
            for (std::size_t i = 0; i < b; ++i) source_idx[i] = source_stream.next();
            const Matrix source_batch = gather_rows(source.features, source_idx);
            std::vector<std::uint32_t> source_labels(b);
            for (std::size_t i = 0; i < b; ++i) source_labels[i] = source.labels[source_idx[i]];

            auto act = model.forward_target(target_batch);
            HeadModel::Activations act_g = act;
            if (perturbed_side && !opts.perturb.identity()) {
                act_g = model.forward_target(opts.perturb.apply(target_batch, perturb_rng));
            }
            auto act_s = model.forward_source(source_batch);

            auto l_clu = clustering_loss(act.assignments, act_g.assignments, constraints, confidence);
            auto l_bal = balance_loss(act.assignments);
            // binary regulariser over the factor rows of both domains
            const double nt = static_cast<double>(b);
            const double ns = static_cast<double>(b);
            auto l_attr = ag::add(ag::scale(binary_loss(act.factors), nt / (nt + ns)),
                                  ag::scale(binary_loss(act_s.factors), ns / (nt + ns)));
            auto l_xent = source_xent(act_s.assignments, source_labels);

            TotalLoss total = total_loss(l_clu, l_bal, l_attr, l_xent, opts.weights, b);
            ag::backward(total.value);
            opt.step(opts.lr);
            opt.zero_grad();
            report.steps.push_back(total.report);
        }
        if (on_epoch) on_epoch(epoch, model);
    }
    return report;
}

}  // namespace supreme
