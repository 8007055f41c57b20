#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "supreme/dataset.hpp"
#include "supreme/losses.hpp"
#include "supreme/model.hpp"
#include "supreme/perturb.hpp"
#include "supreme/prior.hpp"

namespace supreme {

// Which pairwise supervision feeds the clustering loss.
//   joint:         transferred constraints plus perturbation self-pairs
//   transfer_only: transferred constraints, no perturbed copies, no self-pairs
//   self_only:     perturbation self-pairs alone
enum class Supervision { joint, transfer_only, self_only };

Supervision parse_supervision(const std::string& name);
std::string supervision_name(Supervision mode);

struct TrainOptions {
    // The clustering term is a batch sum (self pairs at weight 1 each) while
    // the regularisers are batch means, so workable weights sit well above 1.
    LossWeights weights{4.0, 1.0, 4.0};
    double tau = 0.5;
    double alpha = 1.0;  // used when the prior is refreshed
    Perturbation perturb;
    int epochs = 100;
    int batch_size = 16;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    bool freeze_encoder = false;
    int refresh_prior_every = 0;  // epochs; 0 = the prior stays frozen
    int head_align_epochs = 60;   // target-head warm-up on the prior; 0 disables
    Supervision supervision = Supervision::joint;
    bool confidence_diag_in_softmax = false;
    int kmeans_restarts = 10;

    void validate() const;
};

struct TrainReport {
    std::vector<LossReport> steps;
};

using EpochCallback = std::function<void(int epoch, const HeadModel& model)>;

// One joint optimisation run. Target samples arrive as a bare feature
// matrix: labels have no path into training. Each step draws one target
// mini-batch and an equally sized source mini-batch, slices the frozen
// prior rows for the batch, and takes one Adam step on the weighted total.
TrainReport train_joint(HeadModel& model, TransferPrior& prior, const Matrix& target_features,
                        const EmbeddingDataset& source, const TrainOptions& opts,
                        const EpochCallback& on_epoch = {});

}  // namespace supreme
