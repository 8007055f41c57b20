#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "supreme/dataset.hpp"
#include "supreme/losses.hpp"
#include "supreme/metrics.hpp"
#include "supreme/train.hpp"

namespace supreme {

// One reproducible run. Values come from a flat `key = value` config file
// (with '#' comments); command-line flags override file values.
struct RunConfig {
    std::filesystem::path source_path;
    std::filesystem::path target_path;
    std::filesystem::path out_dir = ".";
    std::filesystem::path checkpoint_path;  // default: <out_dir>/pretrained.sup1
    std::filesystem::path prior_path;       // default: <out_dir>/prior.pri1

    std::vector<std::size_t> encoder_widths = {32, 16};
    std::size_t factor_dim = 0;  // 0 = 4 * k_target
    double init_scale = 1.0;

    double alpha = 1.0;
    double tau = 0.5;
    LossWeights weights{4.0, 1.0, 4.0};
    std::string perturb;  // empty = the default relnoise:0.5+scale:0.8:1.2

    int epochs = 100;
    int batch_size = 16;
    double lr = 1e-3;
    std::uint64_t seed = 0;

    bool freeze_encoder = false;
    int refresh_prior_every = 0;
    int head_align_epochs = 60;
    Supervision supervision = Supervision::joint;
    bool confidence_diag_in_softmax = false;
    bool eval_labels = false;  // marks target labels as evaluation-only
    NmiNorm nmi_norm = NmiNorm::geometric;
    int kmeans_restarts = 10;

    SynthesisConfig synth;
    bool write_csv = false;

    std::filesystem::path default_checkpoint() const { return out_dir / "pretrained.sup1"; }
    std::filesystem::path default_prior() const { return out_dir / "prior.pri1"; }
    std::filesystem::path final_checkpoint() const { return out_dir / "final.sup1"; }
};

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values);
std::vector<std::size_t> parse_widths(const std::string& text);

// Stage entry points used by both the CLI and the bindings. They throw
// ValidationError for anything the user got wrong (exit code 2 at the CLI)
// and std::runtime_error for runtime failures (exit code 1).

struct PretrainOutput {
    std::filesystem::path checkpoint;
    std::filesystem::path log;
    double final_accuracy = 0.0;
};
PretrainOutput run_pretrain(const RunConfig& cfg);

struct InitOutput {
    std::filesystem::path prior;
    std::filesystem::path log;
    double inertia = 0.0;
    bool have_baseline = false;
    double baseline_acc = 0.0;
    double baseline_nmi = 0.0;
};
InitOutput run_init(const RunConfig& cfg);

struct TrainOutput {
    std::filesystem::path checkpoint;
    std::filesystem::path loss_log;
    std::filesystem::path metrics_log;  // empty unless eval labels were supplied
    bool have_metrics = false;
    double final_acc = 0.0;
    double final_nmi = 0.0;
};
TrainOutput run_train(const RunConfig& cfg);

struct EvalOutput {
    double acc = 0.0;
    double nmi = 0.0;
    ClusterEvaluation detail;
};
EvalOutput run_eval(const RunConfig& cfg);

struct SynthOutput {
    std::filesystem::path source;
    std::filesystem::path target;
    std::filesystem::path target_labelled;
};
SynthOutput run_synth(const RunConfig& cfg);

// Cluster assignments under the target head: argmax of p per sample.
std::vector<int> assign_clusters(const Matrix& assignments);

std::string format_float(double v);  // fixed %.12g used by every log

}  // namespace supreme
