// Command-line front end for the transfer-clustering pipeline:
//   supreme synth | pretrain | init | train | eval
// Exit codes: 0 success, 1 runtime failure, 2 validation failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "supreme/error.hpp"
#include "supreme/kmeans.hpp"
#include "supreme/pipeline.hpp"
#include "supreme/rng.hpp"

namespace {

using supreme::RunConfig;

struct StageFlags {
    std::optional<std::string> config;
    std::optional<std::string> source;
    std::optional<std::string> target;
    std::optional<std::string> out_dir;
    std::optional<std::string> checkpoint;
    std::optional<std::string> prior;
    std::optional<std::string> widths;
    std::optional<long> factor_dim;
    std::optional<double> init_scale;
    std::optional<double> alpha;
    std::optional<double> tau;
    std::optional<double> lambda_balance;
    std::optional<double> lambda_attr;
    std::optional<double> lambda_xent;
    std::optional<std::string> perturb;
    std::optional<int> epochs;
    std::optional<int> batch_size;
    std::optional<double> lr;
    std::optional<std::uint64_t> seed;
    bool freeze_encoder = false;
    std::optional<int> refresh_prior;
    std::optional<int> head_align;
    std::optional<std::string> supervision;
    bool conf_diag_in_softmax = false;
    bool eval_labels = false;
    std::optional<std::string> nmi_norm;
    std::optional<int> kmeans_restarts;
    // synth
    std::optional<long> dim;
    std::optional<long> k_source;
    std::optional<long> k_target;
    std::optional<long> per_class;
    std::optional<double> separation;
    std::optional<double> within_std;
    std::optional<double> shift;
    bool csv = false;
    bool contingency = false;
};

void add_common(CLI::App* cmd, StageFlags& f) {
    cmd->add_option("--config", f.config, "flat key = value config file; flags override");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seed", f.seed, "run seed");
}

void add_model_options(CLI::App* cmd, StageFlags& f) {
    cmd->add_option("--widths", f.widths, "encoder widths, comma separated (empty = identity)");
    cmd->add_option("--factor-dim", f.factor_dim, "factor space size D (0 = 4*k_target)");
    cmd->add_option("--init-scale", f.init_scale, "weight init scale multiplier");
}

void add_train_common(CLI::App* cmd, StageFlags& f) {
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
    cmd->add_option("--lr", f.lr, "Adam learning rate");
}

RunConfig build_config(const StageFlags& f) {
    RunConfig cfg;
    if (f.config) supreme::apply_config(cfg, supreme::parse_config_file(*f.config));
    if (f.source) cfg.source_path = *f.source;
    if (f.target) cfg.target_path = *f.target;
    if (f.out_dir) cfg.out_dir = *f.out_dir;
    if (f.checkpoint) cfg.checkpoint_path = *f.checkpoint;
    if (f.prior) cfg.prior_path = *f.prior;
    if (f.widths) cfg.encoder_widths = supreme::parse_widths(*f.widths);
    if (f.factor_dim) cfg.factor_dim = static_cast<std::size_t>(*f.factor_dim);
    if (f.init_scale) cfg.init_scale = *f.init_scale;
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.tau) cfg.tau = *f.tau;
    if (f.lambda_balance) cfg.weights.balance = *f.lambda_balance;
    if (f.lambda_attr) cfg.weights.attr = *f.lambda_attr;
    if (f.lambda_xent) cfg.weights.xent = *f.lambda_xent;
    if (f.perturb) cfg.perturb = *f.perturb;
    if (f.epochs) cfg.epochs = *f.epochs;
    if (f.batch_size) cfg.batch_size = *f.batch_size;
    if (f.lr) cfg.lr = *f.lr;
    if (f.seed) cfg.seed = *f.seed;
    if (f.freeze_encoder) cfg.freeze_encoder = true;
    if (f.refresh_prior) cfg.refresh_prior_every = *f.refresh_prior;
    if (f.head_align) cfg.head_align_epochs = *f.head_align;
    if (f.supervision) cfg.supervision = supreme::parse_supervision(*f.supervision);
    if (f.conf_diag_in_softmax) cfg.confidence_diag_in_softmax = true;
    if (f.eval_labels) cfg.eval_labels = true;
    if (f.nmi_norm) cfg.nmi_norm = supreme::parse_nmi_norm(*f.nmi_norm);
    if (f.kmeans_restarts) cfg.kmeans_restarts = *f.kmeans_restarts;
    if (f.dim) cfg.synth.dim = static_cast<std::size_t>(*f.dim);
    if (f.k_source) cfg.synth.k_source = static_cast<std::size_t>(*f.k_source);
    if (f.k_target) cfg.synth.k_target = static_cast<std::size_t>(*f.k_target);
    if (f.per_class) cfg.synth.per_class = static_cast<std::size_t>(*f.per_class);
    if (f.separation) cfg.synth.separation = *f.separation;
    if (f.within_std) cfg.synth.within_std = *f.within_std;
    if (f.shift) cfg.synth.domain_shift = *f.shift;
    if (f.seed) cfg.synth.seed = *f.seed;
    if (f.csv) cfg.write_csv = true;
    return cfg;
}

// Manual spot checks of the reference oracles against the production paths.
int run_oracle_checks() {
    supreme::Rng rng(20240801);
    int failures = 0;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("%s  %s (%s)\n", ok ? "ok  " : "FAIL", name, detail.c_str());
        if (!ok) ++failures;
    };

    {  // matching enumeration vs hungarian
        bool ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t k = 2 + rng.below(5);
            supreme::Matrix cost(k, k);
            for (double& v : cost.data) v = rng.uniform(0.0, 10.0);
            const double brute = supreme::oracle::brute_force_assignment_cost(cost);
            const double fast = supreme::hungarian(cost).cost;
            if (std::abs(brute - fast) > 1e-9) ok = false;
        }
        report("hungarian vs factorial enumeration", ok, "20 random instances, k in [2,6]");
    }
    {  // finite differences vs backward on a tiny quadratic
        auto x = supreme::ag::leaf(1, 3, {1.5, -2.0, 0.5}, true);
        auto loss = [&]() {
            auto v = supreme::ag::sum(supreme::ag::mul(
                supreme::ag::leaf(1, 3, x->data, false), supreme::ag::leaf(1, 3, x->data, false)));
            return v->scalar();
        };
        const auto fd = supreme::oracle::finite_difference_grad(loss, {x}, 1e-5);
        auto out = supreme::ag::sum(supreme::ag::mul(x, x));
        supreme::ag::backward(out);
        const auto an = supreme::oracle::collect_grads({x});
        const double err = supreme::oracle::gradient_error(an, fd);
        report("finite differences vs backward", err < 1e-6, "sum(x^2), err " +
                                                                 supreme::format_float(err));
    }
    {  // exhaustive k-means vs Lloyd's
        bool ok = true;
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 4 + rng.below(5);
            supreme::Matrix pts(n, 2);
            for (double& v : pts.data) v = rng.uniform(-5.0, 5.0);
            const double opt = supreme::oracle::exhaustive_kmeans_inertia(pts, 2);
            const double lloyd = supreme::kmeans(pts, 2, rng.next_u64(), 10).inertia;
            if (lloyd < opt - 1e-9 || lloyd > opt + 1e-6) ok = false;
        }
        report("Lloyd's (10 restarts) vs exhaustive optimum", ok, "10 random instances, k=2");
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transfer clustering with confidence-weighted constraints and "
                 "perturbation self-supervision"};
    app.require_subcommand(0, 1);
    bool oracle_mode = false;
    app.add_flag("--oracle", oracle_mode, "run reference-oracle spot checks and exit");

    StageFlags synth_f, pre_f, init_f, train_f, eval_f;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic source/target pair");
    add_common(synth, synth_f);
    synth->add_option("--dim", synth_f.dim, "embedding dimension");
    synth->add_option("--k-source", synth_f.k_source, "source class count");
    synth->add_option("--k-target", synth_f.k_target, "target class count");
    synth->add_option("--per-class", synth_f.per_class, "samples per class");
    synth->add_option("--separation", synth_f.separation, "pairwise class-mean distance");
    synth->add_option("--within-std", synth_f.within_std, "within-class standard deviation");
    synth->add_option("--shift", synth_f.shift, "domain shift magnitude");
    synth->add_flag("--csv", synth_f.csv, "also export CSV files for inspection");

    CLI::App* pre = app.add_subcommand("pretrain", "supervised pretraining on the source domain");
    add_common(pre, pre_f);
    pre->add_option("--source", pre_f.source, "labelled source dataset (EMB1)");
    pre->add_option("--target", pre_f.target, "target dataset (EMB1), read for shape only");
    pre->add_option("--checkpoint", pre_f.checkpoint, "checkpoint path to write");
    add_model_options(pre, pre_f);
    add_train_common(pre, pre_f);
    pre->add_option("--lambda-attr", pre_f.lambda_attr, "binary regulariser weight");

    CLI::App* init = app.add_subcommand("init", "k-means prior from the pretrained embedding");
    add_common(init, init_f);
    init->add_option("--target", init_f.target, "target dataset (EMB1)");
    init->add_option("--checkpoint", init_f.checkpoint, "pretrained checkpoint to read");
    init->add_option("--prior", init_f.prior, "prior cache path to write");
    init->add_option("--alpha", init_f.alpha, "t-distribution freedom parameter");
    init->add_option("--tau", init_f.tau, "confidence temperature stored with the prior");
    init->add_option("--kmeans-restarts", init_f.kmeans_restarts, "k-means restarts");
    init->add_flag("--eval-labels", init_f.eval_labels,
                   "labels in the target file are evaluation-only; log the k-means baseline");
    init->add_option("--nmi-norm", init_f.nmi_norm, "nmi normalisation (geometric|arithmetic|max)");

    CLI::App* train = app.add_subcommand("train", "joint training on transferred constraints and "
                                                  "self-supervision");
    add_common(train, train_f);
    train->add_option("--source", train_f.source, "labelled source dataset (EMB1)");
    train->add_option("--target", train_f.target, "unlabelled target dataset (EMB1)");
    train->add_option("--checkpoint", train_f.checkpoint, "pretrained checkpoint to read");
    train->add_option("--prior", train_f.prior, "prior cache to read");
    add_train_common(train, train_f);
    train->add_option("--tau", train_f.tau, "confidence temperature");
    train->add_option("--alpha", train_f.alpha, "t-distribution freedom (for prior refresh)");
    train->add_option("--lambda-balance", train_f.lambda_balance, "balance regulariser weight");
    train->add_option("--lambda-attr", train_f.lambda_attr, "binary regulariser weight");
    train->add_option("--lambda-xent", train_f.lambda_xent, "source cross-entropy weight");
    train->add_option("--perturb", train_f.perturb,
                      "perturbation spec, e.g. noise:0.1+scale:0.8:1.2");
    train->add_flag("--freeze-encoder", train_f.freeze_encoder,
                    "keep encoder weights fixed during joint training");
    train->add_option("--refresh-prior", train_f.refresh_prior,
                      "recompute the prior every N epochs (0 = frozen)");
    train->add_option("--head-align", train_f.head_align,
                      "target-head warm-up epochs on the prior before training (0 disables)");
    train->add_option("--supervision", train_f.supervision,
                      "supervision mode: joint|transfer|self");
    train->add_flag("--conf-diag-in-softmax", train_f.conf_diag_in_softmax,
                    "include diagonal pairs in the confidence softmax before the override");
    train->add_flag("--eval-labels", train_f.eval_labels,
                    "accept a labelled target file; labels are used for per-epoch metrics only");
    train->add_option("--nmi-norm", train_f.nmi_norm, "nmi normalisation (geometric|arithmetic|max)");
    train->add_option("--kmeans-restarts", train_f.kmeans_restarts,
                      "restarts when the prior is refreshed");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint against labelled data");
    add_common(eval, eval_f);
    eval->add_option("--target", eval_f.target, "labelled target dataset (EMB1)");
    eval->add_option("--checkpoint", eval_f.checkpoint, "checkpoint to evaluate");
    eval->add_option("--nmi-norm", eval_f.nmi_norm, "nmi normalisation (geometric|arithmetic|max)");
    eval->add_flag("--contingency", eval_f.contingency, "also print the contingency table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (oracle_mode) return run_oracle_checks();
        if (synth->parsed()) {
            const auto out = supreme::run_synth(build_config(synth_f));
            std::cout << "wrote " << out.source.string() << ", " << out.target.string() << ", "
                      << out.target_labelled.string() << "\n";
        } else if (pre->parsed()) {
            const auto out = supreme::run_pretrain(build_config(pre_f));
            std::cout << "checkpoint " << out.checkpoint.string() << " source_accuracy "
                      << supreme::format_float(out.final_accuracy) << "\n";
        } else if (init->parsed()) {
            const auto out = supreme::run_init(build_config(init_f));
            std::cout << "prior " << out.prior.string() << " inertia "
                      << supreme::format_float(out.inertia);
            if (out.have_baseline) {
                std::cout << " baseline_acc " << supreme::format_float(out.baseline_acc);
            }
            std::cout << "\n";
        } else if (train->parsed()) {
            const auto out = supreme::run_train(build_config(train_f));
            std::cout << "checkpoint " << out.checkpoint.string();
            if (out.have_metrics) {
                std::cout << " acc " << supreme::format_float(out.final_acc) << " nmi "
                          << supreme::format_float(out.final_nmi);
            }
            std::cout << "\n";
        } else if (eval->parsed()) {
            const auto out = supreme::run_eval(build_config(eval_f));
            std::printf("%.6f,%.6f\n", out.acc, out.nmi);
            if (eval_f.contingency) {
                for (const auto& row : out.detail.contingency) {
                    for (std::size_t j = 0; j < row.size(); ++j) {
                        std::printf("%s%ld", j ? "," : "", row[j]);
                    }
                    std::printf("\n");
                }
            }
        } else {
            std::cerr << app.help() << "\n";
            return 2;
        }
    } catch (const supreme::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
