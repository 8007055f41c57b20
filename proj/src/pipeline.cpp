#include "supreme/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "supreme/error.hpp"
#include "supreme/rng.hpp"

namespace supreme {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ValidationError("config: cannot parse number for '" + key + "': '" + v + "'");
    }
}

long to_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long l = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return l;
    } catch (const std::exception&) {
        throw ValidationError("config: cannot parse integer for '" + key + "': '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ValidationError("config: cannot parse integer for '" + key + "': '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("config: cannot parse boolean for '" + key + "': '" + v + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

EmbeddingDataset load_expected(const std::filesystem::path& path, const char* what) {
    if (path.empty()) throw ValidationError(std::string(what) + " dataset path is not set");
    return read_dataset(path);
}

}  // namespace

std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<std::size_t> parse_widths(const std::string& text) {
    std::vector<std::size_t> widths;
    if (trim(text).empty() || trim(text) == "none") return widths;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const long v = to_long(trim(item), "encoder_widths");
        if (v <= 0) throw ValidationError("config: encoder widths must be positive");
        widths.push_back(static_cast<std::size_t>(v));
    }
    return widths;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config file not found: " + path.string());
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config: expected 'key = value' at " + path.string() + ":" +
                                  std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ValidationError("config: empty key at " + path.string() + ":" +
                                  std::to_string(lineno));
        }
        values[key] = value;
    }
    return values;
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        if (key == "source") cfg.source_path = value;
        else if (key == "target") cfg.target_path = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "checkpoint") cfg.checkpoint_path = value;
        else if (key == "prior") cfg.prior_path = value;
        else if (key == "encoder_widths") cfg.encoder_widths = parse_widths(value);
        else if (key == "factor_dim") cfg.factor_dim = static_cast<std::size_t>(to_long(value, key));
        else if (key == "init_scale") cfg.init_scale = to_double(value, key);
        else if (key == "alpha") cfg.alpha = to_double(value, key);
        else if (key == "tau") cfg.tau = to_double(value, key);
        else if (key == "lambda_balance") cfg.weights.balance = to_double(value, key);
        else if (key == "lambda_attr") cfg.weights.attr = to_double(value, key);
        else if (key == "lambda_xent") cfg.weights.xent = to_double(value, key);
        else if (key == "perturb") cfg.perturb = value;
        else if (key == "epochs") cfg.epochs = static_cast<int>(to_long(value, key));
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(to_long(value, key));
        else if (key == "lr") cfg.lr = to_double(value, key);
        else if (key == "seed") cfg.seed = to_u64(value, key);
        else if (key == "freeze_encoder") cfg.freeze_encoder = to_bool(value, key);
        else if (key == "refresh_prior") cfg.refresh_prior_every = static_cast<int>(to_long(value, key));
        else if (key == "head_align") cfg.head_align_epochs = static_cast<int>(to_long(value, key));
        else if (key == "supervision") cfg.supervision = parse_supervision(value);
        else if (key == "conf_diag_in_softmax") cfg.confidence_diag_in_softmax = to_bool(value, key);
        else if (key == "eval_labels") cfg.eval_labels = to_bool(value, key);
        else if (key == "nmi_norm") cfg.nmi_norm = parse_nmi_norm(value);
        else if (key == "kmeans_restarts") cfg.kmeans_restarts = static_cast<int>(to_long(value, key));
        else if (key == "synth_dim") cfg.synth.dim = static_cast<std::size_t>(to_long(value, key));
        else if (key == "synth_k_source") cfg.synth.k_source = static_cast<std::size_t>(to_long(value, key));
        else if (key == "synth_k_target") cfg.synth.k_target = static_cast<std::size_t>(to_long(value, key));
        else if (key == "synth_per_class") cfg.synth.per_class = static_cast<std::size_t>(to_long(value, key));
        else if (key == "synth_separation") cfg.synth.separation = to_double(value, key);
        else if (key == "synth_within_std") cfg.synth.within_std = to_double(value, key);
        else if (key == "synth_shift") cfg.synth.domain_shift = to_double(value, key);
        else if (key == "synth_seed") cfg.synth.seed = to_u64(value, key);
        else if (key == "csv") cfg.write_csv = to_bool(value, key);
        else throw ValidationError("config: unknown key '" + key + "'");
    }
}

std::vector<int> assign_clusters(const Matrix& assignments) {
    std::vector<int> out(assignments.rows, 0);
    for (std::size_t i = 0; i < assignments.rows; ++i) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < assignments.cols; ++c) {
            if (assignments.at(i, c) > assignments.at(i, arg)) arg = c;
        }
        out[i] = static_cast<int>(arg);
    }
    return out;
}

PretrainOutput run_pretrain(const RunConfig& cfg) {
    const EmbeddingDataset source = load_expected(cfg.source_path, "source");
    const EmbeddingDataset target = load_expected(cfg.target_path, "target");
    if (source.dim() != target.dim()) {
        throw ValidationError("source and target dimensions differ: " +
                              std::to_string(source.dim()) + " vs " + std::to_string(target.dim()));
    }

    ModelConfig mc;
    mc.input_dim = source.dim();
    mc.encoder_widths = cfg.encoder_widths;
    mc.factor_dim = cfg.factor_dim ? cfg.factor_dim : 4 * static_cast<std::size_t>(target.k);
    mc.k_source = source.k;
    mc.k_target = target.k;
    mc.seed = cfg.seed;
    mc.init_scale = cfg.init_scale;

    HeadModel model(mc);
    const PretrainReport report = pretrain(model, source, cfg.epochs, cfg.batch_size, cfg.lr,
                                           cfg.weights.attr, cfg.seed);

    std::filesystem::create_directories(cfg.out_dir);
    PretrainOutput out;
    out.checkpoint = cfg.checkpoint_path.empty() ? cfg.default_checkpoint() : cfg.checkpoint_path;
    model.save(out.checkpoint);

    std::ostringstream log;
    log << "epoch,loss,accuracy\n";
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
        log << (e + 1) << "," << format_float(report.epoch_loss[e]) << ","
            << format_float(report.epoch_accuracy[e]) << "\n";
    }
    out.log = cfg.out_dir / "pretrain_log.csv";
    write_text(out.log, log.str());
    out.final_accuracy = report.final_accuracy();
    return out;
}

InitOutput run_init(const RunConfig& cfg) {
    const EmbeddingDataset target = load_expected(cfg.target_path, "target");
    const std::filesystem::path ckpt =
        cfg.checkpoint_path.empty() ? cfg.default_checkpoint() : cfg.checkpoint_path;
    const HeadModel model = HeadModel::load(ckpt);
    if (target.dim() != model.config().input_dim) {
        throw ValidationError("target dimension " + std::to_string(target.dim()) +
                              " does not match checkpoint input_dim " +
                              std::to_string(model.config().input_dim));
    }
    if (target.k != model.config().k_target) {
        throw ValidationError("target declares k=" + std::to_string(target.k) +
                              " but the checkpoint expects k_target=" +
                              std::to_string(model.config().k_target));
    }

    const Matrix embedded = model.embed_target(target.features);
    PriorBuild build = build_prior(embedded, target.k, cfg.alpha, cfg.tau,
                                   derive_seed(cfg.seed, 0x696e), cfg.kmeans_restarts); // "in"

    std::filesystem::create_directories(cfg.out_dir);
    InitOutput out;
    out.prior = cfg.prior_path.empty() ? cfg.default_prior() : cfg.prior_path;
    build.prior.save(out.prior);
    out.inertia = build.inertia;

    std::ostringstream log;
    log << "key,value\n";
    log << "inertia," << format_float(build.inertia) << "\n";
    log << "kmeans_iterations," << build.iterations << "\n";
    if (target.labelled() && cfg.eval_labels) {
        std::vector<int> truth(target.labels.begin(), target.labels.end());
        const ClusterEvaluation eval =
            evaluate_clustering(build.hard_assignment, truth, cfg.nmi_norm);
        out.have_baseline = true;
        out.baseline_acc = eval.acc;
        out.baseline_nmi = eval.nmi;
        log << "kmeans_baseline_acc," << format_float(eval.acc) << "\n";
        log << "kmeans_baseline_nmi," << format_float(eval.nmi) << "\n";
    }
    out.log = cfg.out_dir / "init_log.csv";
    write_text(out.log, log.str());
    return out;
}

TrainOutput run_train(const RunConfig& cfg) {
    const EmbeddingDataset source = load_expected(cfg.source_path, "source");
    const EmbeddingDataset target = load_expected(cfg.target_path, "target");
    if (target.labelled() && !cfg.eval_labels) {
        throw ValidationError(
            "target dataset is labelled; pass --eval-labels to confirm the labels are used for "
            "evaluation only");
    }

    const std::filesystem::path ckpt =
        cfg.checkpoint_path.empty() ? cfg.default_checkpoint() : cfg.checkpoint_path;
    HeadModel model = HeadModel::load(ckpt);
    const std::filesystem::path prior_path =
        cfg.prior_path.empty() ? cfg.default_prior() : cfg.prior_path;
    TransferPrior prior = TransferPrior::load(prior_path);

    TrainOptions opts;
    opts.weights = cfg.weights;
    opts.tau = cfg.tau;
    opts.alpha = cfg.alpha;
    opts.perturb = Perturbation::parse(
        cfg.perturb.empty() ? "relnoise:0.5+scale:0.8:1.2" : cfg.perturb);
    // relative noise tracks the within-cluster spread under the prior
    const std::vector<int> prior_groups = assign_clusters(prior.assignments);
    opts.perturb.resolve(target.features, &prior_groups);
    opts.epochs = cfg.epochs;
    opts.batch_size = cfg.batch_size;
    opts.lr = cfg.lr;
    opts.seed = cfg.seed;
    opts.freeze_encoder = cfg.freeze_encoder;
    opts.refresh_prior_every = cfg.refresh_prior_every;
    opts.head_align_epochs = cfg.head_align_epochs;
    opts.supervision = cfg.supervision;
    opts.confidence_diag_in_softmax = cfg.confidence_diag_in_softmax;
    opts.kmeans_restarts = cfg.kmeans_restarts;

    std::ostringstream metrics;
    metrics << "epoch,acc,nmi\n";
    const bool track = target.labelled() && cfg.eval_labels;
    std::vector<int> truth(target.labels.begin(), target.labels.end());
    TrainOutput out;
    EpochCallback cb;
    if (track) {
        cb = [&](int epoch, const HeadModel& m) {
            const std::vector<int> pred = assign_clusters(m.predict_target(target.features));
            const ClusterEvaluation eval = evaluate_clustering(pred, truth, cfg.nmi_norm);
            metrics << epoch << "," << format_float(eval.acc) << "," << format_float(eval.nmi)
                    << "\n";
            out.final_acc = eval.acc;
            out.final_nmi = eval.nmi;
        };
    }

    const TrainReport report = train_joint(model, prior, target.features, source, opts, cb);

    std::filesystem::create_directories(cfg.out_dir);
    out.checkpoint = cfg.final_checkpoint();
    model.save(out.checkpoint);

    std::ostringstream log;
    log << "# tau=" << format_float(cfg.tau) << " alpha=" << format_float(cfg.alpha)
        << " lambda_balance=" << format_float(cfg.weights.balance)
        << " lambda_attr=" << format_float(cfg.weights.attr)
        << " lambda_xent=" << format_float(cfg.weights.xent)
        << " supervision=" << supervision_name(cfg.supervision)
        << " perturb=" << opts.perturb.describe() << " seed=" << cfg.seed << "\n";
    log << "step,l_clu,l_balance,l_attr,l_xent,total\n";
    for (std::size_t s = 0; s < report.steps.size(); ++s) {
        const LossReport& r = report.steps[s];
        log << (s + 1) << "," << format_float(r.clustering) << "," << format_float(r.balance)
            << "," << format_float(r.attr) << "," << format_float(r.xent) << ","
            << format_float(r.total) << "\n";
    }
    out.loss_log = cfg.out_dir / "train_loss.csv";
    write_text(out.loss_log, log.str());

    if (track) {
        out.metrics_log = cfg.out_dir / "train_metrics.csv";
        write_text(out.metrics_log, metrics.str());
        out.have_metrics = true;
        if (cfg.epochs == 0) {
            // still report metrics of the unchanged model
            const std::vector<int> pred = assign_clusters(model.predict_target(target.features));
            const ClusterEvaluation eval = evaluate_clustering(pred, truth, cfg.nmi_norm);
            out.final_acc = eval.acc;
            out.final_nmi = eval.nmi;
        }
    }
    return out;
}

EvalOutput run_eval(const RunConfig& cfg) {
    const EmbeddingDataset target = load_expected(cfg.target_path, "target");
    if (!target.labelled()) {
        throw ValidationError("evaluation requires a labelled dataset: " +
                              cfg.target_path.string());
    }
    const std::filesystem::path ckpt =
        cfg.checkpoint_path.empty() ? cfg.final_checkpoint() : cfg.checkpoint_path;
    const HeadModel model = HeadModel::load(ckpt);
    if (target.dim() != model.config().input_dim) {
        throw ValidationError("target dimension " + std::to_string(target.dim()) +
                              " does not match checkpoint input_dim " +
                              std::to_string(model.config().input_dim));
    }

    const std::vector<int> pred = assign_clusters(model.predict_target(target.features));
    const std::vector<int> truth(target.labels.begin(), target.labels.end());
    EvalOutput out;
    out.detail = evaluate_clustering(pred, truth, cfg.nmi_norm);
    out.acc = out.detail.acc;
    out.nmi = out.detail.nmi;
    return out;
}

SynthOutput run_synth(const RunConfig& cfg) {
    const TransferPair pair = synthesize_transfer_pair(cfg.synth);
    std::filesystem::create_directories(cfg.out_dir);
    SynthOutput out;
    out.source = cfg.out_dir / "source.emb";
    out.target = cfg.out_dir / "target.emb";
    out.target_labelled = cfg.out_dir / "target_labelled.emb";
    write_dataset(pair.source, out.source);
    write_dataset(pair.target, out.target);
    const EmbeddingDataset labelled = with_labels(pair.target, pair.target_labels);
    write_dataset(labelled, out.target_labelled);
    if (cfg.write_csv) {
        write_dataset_csv(pair.source, cfg.out_dir / "source.csv");
        write_dataset_csv(labelled, cfg.out_dir / "target_labelled.csv");
    }
    return out;
}

}  // namespace supreme
