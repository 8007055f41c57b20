// Python bindings for the transfer-clustering core: datasets, the head
// model, transfer priors, losses, metrics and the file-based pipeline.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "supreme/autograd.hpp"
#include "supreme/dataset.hpp"
#include "supreme/error.hpp"
#include "supreme/kmeans.hpp"
#include "supreme/losses.hpp"
#include "supreme/metrics.hpp"
#include "supreme/model.hpp"
#include "supreme/perturb.hpp"
#include "supreme/pipeline.hpp"
#include "supreme/prior.hpp"
#include "supreme/rng.hpp"
#include "supreme/train.hpp"

namespace py = pybind11;
using namespace supreme;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw ValidationError("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::memcpy(m.data.data(), arr.data(), sizeof(double) * m.size());
    return m;
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> arr({m.rows, m.cols});
    std::memcpy(arr.mutable_data(), m.data.data(), sizeof(double) * m.size());
    return arr;
}

std::vector<std::uint32_t> to_labels(const std::vector<long>& labels) {
    std::vector<std::uint32_t> out;
    out.reserve(labels.size());
    for (long v : labels) {
        if (v < 0) throw ValidationError("labels must be non-negative");
        out.push_back(static_cast<std::uint32_t>(v));
    }
    return out;
}

std::vector<int> to_ints(const std::vector<long>& v) {
    return std::vector<int>(v.begin(), v.end());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "transfer clustering with confidence-weighted pairwise constraints and "
              "perturbation self-supervision";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    py::enum_<Domain>(m, "Domain")
        .value("source", Domain::source)
        .value("target", Domain::target);

    py::class_<EmbeddingDataset>(m, "EmbeddingDataset")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>&
                             features,
                         const std::optional<std::vector<long>>& labels, unsigned k,
                         Domain domain) {
                 EmbeddingDataset ds;
                 ds.features = to_matrix(features);
                 if (labels) ds.labels = to_labels(*labels);
                 ds.k = k;
                 ds.domain = domain;
                 ds.validate();
                 return ds;
             }),
             py::arg("features"), py::arg("labels") = std::nullopt, py::arg("k") = 0,
             py::arg("domain") = Domain::source)
        .def_property_readonly("features",
                               [](const EmbeddingDataset& ds) { return to_array(ds.features); })
        .def_property_readonly("labels",
                               [](const EmbeddingDataset& ds) {
                                   return std::vector<long>(ds.labels.begin(), ds.labels.end());
                               })
        .def_property_readonly("k", [](const EmbeddingDataset& ds) { return ds.k; })
        .def_property_readonly("domain", [](const EmbeddingDataset& ds) { return ds.domain; })
        .def_property_readonly("labelled", &EmbeddingDataset::labelled)
        .def("__len__", [](const EmbeddingDataset& ds) { return ds.n(); });

    m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));
    m.def("read_dataset", &read_dataset, py::arg("path"));
    m.def("write_dataset_csv", &write_dataset_csv, py::arg("dataset"), py::arg("path"));

    py::class_<SynthesisConfig>(m, "SynthesisConfig")
        .def(py::init([](std::size_t dim, std::size_t k_source, std::size_t k_target,
                         std::size_t per_class, double separation, double within_std,
                         double domain_shift, std::uint64_t seed) {
                 SynthesisConfig cfg;
                 cfg.dim = dim;
                 cfg.k_source = k_source;
                 cfg.k_target = k_target;
                 cfg.per_class = per_class;
                 cfg.separation = separation;
                 cfg.within_std = within_std;
                 cfg.domain_shift = domain_shift;
                 cfg.seed = seed;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("dim") = 16, py::arg("k_source") = 4, py::arg("k_target") = 4,
             py::arg("per_class") = 200, py::arg("separation") = 6.0,
             py::arg("within_std") = 1.0, py::arg("domain_shift") = 0.0, py::arg("seed") = 0)
        .def_readwrite("dim", &SynthesisConfig::dim)
        .def_readwrite("seed", &SynthesisConfig::seed);

    py::class_<TransferPair>(m, "TransferPair")
        .def_readonly("source", &TransferPair::source)
        .def_readonly("target", &TransferPair::target)
        .def_property_readonly("target_labels",
                               [](const TransferPair& p) {
                                   return std::vector<long>(p.target_labels.begin(),
                                                            p.target_labels.end());
                               })
        .def_property_readonly("source_means",
                               [](const TransferPair& p) { return to_array(p.source_means); })
        .def_property_readonly("target_means",
                               [](const TransferPair& p) { return to_array(p.target_means); });

    m.def("synthesize_transfer_pair", &synthesize_transfer_pair, py::arg("config"));

    m.def(
        "kmeans",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
           std::size_t k, std::uint64_t seed, int restarts) {
            const KMeansResult res = kmeans(to_matrix(points), k, seed, restarts);
            return py::make_tuple(to_array(res.centroids), res.assignment, res.inertia);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 10,
        "Lloyd's algorithm with k-means++ seeding; returns (centroids, assignment, inertia).");

    m.def(
        "initial_assignments",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& centroids,
           double alpha) { return to_array(initial_assignments(to_matrix(x), to_matrix(centroids), alpha)); },
        py::arg("x"), py::arg("centroids"), py::arg("alpha") = 1.0);

    m.def(
        "pair_constraints",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& assignments) {
            return to_array(pair_constraints(to_matrix(assignments)));
        },
        py::arg("assignments"));

    m.def(
        "confidence_weights",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& assignments,
           double tau, bool include_diagonal) {
            const ConfidenceWeights cw =
                confidence_weights(to_matrix(assignments), tau, include_diagonal);
            return py::make_tuple(to_array(cw.entropy), cw.entropy_max, to_array(cw.weights));
        },
        py::arg("assignments"), py::arg("tau") = 0.5, py::arg("include_diagonal") = false,
        "Joint-entropy pair confidences; returns (entropy, entropy_max, weights).");

    m.def(
        "perturb",
        [](const std::string& spec,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& batch,
           std::uint64_t seed,
           const std::optional<py::array_t<double, py::array::c_style | py::array::forcecast>>&
               reference) {
            Perturbation p = Perturbation::parse(spec);
            const Matrix data = to_matrix(batch);
            p.resolve(reference ? to_matrix(*reference) : data);
            Rng rng(seed);
            return to_array(p.apply(data, rng));
        },
        py::arg("spec"), py::arg("batch"), py::arg("seed") = 0,
        py::arg("reference") = std::nullopt);

    m.def(
        "clustering_loss",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& p,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& p_perturbed,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& constraints,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& confidence) {
            return clustering_loss(ag::constant(to_matrix(p)), ag::constant(to_matrix(p_perturbed)),
                                   to_matrix(constraints), to_matrix(confidence))
                ->scalar();
        },
        py::arg("p"), py::arg("p_perturbed"), py::arg("constraints"), py::arg("confidence"));

    m.def("balance_loss",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& p) {
              return balance_loss(ag::constant(to_matrix(p)))->scalar();
          });
    m.def("binary_loss",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& factors) {
              return binary_loss(ag::constant(to_matrix(factors)))->scalar();
          });
    m.def("source_xent",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& p,
             const std::vector<long>& labels) {
              return source_xent(ag::constant(to_matrix(p)), to_labels(labels))->scalar();
          });

    m.def(
        "hungarian",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& cost) {
            const HungarianResult res = hungarian(to_matrix(cost));
            return py::make_tuple(res.assignment, res.cost);
        },
        py::arg("cost"), "Minimum-cost assignment; returns (row_to_column, total_cost).");

    m.def(
        "clustering_accuracy",
        [](const std::vector<long>& pred, const std::vector<long>& truth) {
            return clustering_accuracy(to_ints(pred), to_ints(truth));
        },
        py::arg("pred"), py::arg("truth"));

    m.def(
        "nmi",
        [](const std::vector<long>& pred, const std::vector<long>& truth,
           const std::string& norm) {
            return nmi(to_ints(pred), to_ints(truth), parse_nmi_norm(norm));
        },
        py::arg("pred"), py::arg("truth"), py::arg("norm") = "geometric");

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init([](std::size_t input_dim, const std::vector<std::size_t>& encoder_widths,
                         std::size_t factor_dim, std::size_t k_source, std::size_t k_target,
                         std::uint64_t seed, double init_scale) {
                 ModelConfig cfg;
                 cfg.input_dim = input_dim;
                 cfg.encoder_widths = encoder_widths;
                 cfg.factor_dim = factor_dim ? factor_dim : 4 * k_target;
                 cfg.k_source = k_source;
                 cfg.k_target = k_target;
                 cfg.seed = seed;
                 cfg.init_scale = init_scale;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("input_dim"), py::arg("encoder_widths") = std::vector<std::size_t>{32, 16},
             py::arg("factor_dim") = 0, py::arg("k_source") = 2, py::arg("k_target") = 2,
             py::arg("seed") = 0, py::arg("init_scale") = 1.0)
        .def_readonly("input_dim", &ModelConfig::input_dim)
        .def_readonly("encoder_widths", &ModelConfig::encoder_widths)
        .def_readonly("factor_dim", &ModelConfig::factor_dim)
        .def_readonly("k_source", &ModelConfig::k_source)
        .def_readonly("k_target", &ModelConfig::k_target);

    py::class_<HeadModel>(m, "HeadModel")
        .def(py::init<const ModelConfig&>(), py::arg("config"))
        .def_property_readonly("config", &HeadModel::config)
        .def("embed_target",
             [](const HeadModel& model,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& batch) {
                 return to_array(model.embed_target(to_matrix(batch)));
             })
        .def("predict_target",
             [](const HeadModel& model,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& batch) {
                 return to_array(model.predict_target(to_matrix(batch)));
             })
        .def("predict_source",
             [](const HeadModel& model,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& batch) {
                 return to_array(model.predict_source(to_matrix(batch)));
             })
        .def("forward_target",
             [](const HeadModel& model,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& batch) {
                 const auto act = model.forward_target(to_matrix(batch));
                 return py::make_tuple(to_array(act.features->values()),
                                       to_array(act.factors->values()),
                                       to_array(act.assignments->values()));
             },
             "Returns (visual_features, factors, assignments).")
        .def("save", &HeadModel::save, py::arg("path"))
        .def_static("load", &HeadModel::load, py::arg("path"));

    m.def(
        "pretrain",
        [](HeadModel& model, const EmbeddingDataset& source, int epochs, int batch_size, double lr,
           double lambda_attr, std::uint64_t seed) {
            const PretrainReport report =
                pretrain(model, source, epochs, batch_size, lr, lambda_attr, seed);
            return py::make_tuple(report.epoch_loss, report.epoch_accuracy);
        },
        py::arg("model"), py::arg("source"), py::arg("epochs") = 100, py::arg("batch_size") = 64,
        py::arg("lr") = 1e-3, py::arg("lambda_attr") = 1.0, py::arg("seed") = 0,
        "Supervised pretraining; returns (epoch_losses, epoch_accuracies).");

    // file-based pipeline stages driven by a config dictionary
    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def("set",
             [](RunConfig& cfg, const std::map<std::string, std::string>& values) {
                 apply_config(cfg, values);
             },
             "Apply flat key/value settings (same keys as the config file).");

    m.def("run_synth", [](const RunConfig& cfg) {
        const SynthOutput out = run_synth(cfg);
        return py::make_tuple(out.source, out.target, out.target_labelled);
    });
    m.def("run_pretrain", [](const RunConfig& cfg) {
        const PretrainOutput out = run_pretrain(cfg);
        return py::make_tuple(out.checkpoint, out.final_accuracy);
    });
    m.def("run_init", [](const RunConfig& cfg) {
        const InitOutput out = run_init(cfg);
        py::dict d;
        d["prior"] = out.prior;
        d["inertia"] = out.inertia;
        if (out.have_baseline) {
            d["baseline_acc"] = out.baseline_acc;
            d["baseline_nmi"] = out.baseline_nmi;
        }
        return d;
    });
    m.def("run_train", [](const RunConfig& cfg) {
        const TrainOutput out = run_train(cfg);
        py::dict d;
        d["checkpoint"] = out.checkpoint;
        if (out.have_metrics) {
            d["acc"] = out.final_acc;
            d["nmi"] = out.final_nmi;
        }
        return d;
    });
    m.def("run_eval", [](const RunConfig& cfg) {
        const EvalOutput out = run_eval(cfg);
        return py::make_tuple(out.acc, out.nmi);
    });

#ifdef VERSION_INFO
#define STR_HELPER(x) #x
#define STR(x) STR_HELPER(x)
    m.attr("__version__") = STR(VERSION_INFO);
#undef STR
#undef STR_HELPER
#else
    m.attr("__version__") = "dev";
#endif
}
