#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "driftcal/harness.hpp"

namespace py = pybind11;
using namespace driftcal;

namespace {

LabeledDataset dataset_from_rows(const std::vector<std::vector<float>>& rows,
                                 const std::vector<int>& labels, int num_classes) {
  if (rows.size() != labels.size())
    throw DataError("rows and labels differ in length");
  LabeledDataset d;
  d.num_classes = num_classes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SampleGrid g;
    g.shape = {1, 1, rows[i].size()};
    g.values = rows[i];
    g.label = labels[i];
    d.samples.push_back(std::move(g));
  }
  d.validate();
  return d;
}

std::vector<LogitRecord> records_from_lists(const std::vector<std::vector<double>>& logits,
                                            const std::vector<int>& labels) {
  if (logits.size() != labels.size())
    throw DataError("logits and labels differ in length");
  std::vector<LogitRecord> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = {logits[i], labels[i]};
  return out;
}

PredictionSet set_from_probs(const std::vector<ProbVector>& probs,
                             const std::vector<int>& labels) {
  if (probs.size() != labels.size())
    throw DataError("probs and labels differ in length");
  PredictionSet ps;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const std::size_t top = argmax(probs[i]);
    ps.confidence.push_back(probs[i][top]);
    ps.correct.push_back(static_cast<int>(top) == labels[i]);
    ps.probs.push_back(probs[i]);
    ps.labels.push_back(labels[i]);
  }
  return ps;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "confidence calibration under distribution drift";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<LabeledDataset>(m, "Dataset")
      .def(py::init(&dataset_from_rows), py::arg("rows"), py::arg("labels"),
           py::arg("num_classes"))
      .def_readonly("num_classes", &LabeledDataset::num_classes)
      .def("__len__", &LabeledDataset::size)
      .def("labels",
           [](const LabeledDataset& d) {
             std::vector<int> out;
             for (const auto& g : d.samples) out.push_back(g.label);
             return out;
           })
      .def("rows", [](const LabeledDataset& d) {
        std::vector<std::vector<float>> out;
        for (const auto& g : d.samples) out.push_back(g.values);
        return out;
      });

  py::class_<SoftmaxRegressionModel>(m, "Model")
      .def_readonly("num_classes", &SoftmaxRegressionModel::num_classes)
      .def_readonly("input_dim", &SoftmaxRegressionModel::input_dim)
      .def("accuracy",
           [](const SoftmaxRegressionModel& m_, const LabeledDataset& d) {
             return accuracy(m_, d);
           })
      .def("predict_logits",
           [](const SoftmaxRegressionModel& m_, const LabeledDataset& d) {
             std::vector<std::vector<double>> logits;
             std::vector<int> labels;
             for (const auto& r : predict_logits(m_, d)) {
               logits.push_back(r.logits);
               labels.push_back(r.label);
             }
             return py::make_tuple(logits, labels);
           })
      .def("save", [](const SoftmaxRegressionModel& m_, const std::string& path) {
        save_model(m_, path);
      });

  py::class_<Calibrator, std::shared_ptr<Calibrator>>(m, "Calibrator")
      .def_property_readonly("kind", &Calibrator::kind)
      .def("apply", &Calibrator::apply, py::arg("logits"))
      .def("apply_all",
           [](const Calibrator& c, const std::vector<std::vector<double>>& logits) {
             std::vector<ProbVector> out;
             for (const auto& z : logits) out.push_back(c.apply(z));
             return out;
           })
      .def("save",
           [](const Calibrator& c, const std::string& path) { save_calibrator(c, path); })
      .def("to_json_string",
           [](const Calibrator& c) { return c.to_json().dump(); });

  m.def(
      "generate_blobs",
      [](int classes, int dim, int per_class, double center_scale, double stddev,
         std::uint64_t seed) {
        return generate_blobs({classes, dim, per_class, center_scale, stddev, seed});
      },
      py::arg("classes"), py::arg("dim"), py::arg("per_class"),
      py::arg("center_scale") = 1.0, py::arg("stddev") = 0.2, py::arg("seed") = 0);

  m.def(
      "train_softmax",
      [](const LabeledDataset& d, int epochs, double lr, double l2, std::uint64_t seed) {
        return train_softmax_regression(d, {epochs, lr, l2, seed});
      },
      py::arg("dataset"), py::arg("epochs") = 200, py::arg("lr") = 1.0,
      py::arg("l2") = 0.0, py::arg("seed") = 0);

  m.def("load_model", &load_model, py::arg("path"));
  m.def("load_dataset",
        [](const std::string& path, const std::string& format) {
          return load_dataset(path, format == "bin" ? DatasetFormat::kRawBinary
                                                    : DatasetFormat::kCsv);
        },
        py::arg("path"), py::arg("format") = "csv");
  m.def("load_calibrator",
        [](const std::string& path) {
          return std::const_pointer_cast<Calibrator>(load_calibrator(path));
        },
        py::arg("path"));

  m.def("softmax", &softmax, py::arg("logits"));

  m.def(
      "fit_calibrator",
      [](const std::string& kind, const std::vector<std::vector<double>>& logits,
         const std::vector<int>& labels, int bins) {
        return std::const_pointer_cast<Calibrator>(
            fit_calibrator(kind, records_from_lists(logits, labels), bins).calibrator);
      },
      py::arg("kind"), py::arg("logits"), py::arg("labels"), py::arg("bins") = 15);

  m.def(
      "tune_calibrator_perturbed",
      [](const std::string& kind, const SoftmaxRegressionModel& model,
         const LabeledDataset& val, int levels, std::uint64_t seed, int bins) {
        TunerConfig cfg;
        cfg.num_levels = levels;
        cfg.eval_seed = seed;
        const TunedCalibrator t = tune_calibrator_perturbed(kind, model, val, cfg, bins);
        return py::make_tuple(std::const_pointer_cast<Calibrator>(t.fitted.calibrator),
                              t.schedule.targets,
                              t.schedule.epsilons, t.schedule.achieved_acc);
      },
      py::arg("kind"), py::arg("model"), py::arg("val"), py::arg("levels") = 10,
      py::arg("seed") = 0, py::arg("bins") = 15);

  m.def(
      "perturb_dataset",
      [](const LabeledDataset& d, const std::string& kind, double param,
         std::uint64_t seed) {
        return perturb_dataset(d, perturbation_kind_from_string(kind), param, seed);
      },
      py::arg("dataset"), py::arg("kind"), py::arg("param"), py::arg("seed") = 0);

  m.def("builtin_schedule",
        [](const std::string& kind) {
          return builtin_schedule(perturbation_kind_from_string(kind)).params;
        },
        py::arg("kind"));

  m.def(
      "ece",
      [](const std::vector<ProbVector>& probs, const std::vector<int>& labels, int bins) {
        return ece(set_from_probs(probs, labels), bins);
      },
      py::arg("probs"), py::arg("labels"), py::arg("bins") = 15);
  m.def(
      "debiased_ece",
      [](const std::vector<ProbVector>& probs, const std::vector<int>& labels, int bins) {
        return debiased_ece(set_from_probs(probs, labels), bins);
      },
      py::arg("probs"), py::arg("labels"), py::arg("bins") = 15);
  m.def("nll", &nll, py::arg("probs"), py::arg("labels"));
  m.def("brier", &brier, py::arg("probs"), py::arg("labels"));
  m.def("predictive_entropy", &predictive_entropy, py::arg("probs"));
}
