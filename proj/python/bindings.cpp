#include <pgmoe/dataio.hpp>
#include <pgmoe/datagen.hpp>
#include <pgmoe/gradcheck.hpp>
#include <pgmoe/metrics.hpp>
#include <pgmoe/training.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace pgmoe;

namespace {

std::vector<OrdinalLabel> to_labels(const std::vector<int>& ranks)
{
	std::vector<OrdinalLabel> out;
	out.reserve(ranks.size());
	for (int r : ranks)
		out.emplace_back(r);
	return out;
}

OrdinalScale make_scale(const std::optional<int>& num_classes, const std::vector<double>& thresholds)
{
	if (num_classes.has_value() == !thresholds.empty())
		throw DomainError("give exactly one of num_classes or thresholds");
	return num_classes ? OrdinalScale::with_classes(*num_classes) : OrdinalScale::from_thresholds(thresholds);
}

} // namespace

PYBIND11_MODULE(_pgmoe, m)
{
	m.doc() = "Persistence-gated mixture of ordinal experts";
	py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

	py::class_<GenConfig>(m, "GenConfig")
	    .def(py::init<>())
	    .def_readwrite("num_steps", &GenConfig::num_steps)
	    .def_readwrite("num_classes", &GenConfig::num_classes)
	    .def_readwrite("feature_dim", &GenConfig::feature_dim)
	    .def_readwrite("base_persistence", &GenConfig::base_persistence)
	    .def_readwrite("switch_signal_strength", &GenConfig::switch_signal_strength)
	    .def_readwrite("class_marginals", &GenConfig::class_marginals)
	    .def_readwrite("gap_probability", &GenConfig::gap_probability)
	    .def_readwrite("seed", &GenConfig::seed)
	    .def("validate", &GenConfig::validate);

	py::class_<TimeSeriesRecord>(m, "Record")
	    .def_readonly("timestamp", &TimeSeriesRecord::timestamp)
	    .def_readonly("features", &TimeSeriesRecord::features)
	    .def_readonly("raw_value", &TimeSeriesRecord::raw_value)
	    .def_property_readonly("label", [](const TimeSeriesRecord& r) { return r.label.rank(); });

	m.def("generate", &generate, py::arg("config"));
	m.def("read_series", [](const std::filesystem::path& path, const std::vector<double>& thresholds) {
		return thresholds.empty() ? read_series(path) : read_series(path, OrdinalScale::from_thresholds(thresholds));
	}, py::arg("path"), py::arg("thresholds") = std::vector<double>{});
	m.def("write_series", [](const std::filesystem::path& path, const std::vector<TimeSeriesRecord>& s) {
		write_series(path, s);
	}, py::arg("path"), py::arg("series"));

	py::class_<WindowedPattern>(m, "Pattern")
	    .def_readonly("z", &WindowedPattern::z)
	    .def_property_readonly("current_label", [](const WindowedPattern& p) { return p.current_label.rank(); })
	    .def_property_readonly("target", [](const WindowedPattern& p) { return p.target.rank(); })
	    .def_readonly("origin_t", &WindowedPattern::origin_t);

	py::class_<WindowedDataset>(m, "Dataset")
	    .def_readonly("patterns", &WindowedDataset::patterns)
	    .def_readonly("delta", &WindowedDataset::delta)
	    .def_readonly("horizon", &WindowedDataset::horizon)
	    .def_property_readonly("num_classes", &WindowedDataset::num_classes)
	    .def_property_readonly("input_dim", &WindowedDataset::input_dim)
	    .def("__len__", &WindowedDataset::size)
	    .def("class_distribution", [](const WindowedDataset& ds) { return class_distribution(ds); })
	    .def("persistence_rate", [](const WindowedDataset& ds) { return persistence_rate(ds); });

	m.def("build_windows",
	      [](const std::vector<TimeSeriesRecord>& series, int delta, int horizon, std::optional<int> num_classes,
	         const std::vector<double>& thresholds) {
		      return build_windows(series, delta, horizon, make_scale(num_classes, thresholds));
	      },
	      py::arg("series"), py::arg("delta"), py::arg("horizon"), py::arg("num_classes") = py::none(),
	      py::arg("thresholds") = std::vector<double>{});

	m.def("build_splits",
	      [](const std::vector<TimeSeriesRecord>& series, int delta, int horizon, int splits,
	         std::optional<int> num_classes, const std::vector<double>& thresholds) {
		      std::vector<std::pair<WindowedDataset, WindowedDataset>> out;
		      for (auto& s : build_splits(series, make_scale(num_classes, thresholds), delta, horizon, splits))
			      out.emplace_back(std::move(s.train), std::move(s.test));
		      return out;
	      },
	      py::arg("series"), py::arg("delta"), py::arg("horizon"), py::arg("splits"),
	      py::arg("num_classes") = py::none(), py::arg("thresholds") = std::vector<double>{});

	py::class_<EvalReport>(m, "EvalReport")
	    .def_readonly("acc", &EvalReport::acc)
	    .def_readonly("amae", &EvalReport::amae)
	    .def_readonly("mmae", &EvalReport::mmae)
	    .def_readonly("gms", &EvalReport::gms)
	    .def_readonly("per_class_mae", &EvalReport::per_class_mae)
	    .def_readonly("per_class_sensitivity", &EvalReport::per_class_sensitivity)
	    .def_readonly("n_per_class", &EvalReport::n_per_class)
	    .def_readonly("missing_classes", &EvalReport::missing_classes);

	m.def("evaluate", [](const std::vector<int>& truth, const std::vector<int>& pred, int num_classes) {
		return evaluate(to_labels(truth), to_labels(pred), num_classes);
	}, py::arg("truth"), py::arg("pred"), py::arg("num_classes"));

	py::class_<FittedModel>(m, "Model")
	    .def_property_readonly("method", [](const FittedModel& f) { return std::string(to_string(f.method)); })
	    .def_property_readonly("hidden_units", [](const FittedModel& f) { return f.hyper.hidden_units; })
	    .def_property_readonly("iterations", [](const FittedModel& f) { return f.hyper.iterations; })
	    .def_property_readonly("regularization", [](const FittedModel& f) { return f.hyper.lambda; })
	    .def_readonly("final_loss", &FittedModel::final_loss)
	    .def_readonly("warnings", &FittedModel::warnings)
	    .def("probs", &FittedModel::probs, py::arg("pattern"), py::arg("num_classes"))
	    .def("predict", [](const FittedModel& f, const WindowedPattern& p) { return f.predict(p).rank(); })
	    .def("gate_alpha", &FittedModel::gate_alpha)
	    .def("predict_all", [](const FittedModel& f, const WindowedDataset& ds) {
		    std::vector<int> out;
		    for (auto y : predict_all(f, ds))
			    out.push_back(y.rank());
		    return out;
	    })
	    .def("evaluate", [](const FittedModel& f, const WindowedDataset& ds) { return evaluate_model(f, ds); });

	m.def("train",
	      [](const WindowedDataset& train, const std::string& method, const std::vector<int>& hidden_units,
	         const std::vector<int>& iterations, const std::vector<double>& lambdas, int cv_folds,
	         std::uint64_t seed, const std::string& selection_metric, int threads) {
		      TrainSpec spec;
		      spec.method = parse_method(method);
		      spec.grid = HyperGrid{hidden_units, iterations, lambdas};
		      spec.cv_folds = cv_folds;
		      spec.seed = seed;
		      spec.selection_metric = parse_selection_metric(selection_metric);
		      spec.threads = threads;
		      spec.repeats = 1;
		      spec.validate();
		      py::gil_scoped_release release;
		      return train_method(train, spec);
	      },
	      py::arg("train"), py::arg("method"), py::arg("hidden_units") = HyperGrid{}.hidden_units,
	      py::arg("iterations") = HyperGrid{}.iterations, py::arg("lambdas") = HyperGrid{}.lambdas,
	      py::arg("cv_folds") = 5, py::arg("seed") = 1, py::arg("selection_metric") = "amae",
	      py::arg("threads") = 1);

	m.def("fit",
	      [](const WindowedDataset& train, const std::string& method, int hidden_units, int iterations,
	         double lambda, std::uint64_t seed) {
		      py::gil_scoped_release release;
		      return fit(parse_method(method), train, Hyperparameters{hidden_units, iterations, lambda}, seed);
	      },
	      py::arg("train"), py::arg("method"), py::arg("hidden_units"), py::arg("iterations"),
	      py::arg("regularization") = 0.0, py::arg("seed") = 1);

	py::class_<GradCheckReport>(m, "GradCheckReport")
	    .def_readonly("trials", &GradCheckReport::trials)
	    .def_readonly("components", &GradCheckReport::components)
	    .def_readonly("worst_relative_error", &GradCheckReport::worst_relative_error)
	    .def_property_readonly("passed", &GradCheckReport::passed)
	    .def_property_readonly("failed_blocks", [](const GradCheckReport& r) {
		    std::vector<std::string> out;
		    for (const auto& f : r.failures)
			    out.push_back(f.suite + "/" + f.block);
		    return out;
	    });

	m.def("gradcheck",
	      [](std::uint64_t seed, int trials, bool corrupt) {
		      GradCheckOptions o;
		      o.seed = seed;
		      o.trials = trials;
		      o.corrupt_gradient = corrupt;
		      return run_gradient_check(o);
	      },
	      py::arg("seed") = 1, py::arg("trials") = 100, py::arg("corrupt_gradient") = false);
}
