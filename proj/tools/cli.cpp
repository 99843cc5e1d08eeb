#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pgmoe::cli {

namespace fs = std::filesystem;

namespace {

int default_threads()
{
	if (const char* env = std::getenv("PGMOE_THREADS")) {
		const int n = std::atoi(env);
		if (n >= 1)
			return n;
	}
	return 1;
}

OrdinalScale scale_for(const std::vector<double>& thresholds, int num_classes)
{
	return thresholds.empty() ? OrdinalScale::with_classes(num_classes) : OrdinalScale::from_thresholds(thresholds);
}

std::vector<TimeSeriesRecord> load_source(const DataSource& src)
{
	if (src.generator)
		return generate(*src.generator);
	return read_series(*src.path, scale_for(src.thresholds, src.num_classes));
}

std::vector<Method> parse_methods(const std::string& list)
{
	std::vector<Method> out;
	std::stringstream ss(list);
	std::string item;
	while (std::getline(ss, item, ','))
		out.push_back(parse_method(item));
	if (out.empty())
		throw DomainError("no method given");
	return out;
}

std::string read_text(const fs::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DomainError("cannot open " + path.string());
	std::stringstream buf;
	buf << in.rdbuf();
	return buf.str();
}

ModelBundle load_bundle_and_windows(const fs::path& model_path, const fs::path& data_path, WindowedDataset& ds)
{
	ModelBundle b = load_model(model_path);
	const OrdinalScale scale = scale_for(b.thresholds, b.num_classes);
	const auto series = read_series(data_path, scale);
	ds = build_raw_windows(series, b.delta, b.horizon, scale);
	if (ds.input_dim() != b.standardization.mean.size())
		throw DomainError("data windows have dimension " + std::to_string(ds.input_dim()) + " but the model expects " +
		                  std::to_string(b.standardization.mean.size()));
	standardize(ds, b.standardization);
	return b;
}

void print_report(std::ostream& out, const EvalReport& r)
{
	out << "Acc  " << format_double(r.acc) << '\n'
	    << "AMAE " << format_double(r.amae) << '\n'
	    << "MMAE " << format_double(r.mmae) << '\n'
	    << "GMS  " << format_double(r.gms) << '\n';
	if (r.missing_classes)
		out << "note: some classes are absent from the true labels and were excluded\n";
}

} // namespace

int cmd_experiment(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& out)
{
	const auto series = load_source(config.data);
	const OrdinalScale scale = scale_for(config.data.thresholds, config.data.num_classes);
	const auto splits = build_splits(series, scale, config.delta, config.horizon, config.splits, config.test_fraction);
	const ExperimentReport report = run_experiment(splits, config.methods, config.spec);

	fs::create_directories(out_dir);
	write_report(report, out_dir / "report.csv");
	write_summary(report, out_dir / "summary.csv");
	const std::string table = render_table(report);
	write_file_atomically(out_dir / "table.txt", table);
	out << table;
	return kSuccess;
}

int cmd_gradcheck(const GradCheckOptions& options, std::ostream& out)
{
	const GradCheckReport r = run_gradient_check(options);
	out << "trials " << r.trials << ", components " << r.components << ", worst relative error "
	    << format_double(r.worst_relative_error) << '\n';
	if (r.passed())
		return kSuccess;
	std::vector<std::string> blocks;
	for (const auto& f : r.failures) {
		const std::string tag = f.suite + "/" + f.block;
		if (std::find(blocks.begin(), blocks.end(), tag) == blocks.end())
			blocks.push_back(tag);
	}
	out << "FAILED blocks:";
	for (const auto& b : blocks)
		out << ' ' << b;
	out << '\n';
	return kDomainError;
}

int cmd_trace(const fs::path& model_path, const fs::path& data_path, const fs::path& out_path)
{
	WindowedDataset ds;
	const ModelBundle b = load_bundle_and_windows(model_path, data_path, ds);
	const int q = b.num_classes;
	std::ostringstream out;
	out << "t,true_label,predicted_label,gate_alpha";
	for (int c = 1; c <= q; ++c)
		out << ",p_c" << c;
	out << '\n';
	for (const auto& p : ds.patterns) {
		const auto probs = b.model.probs(p, q);
		out << p.origin_t + ds.horizon << ',' << p.target.rank() << ',' << b.model.predict(p).rank() << ',';
		if (const auto alpha = b.model.gate_alpha(p))
			out << format_double(*alpha);
		for (double v : probs)
			out << ',' << format_double(v);
		out << '\n';
	}
	write_file_atomically(out_path, out.str());
	return kSuccess;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
	CLI::App app{"Persistence-gated mixture of experts for ordinal time-series prediction", "pgmoe"};
	app.require_subcommand(1);
	int threads = default_threads();
	app.add_option("--threads", threads, "Worker threads (default from PGMOE_THREADS, else 1)")
	    ->check(CLI::PositiveNumber);

	// generate
	auto* gen = app.add_subcommand("generate", "Write a synthetic labelled series");
	std::string gen_config, gen_out;
	GenConfig gcfg;
	gen->add_option("--config", gen_config, "Generator JSON")->check(CLI::ExistingFile);
	gen->add_option("--out", gen_out, "Series CSV to write")->required();
	gen->add_option("--steps", gcfg.num_steps)->check(CLI::PositiveNumber);
	gen->add_option("--classes", gcfg.num_classes)->check(CLI::Range(2, 1000));
	gen->add_option("--features", gcfg.feature_dim)->check(CLI::PositiveNumber);
	gen->add_option("--persistence", gcfg.base_persistence);
	gen->add_option("--strength", gcfg.switch_signal_strength);
	gen->add_option("--gap", gcfg.gap_probability);
	gen->add_option("--seed", gcfg.seed);

	// windows
	auto* win = app.add_subcommand("windows", "Build sliding-window patterns from a series");
	std::string win_data, win_out;
	int win_classes = 0, win_delta = 1, win_horizon = 1;
	std::vector<double> win_thresholds;
	win->add_option("--data", win_data)->required()->check(CLI::ExistingFile);
	win->add_option("--out", win_out);
	win->add_option("--classes", win_classes)->check(CLI::Range(2, 1000));
	win->add_option("--thresholds", win_thresholds)->delimiter(',');
	win->add_option("--delta", win_delta)->check(CLI::NonNegativeNumber);
	win->add_option("--horizon", win_horizon)->check(CLI::PositiveNumber);

	// train
	auto* train = app.add_subcommand("train", "Select hyperparameters by CV and fit one model");
	std::string train_config, train_out, train_method;
	std::optional<int> train_delta, train_horizon;
	std::optional<std::uint64_t> train_seed;
	train->add_option("--config", train_config, "Experiment JSON (data, grid, cv settings)")
	    ->required()
	    ->check(CLI::ExistingFile);
	train->add_option("--out", train_out, "Model JSON to write")->required();
	train->add_option("--method", train_method);
	train->add_option("--delta", train_delta)->check(CLI::NonNegativeNumber);
	train->add_option("--horizon", train_horizon)->check(CLI::PositiveNumber);
	train->add_option("--seed", train_seed);

	// evaluate
	auto* eval = app.add_subcommand("evaluate", "Score a stored model on a series");
	std::string eval_model, eval_data, eval_out;
	eval->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
	eval->add_option("--data", eval_data)->required()->check(CLI::ExistingFile);
	eval->add_option("--out", eval_out, "Optional report CSV");

	// experiment
	auto* exp = app.add_subcommand("experiment", "Full protocol: splits x methods x repeats with nested CV");
	std::string exp_config, exp_out, exp_method;
	std::optional<int> exp_repeats, exp_delta, exp_horizon;
	std::optional<std::uint64_t> exp_seed;
	exp->add_option("--config", exp_config)->required()->check(CLI::ExistingFile);
	exp->add_option("--out", exp_out, "Output directory")->required();
	exp->add_option("--method", exp_method, "Comma-separated override of the configured methods");
	exp->add_option("--repeats", exp_repeats)->check(CLI::PositiveNumber);
	exp->add_option("--seed", exp_seed);
	exp->add_option("--delta", exp_delta)->check(CLI::NonNegativeNumber);
	exp->add_option("--horizon", exp_horizon)->check(CLI::PositiveNumber);

	// gradcheck
	auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of all analytic derivatives");
	GradCheckOptions gopts;
	grad->add_option("--seed", gopts.seed);
	grad->add_option("--trials", gopts.trials)->check(CLI::PositiveNumber);
	grad->add_flag("--corrupt-gradient", gopts.corrupt_gradient)->group(""); // negative-control hook

	// trace
	auto* trace = app.add_subcommand("trace", "Per-pattern predictions, gate output and class probabilities");
	std::string trace_model, trace_data, trace_out;
	trace->add_option("--model", trace_model)->required()->check(CLI::ExistingFile);
	trace->add_option("--data", trace_data)->required()->check(CLI::ExistingFile);
	trace->add_option("--out", trace_out)->required();

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e, out, err);
		return code == 0 ? kSuccess : kUsageError;
	}

	try {
		if (*gen) {
			GenConfig cfg = gcfg;
			if (!gen_config.empty())
				cfg = parse_gen_config(read_text(gen_config));
			cfg.validate();
			write_series(gen_out, generate(cfg));
			out << "wrote " << gen_out << '\n';
		} else if (*win) {
			if ((win_classes == 0) == win_thresholds.empty()) {
				err << "windows: give exactly one of --classes or --thresholds\n";
				return kUsageError;
			}
			const OrdinalScale scale = scale_for(win_thresholds, win_classes);
			const auto ds = build_windows(read_series(win_data, scale), win_delta, win_horizon, scale);
			out << "patterns " << ds.size() << "\ndistribution";
			for (auto c : class_distribution(ds))
				out << ' ' << c;
			out << "\npersistence " << format_double(persistence_rate(ds)) << '\n';
			if (!win_out.empty())
				write_windows(win_out, ds);
		} else if (*train) {
			ExperimentConfig cfg = load_experiment_config(train_config);
			if (!train_method.empty())
				cfg.methods = parse_methods(train_method);
			if (train_delta)
				cfg.delta = *train_delta;
			if (train_horizon)
				cfg.horizon = *train_horizon;
			if (train_seed)
				cfg.spec.seed = *train_seed;
			cfg.spec.method = cfg.methods.front();
			cfg.spec.threads = threads;
			const OrdinalScale scale = scale_for(cfg.data.thresholds, cfg.data.num_classes);
			const auto ds = build_windows(load_source(cfg.data), cfg.delta, cfg.horizon, scale);
			ModelBundle b;
			b.model = pgmoe::train_method(ds, cfg.spec);
			b.num_classes = scale.num_classes();
			b.thresholds = scale.thresholds();
			b.delta = cfg.delta;
			b.horizon = cfg.horizon;
			b.standardization = ds.standardization;
			save_model(train_out, b);
			for (const auto& w : b.model.warnings)
				err << "warning: " << w << '\n';
			out << to_string(b.model.method) << " M=" << b.model.hyper.hidden_units
			    << " iter=" << b.model.hyper.iterations << " lambda=" << format_double(b.model.hyper.lambda)
			    << " -> " << train_out << '\n';
		} else if (*eval) {
			WindowedDataset ds;
			const ModelBundle b = load_bundle_and_windows(eval_model, eval_data, ds);
			const EvalReport r = evaluate_model(b.model, ds);
			print_report(out, r);
			if (!eval_out.empty()) {
				ExperimentReport rep;
				rep.num_classes = b.num_classes;
				rep.runs.push_back({b.model.method, 0, 0, b.model.hyper, r});
				write_report(rep, eval_out);
			}
		} else if (*exp) {
			ExperimentConfig cfg = load_experiment_config(exp_config);
			if (!exp_method.empty())
				cfg.methods = parse_methods(exp_method);
			if (exp_repeats)
				cfg.spec.repeats = *exp_repeats;
			if (exp_seed)
				cfg.spec.seed = *exp_seed;
			if (exp_delta)
				cfg.delta = *exp_delta;
			if (exp_horizon)
				cfg.horizon = *exp_horizon;
			if (app.count("--threads") || std::getenv("PGMOE_THREADS"))
				cfg.spec.threads = threads;
			cfg.spec.validate();
			return cmd_experiment(cfg, exp_out, out);
		} else if (*grad) {
			return cmd_gradcheck(gopts, out);
		} else if (*trace) {
			return cmd_trace(trace_model, trace_data, trace_out);
		}
	} catch (const std::exception& e) {
		err << "error: " << e.what() << '\n';
		return kDomainError;
	}
	return kSuccess;
}

} // namespace pgmoe::cli
