#include <pgmoe/training.hpp>

#include "objectives.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace pgmoe {

std::string_view to_string(Method m) noexcept
{
	switch (m) {
	case Method::Persist: return "Persist";
	case Method::POM: return "POM";
	case Method::NNPOM: return "NNPOM";
	case Method::ITME: return "ITME";
	case Method::STME: return "STME";
	case Method::STMEIC: return "STMEIC";
	}
	return "?";
}

Method parse_method(std::string_view name)
{
	for (Method m : {Method::Persist, Method::POM, Method::NNPOM, Method::ITME, Method::STME, Method::STMEIC})
		if (name == to_string(m))
			return m;
	throw DomainError("unknown method '" + std::string(name) + "'");
}

bool is_stochastic(Method m) noexcept
{
	return m != Method::Persist;
}

std::string_view to_string(SelectionMetric m) noexcept
{
	switch (m) {
	case SelectionMetric::AMAE: return "amae";
	case SelectionMetric::MMAE: return "mmae";
	case SelectionMetric::Acc: return "acc";
	case SelectionMetric::GMS: return "gms";
	}
	return "?";
}

SelectionMetric parse_selection_metric(std::string_view name)
{
	for (auto m : {SelectionMetric::AMAE, SelectionMetric::MMAE, SelectionMetric::Acc, SelectionMetric::GMS})
		if (name == to_string(m))
			return m;
	throw DomainError("unknown selection metric '" + std::string(name) + "'");
}

void TrainSpec::validate() const
{
	if (repeats < 1)
		throw DomainError("repeats must be at least 1");
	if (cv_folds < 2)
		throw DomainError("cv_folds must be at least 2");
	if (threads < 1)
		throw DomainError("threads must be at least 1");
	if (grid.hidden_units.empty() || grid.iterations.empty() || grid.lambdas.empty())
		throw DomainError("every hyperparameter grid axis needs at least one value");
	for (int m : grid.hidden_units)
		if (m < 1)
			throw DomainError("grid hidden unit counts must be positive");
	for (int it : grid.iterations)
		if (it < 1)
			throw DomainError("grid iteration counts must be positive");
	for (double l : grid.lambdas)
		if (!(l >= 0.0))
			throw DomainError("grid regularisation values must be non-negative");
}

std::vector<double> FittedModel::probs(const WindowedPattern& pattern, int num_classes) const
{
	switch (method) {
	case Method::Persist: {
		std::vector<double> p(static_cast<std::size_t>(num_classes), 0.0);
		p.at(pattern.current_label.index()) = 1.0;
		return p;
	}
	case Method::POM: return class_probs(pattern.z, *linear);
	case Method::NNPOM: return class_probs(pattern.z, *network);
	default: return mixture_probs(pattern, *mixture);
	}
}

OrdinalLabel FittedModel::predict(const WindowedPattern& pattern) const
{
	if (method == Method::Persist)
		return pattern.current_label;
	int q = 0;
	if (linear)
		q = linear->num_classes;
	else if (network)
		q = network->config.num_classes;
	else if (mixture)
		q = mixture->expert.config.num_classes;
	else
		throw DomainError("model has no parameters");
	return argmax_label(probs(pattern, q));
}

std::optional<double> FittedModel::gate_alpha(const WindowedPattern& pattern) const
{
	if (!mixture)
		return std::nullopt;
	return gate(pattern.z, mixture->gate_weights);
}

std::vector<OrdinalLabel> predict_all(const FittedModel& model, const WindowedDataset& ds)
{
	std::vector<OrdinalLabel> out;
	out.reserve(ds.size());
	for (const auto& p : ds.patterns)
		out.push_back(model.predict(p));
	return out;
}

EvalReport evaluate_model(const FittedModel& model, const WindowedDataset& ds)
{
	std::vector<OrdinalLabel> truth;
	truth.reserve(ds.size());
	for (const auto& p : ds.patterns)
		truth.push_back(p.target);
	return evaluate(truth, predict_all(model, ds), ds.num_classes());
}

std::vector<std::size_t> problematic_patterns(const WindowedDataset& ds)
{
	std::vector<std::size_t> idx;
	for (std::size_t t = 0; t < ds.size(); ++t)
		if (ds.patterns[t].target != ds.patterns[t].current_label)
			idx.push_back(t);
	return idx;
}

FittedModel train_persist()
{
	return FittedModel{};
}

namespace {

/// Position of the best trace entry within the first `limit` iterations.
std::size_t best_within(const std::vector<double>& trace, int limit)
{
	std::size_t best = 0;
	for (std::size_t i = 1; i <= static_cast<std::size_t>(limit) && i < trace.size(); ++i)
		if (trace[i] < trace[best])
			best = i;
	return best;
}

struct RunOutcome {
	MinimizeResult result;
	std::vector<int> budgets; // checkpoints followed by the full budget
};

RunOutcome run_optimizer(const Objective& objective, std::vector<double> init, int iterations,
                         const std::vector<int>& checkpoints)
{
	MinimizeOptions opts;
	opts.max_iters = iterations;
	opts.checkpoints = checkpoints;
	RunOutcome out;
	out.result = minimize(objective, std::move(init), opts);
	out.budgets = checkpoints;
	out.budgets.push_back(iterations);
	out.result.checkpoint_params.push_back(out.result.params);
	return out;
}

std::vector<FittedModel> models_from(const RunOutcome& run, Method method, const Hyperparameters& hyper,
                                     std::uint64_t seed, auto&& assign)
{
	std::vector<FittedModel> models;
	for (std::size_t c = 0; c < run.budgets.size(); ++c) {
		FittedModel m;
		m.method = method;
		m.hyper = hyper;
		m.hyper.iterations = run.budgets[c];
		m.seed = seed;
		m.best_iteration = best_within(run.result.trace, run.budgets[c]);
		m.final_loss = run.result.trace[m.best_iteration];
		assign(m, run.result.checkpoint_params[c]);
		models.push_back(std::move(m));
	}
	return models;
}

void check_checkpoints(const std::vector<int>& checkpoints, int iterations)
{
	for (int c : checkpoints)
		if (c < 1 || c > iterations)
			throw DomainError("iteration checkpoint outside the training budget");
}

} // namespace

std::vector<double> fit_logistic_gate(const WindowedDataset& train, std::span<const int> binary_labels, int iterations,
                                      double lambda, std::vector<int> checkpoints,
                                      std::vector<std::vector<double>>* checkpoint_weights)
{
	if (binary_labels.size() != train.size())
		throw DomainError("one binary label per pattern is required");
	const auto objective = detail::logistic_objective(train, binary_labels, lambda);
	auto run = run_optimizer(objective, std::vector<double>(train.input_dim() + 1, 0.0), iterations, checkpoints);
	if (checkpoint_weights)
		*checkpoint_weights = run.result.checkpoint_params;
	return run.result.params;
}

std::vector<FittedModel> fit_with_checkpoints(Method method, const WindowedDataset& train, const Hyperparameters& hyper,
                                              std::uint64_t seed, const std::vector<int>& checkpoints)
{
	if (method == Method::Persist)
		return std::vector<FittedModel>(checkpoints.size() + 1, train_persist());
	if (train.empty())
		throw DomainError("cannot train on an empty dataset");
	check_checkpoints(checkpoints, hyper.iterations);

	const int input_dim = static_cast<int>(train.input_dim());
	const int q = train.num_classes();

	switch (method) {
	case Method::POM: {
		const auto objective = detail::linear_objective(train, 0.0);
		const auto run = run_optimizer(objective, init_pom_params(input_dim, q, seed).flatten(), hyper.iterations,
		                               checkpoints);
		return models_from(run, method, Hyperparameters{0, hyper.iterations, 0.0}, seed,
		                   [&](FittedModel& m, const std::vector<double>& s) {
			                   m.linear = PomParams::unflatten(input_dim, q, s);
		                   });
	}
	case Method::NNPOM: {
		const NnpomConfig cfg{hyper.hidden_units, input_dim, q};
		const auto objective = detail::network_objective(train, cfg, LossConfig::for_training(train, false, hyper.lambda));
		const auto run = run_optimizer(objective, init_params(cfg, seed).flatten(), hyper.iterations, checkpoints);
		return models_from(run, method, hyper, seed, [&](FittedModel& m, const std::vector<double>& s) {
			m.network = NnpomParams::unflatten(cfg, s);
		});
	}
	case Method::STME:
	case Method::STMEIC: {
		const NnpomConfig cfg{hyper.hidden_units, input_dim, q};
		const bool weighted = method == Method::STMEIC;
		const auto objective =
		    detail::mixture_objective(train, cfg, LossConfig::for_training(train, weighted, hyper.lambda));
		const auto run =
		    run_optimizer(objective, init_mixture_params(cfg, seed).flatten(), hyper.iterations, checkpoints);
		return models_from(run, method, hyper, seed, [&](FittedModel& m, const std::vector<double>& s) {
			m.mixture = MixtureParams::unflatten(cfg, s);
		});
	}
	case Method::ITME: {
		const auto problematic = problematic_patterns(train);
		if (problematic.empty())
			throw DomainError("independent training needs at least one pattern where persistence fails");
		std::vector<int> persistent(train.size(), 1);
		for (std::size_t t : problematic)
			persistent[t] = 0;

		std::vector<std::vector<double>> gates;
		fit_logistic_gate(train, persistent, hyper.iterations, hyper.lambda, checkpoints, &gates);

		const WindowedDataset hard = train.subset(problematic);
		std::vector<std::string> warnings;
		const auto counts = class_distribution(hard);
		for (std::size_t c = 0; c < counts.size(); ++c)
			if (counts[c] == 0)
				warnings.push_back("problematic subset has no pattern of class C" + std::to_string(c + 1));

		const NnpomConfig cfg{hyper.hidden_units, input_dim, q};
		const auto objective = detail::network_objective(hard, cfg, LossConfig::for_training(hard, false, hyper.lambda));
		const auto run = run_optimizer(objective, init_params(cfg, seed).flatten(), hyper.iterations, checkpoints);
		std::size_t slot = 0;
		return models_from(run, method, hyper, seed, [&](FittedModel& m, const std::vector<double>& s) {
			m.mixture = MixtureParams{gates.at(slot++), NnpomParams::unflatten(cfg, s)};
			m.warnings = warnings;
		});
	}
	case Method::Persist: break;
	}
	throw std::logic_error("unhandled method");
}

FittedModel fit(Method method, const WindowedDataset& train, const Hyperparameters& hyper, std::uint64_t seed)
{
	return fit_with_checkpoints(method, train, hyper, seed, {}).back();
}

std::vector<std::pair<std::size_t, std::size_t>> temporal_folds(std::size_t n, int folds)
{
	if (folds < 2)
		throw DomainError("cross-validation needs at least two folds");
	const auto k = static_cast<std::size_t>(folds);
	if (n < k)
		throw DomainError("training set has " + std::to_string(n) + " patterns, fewer than " + std::to_string(folds) +
		                  " folds");
	std::vector<std::pair<std::size_t, std::size_t>> out;
	for (std::size_t f = 0; f < k; ++f)
		out.emplace_back(f * n / k, (f + 1) * n / k);
	return out;
}

std::vector<Hyperparameters> grid_points(Method method, const HyperGrid& grid)
{
	auto m_axis = grid.hidden_units;
	auto it_axis = grid.iterations;
	auto l_axis = grid.lambdas;
	std::sort(m_axis.begin(), m_axis.end());
	std::sort(it_axis.begin(), it_axis.end());
	std::sort(l_axis.begin(), l_axis.end(), std::greater<>());
	m_axis.erase(std::unique(m_axis.begin(), m_axis.end()), m_axis.end());
	it_axis.erase(std::unique(it_axis.begin(), it_axis.end()), it_axis.end());
	l_axis.erase(std::unique(l_axis.begin(), l_axis.end()), l_axis.end());

	std::vector<Hyperparameters> out;
	switch (method) {
	case Method::Persist: out.push_back({}); break;
	case Method::POM:
		for (int it : it_axis)
			out.push_back({0, it, 0.0});
		break;
	default:
		for (int m : m_axis)
			for (int it : it_axis)
				for (double l : l_axis)
					out.push_back({m, it, l});
	}
	return out;
}

namespace {

/// Selection score, lower is better.
double selection_score(const EvalReport& r, SelectionMetric metric)
{
	switch (metric) {
	case SelectionMetric::AMAE: return r.amae;
	case SelectionMetric::MMAE: return r.mmae;
	case SelectionMetric::Acc: return -r.acc;
	case SelectionMetric::GMS: return -r.gms;
	}
	return r.amae;
}

} // namespace

CvResult cross_validate(const WindowedDataset& train, const TrainSpec& spec)
{
	spec.validate();
	CvResult cv;
	const auto points = grid_points(spec.method, spec.grid);
	if (spec.method == Method::Persist) {
		cv.chosen = points.front();
		cv.scores.push_back({cv.chosen, 0.0, {}});
		return cv;
	}
	const auto folds = temporal_folds(train.size(), spec.cv_folds);

	// one training run per (hidden units, lambda, fold); the iteration axis comes from checkpoints
	std::vector<std::pair<int, double>> groups;
	std::vector<int> budgets;
	for (const auto& h : points) {
		if (std::find(groups.begin(), groups.end(), std::pair{h.hidden_units, h.lambda}) == groups.end())
			groups.emplace_back(h.hidden_units, h.lambda);
		if (std::find(budgets.begin(), budgets.end(), h.iterations) == budgets.end())
			budgets.push_back(h.iterations);
	}
	std::sort(budgets.begin(), budgets.end());
	const int max_budget = budgets.back();
	std::vector<int> checkpoints(budgets.begin(), budgets.end() - 1);

	const std::size_t n_tasks = groups.size() * folds.size();
	std::vector<std::vector<double>> task_scores(n_tasks);
	std::vector<std::string> task_flags(n_tasks);

	detail::parallel_for(n_tasks, spec.threads, [&](std::size_t task) {
		const auto [m, lambda] = groups[task / folds.size()];
		const std::size_t f = task % folds.size();
		const auto [lo, hi] = folds[f];

		std::vector<std::size_t> fit_idx, val_idx;
		for (std::size_t i = 0; i < train.size(); ++i)
			(i >= lo && i < hi ? val_idx : fit_idx).push_back(i);
		for (std::size_t i : fit_idx)
			if (i >= lo && i < hi)
				throw std::logic_error("cross-validation fold overlaps its training indices");
		const WindowedDataset fit_part = train.subset(fit_idx);
		const WindowedDataset val_part = train.subset(val_idx);

		auto& scores = task_scores[task];
		try {
			const auto models =
			    fit_with_checkpoints(spec.method, fit_part, {m, max_budget, lambda}, spec.seed, checkpoints);
			bool missing = false;
			for (const auto& model : models) {
				const auto report = evaluate_model(model, val_part);
				missing = missing || report.missing_classes;
				scores.push_back(selection_score(report, spec.selection_metric));
			}
			if (missing)
				task_flags[task] = "fold " + std::to_string(f + 1) + " validation block lacks a class";
		} catch (const DomainError& e) {
			scores.assign(budgets.size(), std::numeric_limits<double>::infinity());
			task_flags[task] = "fold " + std::to_string(f + 1) + " (M=" + std::to_string(m) + "): " + e.what();
		}
	});

	for (const auto& flag : task_flags)
		if (!flag.empty() && std::find(cv.flags.begin(), cv.flags.end(), flag) == cv.flags.end())
			cv.flags.push_back(flag);

	double best = std::numeric_limits<double>::infinity();
	bool have_best = false;
	for (const auto& h : points) {
		const auto g = static_cast<std::size_t>(
		    std::find(groups.begin(), groups.end(), std::pair{h.hidden_units, h.lambda}) - groups.begin());
		const auto b = static_cast<std::size_t>(
		    std::find(budgets.begin(), budgets.end(), h.iterations) - budgets.begin());
		GridScore score{h, 0.0, {}};
		for (std::size_t f = 0; f < folds.size(); ++f)
			score.fold_metrics.push_back(task_scores[g * folds.size() + f][b]);
		score.mean_metric = std::accumulate(score.fold_metrics.begin(), score.fold_metrics.end(), 0.0) /
		                    static_cast<double>(folds.size());
		// points are in tie-break order, so only a strict improvement replaces the incumbent
		if (!have_best || score.mean_metric < best) {
			best = score.mean_metric;
			cv.chosen = h;
			have_best = true;
		}
		cv.scores.push_back(std::move(score));
	}
	return cv;
}

FittedModel train_method(const WindowedDataset& train, const TrainSpec& spec)
{
	if (spec.method == Method::Persist)
		return train_persist();
	const CvResult cv = cross_validate(train, spec);
	FittedModel model = fit(spec.method, train, cv.chosen, spec.seed);
	model.warnings.insert(model.warnings.end(), cv.flags.begin(), cv.flags.end());
	return model;
}

FittedModel train_itme(const WindowedDataset& train, const TrainSpec& spec)
{
	TrainSpec s = spec;
	s.method = Method::ITME;
	return train_method(train, s);
}

FittedModel train_stme(const WindowedDataset& train, const TrainSpec& spec, bool weighted)
{
	TrainSpec s = spec;
	s.method = weighted ? Method::STMEIC : Method::STME;
	return train_method(train, s);
}

std::vector<Method> ExperimentReport::methods() const
{
	std::vector<Method> out;
	for (const auto& r : runs)
		if (std::find(out.begin(), out.end(), r.method) == out.end())
			out.push_back(r.method);
	return out;
}

namespace {

MetricSummary summarize_values(const std::vector<double>& v)
{
	MetricSummary s;
	if (v.empty())
		return s;
	s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
	if (v.size() > 1) {
		double ss = 0.0;
		for (double x : v)
			ss += (x - s.mean) * (x - s.mean);
		s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
	}
	return s;
}

} // namespace

std::vector<MethodSummary> ExperimentReport::summarize() const
{
	std::vector<MethodSummary> out;
	for (Method m : methods()) {
		MethodSummary ms;
		ms.method = m;
		std::set<int> split_ids;
		for (const auto& r : runs)
			if (r.method == m)
				split_ids.insert(r.split);
		for (int s : split_ids) {
			std::vector<double> acc, amae, mmae, gms;
			for (const auto& r : runs)
				if (r.method == m && r.split == s) {
					acc.push_back(r.report.acc);
					amae.push_back(r.report.amae);
					mmae.push_back(r.report.mmae);
					gms.push_back(r.report.gms);
				}
			SplitSummary ss{s, summarize_values(acc), summarize_values(amae), summarize_values(mmae),
			                summarize_values(gms)};
			ms.splits.push_back(ss);
		}
		const double k = static_cast<double>(ms.splits.size());
		for (const auto& ss : ms.splits) {
			ms.acc += ss.acc.mean / k;
			ms.amae += ss.amae.mean / k;
			ms.mmae += ss.mmae.mean / k;
			ms.gms += ss.gms.mean / k;
			ms.acc_sd += ss.acc.stddev / k;
			ms.amae_sd += ss.amae.stddev / k;
			ms.mmae_sd += ss.mmae.stddev / k;
			ms.gms_sd += ss.gms.stddev / k;
		}
		out.push_back(std::move(ms));
	}
	return out;
}

ExperimentReport run_experiment(const std::vector<DataSplit>& splits, const std::vector<Method>& methods,
                                const TrainSpec& spec)
{
	spec.validate();
	if (splits.empty())
		throw DomainError("experiment needs at least one split");
	if (methods.empty())
		throw DomainError("experiment needs at least one method");

	ExperimentReport report;
	report.num_classes = splits.front().train.num_classes();
	for (std::size_t s = 0; s < splits.size(); ++s) {
		const auto& split = splits[s];
		for (Method method : methods) {
			TrainSpec ms = spec;
			ms.method = method;
			const Hyperparameters hyper =
			    method == Method::Persist ? Hyperparameters{} : cross_validate(split.train, ms).chosen;

			std::vector<RunRecord> records(static_cast<std::size_t>(spec.repeats));
			detail::parallel_for(records.size(), spec.threads, [&](std::size_t r) {
				const FittedModel model = method == Method::Persist
				                              ? train_persist()
				                              : fit(method, split.train, hyper, spec.seed + r);
				records[r] = RunRecord{method, static_cast<int>(s), static_cast<int>(r), hyper,
				                       evaluate_model(model, split.test)};
			});
			report.runs.insert(report.runs.end(), records.begin(), records.end());
		}
	}
	return report;
}

ExperimentReport run_experiment(const std::vector<DataSplit>& splits, const TrainSpec& spec)
{
	return run_experiment(splits, std::vector<Method>{spec.method}, spec);
}

} // namespace pgmoe

namespace pgmoe {

std::vector<DataSplit> build_splits(std::span<const TimeSeriesRecord> series, const OrdinalScale& scale, int delta,
                                    int horizon, int n_splits, double test_fraction)
{
	if (n_splits < 1)
		throw DomainError("at least one split is required");
	const std::size_t n = series.size();
	std::vector<std::span<const TimeSeriesRecord>> blocks;
	std::vector<std::pair<std::vector<std::size_t>, std::size_t>> layout; // (train blocks, test block)
	if (n_splits == 1) {
		if (!(test_fraction > 0.0 && test_fraction < 1.0))
			throw DomainError("test_fraction must lie in (0, 1)");
		const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - test_fraction)));
		blocks = {series.first(cut), series.subspan(cut)};
		layout.push_back({{0}, 1});
	} else {
		const auto k = static_cast<std::size_t>(n_splits);
		for (std::size_t b = 0; b < k; ++b)
			blocks.push_back(series.subspan(b * n / k, (b + 1) * n / k - b * n / k));
		for (std::size_t b = 0; b < k; ++b) {
			std::vector<std::size_t> rest;
			for (std::size_t o = 0; o < k; ++o)
				if (o != b)
					rest.push_back(o);
			layout.push_back({rest, b});
		}
	}

	std::vector<WindowedDataset> raw;
	for (const auto& block : blocks)
		raw.push_back(build_raw_windows(block, delta, horizon, scale));

	std::vector<DataSplit> splits;
	for (const auto& [train_blocks, test_block] : layout) {
		std::vector<WindowedDataset> parts;
		for (std::size_t b : train_blocks)
			parts.push_back(raw[b]);
		DataSplit split{concatenate(parts), raw[test_block]};
		const Standardization stats = fit_standardization(split.train);
		standardize(split.train, stats);
		standardize(split.test, stats);
		splits.push_back(std::move(split));
	}
	return splits;
}

} // namespace pgmoe
