// Prints one PASS/FAIL line per acceptance criterion.

#include "cli.hpp"

#include <pgmoe/datagen.hpp>
#include <pgmoe/dataio.hpp>
#include <pgmoe/gradcheck.hpp>
#include <pgmoe/metrics.hpp>
#include <pgmoe/mixture.hpp>
#include <pgmoe/optimizer.hpp>
#include <pgmoe/training.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace pgmoe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
	bool pass = false;
	std::string detail;
};

std::string fmt(double v, int digits = 6)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*g", digits, v);
	return buf;
}

WindowedPattern random_pattern(std::mt19937_64& rng, int dim, int q)
{
	std::normal_distribution<double> normal(0.0, 1.0);
	std::uniform_int_distribution<int> label(1, q);
	WindowedPattern p;
	p.z.resize(static_cast<std::size_t>(dim));
	for (auto& v : p.z)
		v = 2.0 * normal(rng);
	p.current_label = OrdinalLabel(label(rng));
	p.target = OrdinalLabel(label(rng));
	return p;
}

MixtureParams random_mixture(std::mt19937_64& rng, const NnpomConfig& cfg, double spread)
{
	std::normal_distribution<double> normal(0.0, spread);
	std::vector<double> flat(static_cast<std::size_t>(cfg.input_dim + 1) + cfg.parameter_count());
	for (auto& v : flat)
		v = normal(rng);
	return MixtureParams::unflatten(cfg, flat);
}

Objective mixture_objective(const WindowedDataset& ds, const NnpomConfig& cfg, const LossConfig& loss_cfg)
{
	return [&ds, cfg, loss_cfg](std::span<const double> s) {
		auto r = loss_and_gradient(ds, MixtureParams::unflatten(cfg, s), loss_cfg);
		return Evaluation{r.value, std::move(r.gradient)};
	};
}

Outcome criterion_gradient()
{
	GradCheckOptions opt;
	opt.trials = 100;
	const auto r = run_gradient_check(opt);
	return {r.passed() && r.trials >= 100,
	        std::to_string(r.trials) + " configurations, " + std::to_string(r.components) + " components, " +
	            std::to_string(r.failures.size()) + " outside rel 1e-5 / abs 1e-8, worst rel err for |g| >= 1e-4 " +
	            fmt(r.worst_relative_error)};
}

Outcome criterion_normalization()
{
	std::mt19937_64 rng(7);
	const int qs[] = {2, 3, 4, 6};
	const int ms[] = {1, 5, 25};
	double worst = 0.0;
	bool in_range = true;
	for (int draw = 0; draw < 10000; ++draw) {
		const int q = qs[draw % 4];
		const int m = ms[(draw / 4) % 3];
		const int dim = 1 + draw % 7;
		const NnpomConfig cfg{m, dim, q};
		const auto params = random_mixture(rng, cfg, 1.5);
		const auto pat = random_pattern(rng, dim, q);
		for (const auto& p : {class_probs(pat.z, params.expert), mixture_probs(pat, params)}) {
			double sum = 0.0;
			for (double v : p) {
				sum += v;
				in_range = in_range && v >= 0.0 && v <= 1.0;
			}
			worst = std::max(worst, std::abs(sum - 1.0));
		}
	}
	return {worst <= 1e-10 && in_range, "10000 draws, max |sum - 1| = " + fmt(worst) +
	                                        (in_range ? ", all entries in [0,1]" : ", entry outside [0,1]")};
}

Outcome criterion_threshold_monotonicity()
{
	GenConfig g;
	g.num_steps = 600;
	g.num_classes = 5;
	g.switch_signal_strength = 2.0;
	g.base_persistence = 0.7;
	g.seed = 11;
	const auto ds = build_windows(generate(g), 1, 1, OrdinalScale::with_classes(5));
	const NnpomConfig cfg{5, static_cast<int>(ds.input_dim()), 5};
	const auto loss_cfg = LossConfig::for_training(ds, true, 0.001);
	int checked = 0;
	bool ok = true;
	MinimizeOptions opt;
	opt.max_iters = 1200;
	opt.observer = [&](int, std::span<const double> s, const Rprop&) {
		const auto b = MixtureParams::unflatten(cfg, s).expert.thresholds();
		for (std::size_t i = 1; i < b.size(); ++i)
			ok = ok && b[i - 1] <= b[i];
		++checked;
	};
	minimize(mixture_objective(ds, cfg, loss_cfg), init_mixture_params(cfg, 3).flatten(), opt);
	return {ok && checked >= 1000, std::to_string(checked) + " iterates checked"};
}

Outcome criterion_gate_saturation()
{
	GenConfig g;
	g.num_steps = 10002;
	g.base_persistence = 0.8;
	g.seed = 5;
	const auto ds = build_windows(generate(g), 1, 1, OrdinalScale::with_classes(4));
	const NnpomConfig cfg{5, static_cast<int>(ds.input_dim()), 4};
	FittedModel model;
	model.method = Method::STME;
	model.mixture = init_mixture_params(cfg, 9);
	model.mixture->gate_weights[0] = 40.0;
	std::size_t agree = 0;
	for (const auto& p : ds.patterns)
		agree += model.predict(p) == p.current_label ? 1 : 0;
	const double acc = evaluate_model(model, ds).acc;
	const double expected = 100.0 * persistence_rate(ds);
	return {agree == ds.size() && acc == expected && ds.size() >= 10000,
	        std::to_string(ds.size()) + " patterns, persistence agreement " + std::to_string(agree) + ", Acc " +
	            fmt(acc, 17) + " vs " + fmt(expected, 17)};
}

Outcome criterion_metrics()
{
	std::mt19937_64 rng(3);
	bool exact = true, ordered = true, gms_zero = true;
	for (int set = 0; set < 1000; ++set) {
		const int q = 2 + set % 5;
		std::uniform_int_distribution<int> label(1, q);
		const std::size_t n = 1 + rng() % 60;
		std::vector<OrdinalLabel> truth(n), pred(n);
		for (std::size_t i = 0; i < n; ++i) {
			truth[i] = OrdinalLabel(label(rng));
			pred[i] = OrdinalLabel(label(rng));
		}
		const auto s = evaluate(truth, pred, q);
		const auto c = evaluate(ConfusionMatrix(truth, pred, q));
		exact = exact && s.acc == c.acc && s.amae == c.amae && s.mmae == c.mmae && s.gms == c.gms &&
		        s.acc == accuracy(truth, pred) && s.amae == amae(truth, pred, q) && s.mmae == mmae(truth, pred, q) &&
		        s.gms == gms(truth, pred, q);
		ordered = ordered && s.amae <= s.mmae && s.mmae <= q - 1;
		for (std::size_t c2 = 0; c2 < s.per_class_sensitivity.size(); ++c2)
			if (s.n_per_class[c2] > 0 && s.per_class_sensitivity[c2] == 0.0)
				gms_zero = gms_zero && s.gms == 0.0;
	}
	return {exact && ordered && gms_zero, std::string("streaming == confusion: ") + (exact ? "yes" : "no") +
	                                          ", AMAE <= MMAE <= Q-1: " + (ordered ? "yes" : "no") +
	                                          ", GMS zero rule: " + (gms_zero ? "yes" : "no")};
}

Outcome criterion_optimizer()
{
	auto quadratic = [](std::span<const double> x) { return Evaluation{x[0] * x[0], {2.0 * x[0]}}; };
	auto rosenbrock = [](std::span<const double> x) {
		const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
		return Evaluation{a * a + 100.0 * b * b, {-2.0 * a - 400.0 * x[0] * b, 200.0 * b}};
	};
	bool ok = true;
	double worst_x = 0.0;
	for (std::uint64_t seed = 1; seed <= 5; ++seed) {
		std::mt19937_64 rng(seed);
		std::uniform_real_distribution<double> start(-10.0, 10.0);
		const double x0 = start(rng);
		MinimizeOptions opt;
		opt.max_iters = 200;
		const auto a = minimize(quadratic, {x0}, opt);
		const auto b = minimize(quadratic, {x0}, opt);
		worst_x = std::max(worst_x, std::abs(a.params[0]));
		ok = ok && std::abs(a.params[0]) < 1e-6 && a.trace == b.trace;
	}
	MinimizeOptions opt;
	opt.max_iters = 2000;
	const auto r1 = minimize(rosenbrock, {-1.2, 1.0}, opt);
	const auto r2 = minimize(rosenbrock, {-1.2, 1.0}, opt);
	const double best = r1.trace[r1.best_iteration];
	const bool repeatable = r1.trace == r2.trace && r1.params == r2.params;
	ok = ok && best < 1e-4 && repeatable;
	return {ok, "x^2 worst |x| = " + fmt(worst_x) + ", Rosenbrock loss after 2000 iterations = " + fmt(best) +
	                (repeatable ? ", repeat runs identical" : ", repeat runs differ")};
}

Outcome criterion_end_to_end()
{
	const auto t0 = std::chrono::steady_clock::now();
	GenConfig g;
	g.num_classes = 4;
	g.base_persistence = 0.85;
	g.switch_signal_strength = 5.0;
	g.feature_dim = 3;
	g.seed = 2024;
	const double bayes = oracle_bayes_accuracy(g, 200000);

	g.num_steps = 5002;
	const auto train_series = generate(g);
	g.num_steps = 2002;
	g.seed = 2025;
	const auto test_series = generate(g);
	const auto scale = OrdinalScale::with_classes(4);
	DataSplit split;
	split.train = build_windows(train_series, 1, 1, scale);
	split.test = build_windows(test_series, 1, 1, scale, &split.train.standardization);

	TrainSpec spec;
	spec.grid.hidden_units = {5, 10};
	spec.grid.iterations = {250, 500};
	spec.grid.lambdas = {0.0, 0.001};
	spec.repeats = 1;
	spec.threads = 1;
	const auto report = run_experiment({split}, {Method::Persist, Method::STME, Method::STMEIC}, spec);
	double acc[3]{}, am[3]{};
	for (const auto& s : report.summarize()) {
		const int i = s.method == Method::Persist ? 0 : s.method == Method::STME ? 1 : 2;
		acc[i] = s.acc;
		am[i] = s.amae;
	}
	const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	const bool ok = bayes >= 0.95 && split.train.size() == 5000 && split.test.size() == 2000 &&
	                acc[1] >= acc[0] + 3.0 && am[2] < am[0] && secs < 600.0;
	return {ok, "bayes " + fmt(bayes, 4) + ", Acc Persist " + fmt(acc[0], 5) + " STME " + fmt(acc[1], 5) +
	                ", AMAE Persist " + fmt(am[0], 4) + " STMEIC " + fmt(am[2], 4) + ", " + fmt(secs, 4) + " s"};
}

Outcome criterion_itme()
{
	std::mt19937_64 rng(17);
	bool same = true;
	std::size_t total = 0;
	for (int d = 0; d < 100; ++d) {
		GenConfig g;
		g.num_steps = 200 + static_cast<int>(rng() % 300);
		g.num_classes = 2 + static_cast<int>(rng() % 4);
		g.base_persistence = 0.6 + 0.35 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
		g.gap_probability = d % 3 == 0 ? 0.05 : 0.0;
		g.seed = rng();
		const int horizon = 1 + static_cast<int>(rng() % 4);
		const auto ds = build_raw_windows(generate(g), static_cast<int>(rng() % 3), horizon,
		                                  OrdinalScale::with_classes(g.num_classes));
		std::vector<std::size_t> brute;
		for (std::size_t i = 0; i < ds.size(); ++i)
			if (!(ds.patterns[i].target == ds.patterns[i].current_label))
				brute.push_back(i);
		same = same && brute == problematic_patterns(ds);
		total += brute.size();
	}
	GenConfig still;
	still.num_steps = 300;
	still.base_persistence = 1.0;
	const auto flat = build_windows(generate(still), 1, 1, OrdinalScale::with_classes(4));
	bool raised = false;
	try {
		fit(Method::ITME, flat, {5, 50, 0.0}, 1);
	} catch (const DomainError&) {
		raised = true;
	}
	return {same && raised, "100 datasets, " + std::to_string(total) + " problematic patterns matched; " +
	                            (raised ? "error raised" : "no error") + " on a fully persistent set"};
}

Outcome criterion_balanced_weights()
{
	const int q = 4;
	std::mt19937_64 rng(23);
	WindowedDataset ds;
	ds.scale = OrdinalScale::with_classes(q);
	ds.delta = 1;
	for (int n = 0; n < 200; ++n) {
		auto p = random_pattern(rng, 6, q);
		p.target = OrdinalLabel(1 + n % q);
		ds.patterns.push_back(std::move(p));
	}
	const NnpomConfig cfg{5, 6, q};
	const auto plain = LossConfig::for_training(ds, false, 0.0);
	const auto weighted = LossConfig::for_training(ds, true, 0.0);
	const double factor = 1.0 - 1.0 / q;
	double worst = 0.0;
	for (int point = 0; point < 20; ++point) {
		const auto params = random_mixture(rng, cfg, 0.8);
		const double a = loss(ds, params, weighted), b = factor * loss(ds, params, plain);
		worst = std::max(worst, std::abs(a - b) / std::abs(b));
	}
	MinimizeOptions opt;
	opt.max_iters = 300;
	const auto init = init_mixture_params(cfg, 4).flatten();
	const auto ra = minimize(mixture_objective(ds, cfg, weighted), init, opt);
	const auto rb = minimize(mixture_objective(ds, cfg, plain), init, opt);
	double drift = 0.0;
	for (std::size_t i = 0; i < ra.params.size(); ++i)
		drift = std::max(drift, std::abs(ra.params[i] - rb.params[i]));
	const bool ok = worst < 1e-12 && drift < 1e-9 && ra.best_iteration == rb.best_iteration;
	return {ok, "20 points, max rel diff " + fmt(worst) + "; trajectory max param diff " + fmt(drift)};
}

Outcome criterion_reproducibility()
{
	const fs::path root = fs::temp_directory_path() / "pgmoe_acceptance_repro";
	fs::remove_all(root);
	fs::create_directories(root);
	const std::string config = R"({
  "method": ["Persist", "POM", "NNPOM", "ITME", "STME", "STMEIC"],
  "delta": 1, "horizon": 1, "splits": 2, "repeats": 2, "seed": 42, "cv_folds": 3, "threads": 1,
  "grid": {"m": [3, 5], "iter": [40, 80], "lambda": [0, 0.001]},
  "generator": {"num_steps": 700, "num_classes": 3, "base_persistence": 0.8, "switch_signal_strength": 2.0, "seed": 8}
})";
	const auto cfg = parse_experiment_config(config);
	std::ostringstream sink;
	cli::cmd_experiment(cfg, root / "a", sink);
	cli::cmd_experiment(cfg, root / "b", sink);
	auto slurp = [](const fs::path& p) {
		std::ifstream in(p, std::ios::binary);
		std::stringstream s;
		s << in.rdbuf();
		return s.str();
	};
	const std::string a = slurp(root / "a" / "report.csv"), b = slurp(root / "b" / "report.csv");
	const bool ok = !a.empty() && a == b;
	fs::remove_all(root);
	return {ok, std::to_string(a.size()) + " bytes, " + (ok ? "identical" : "different")};
}

} // namespace

// Usage: pgmoe_acceptance [--known-failure N]...
// A listed criterion still prints its FAIL line but does not fail the run; if it passes, the run fails.
int main(int argc, char** argv)
{
	std::vector<int> known;
	for (int i = 1; i < argc; ++i) {
		if (std::string(argv[i]) == "--known-failure" && i + 1 < argc) {
			known.push_back(std::stoi(argv[++i]));
		} else {
			std::cerr << "usage: pgmoe_acceptance [--known-failure N]...\n";
			return 2;
		}
	}
	const std::pair<const char*, std::function<Outcome()>> criteria[] = {
	    {"gradient correctness", criterion_gradient},
	    {"probability normalization", criterion_normalization},
	    {"threshold monotonicity", criterion_threshold_monotonicity},
	    {"gate saturation gives persistence", criterion_gate_saturation},
	    {"metric oracles", criterion_metrics},
	    {"optimizer sanity", criterion_optimizer},
	    {"end-to-end synthetic superiority", criterion_end_to_end},
	    {"ITME decomposition", criterion_itme},
	    {"balanced-data weight equivalence", criterion_balanced_weights},
	    {"reproducibility", criterion_reproducibility},
	};
	int failures = 0;
	int n = 0;
	for (const auto& [name, check] : criteria) {
		++n;
		const auto t0 = std::chrono::steady_clock::now();
		Outcome o;
		try {
			o = check();
		} catch (const std::exception& e) {
			o = {false, std::string("exception: ") + e.what()};
		}
		const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
		const bool expected_fail = std::find(known.begin(), known.end(), n) != known.end();
		failures += o.pass == expected_fail ? 1 : 0;
		std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << o.detail << " ["
		          << fmt(secs, 3) << " s]";
		if (expected_fail)
			std::cout << (o.pass ? " (listed as a known failure but passed)" : " (known failure)");
		std::cout << std::endl;
	}
	return failures == 0 ? 0 : 1;
}
