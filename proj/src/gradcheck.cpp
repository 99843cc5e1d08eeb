#include <pgmoe/gradcheck.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace pgmoe {

std::string parameter_block(const NnpomConfig& c, std::size_t i, bool with_gate)
{
	const auto row = static_cast<std::size_t>(c.input_dim + 1);
	const auto m = static_cast<std::size_t>(c.hidden_units);
	if (with_gate) {
		if (i < row)
			return "gate";
		i -= row;
	}
	if (i < m * row)
		return "hidden_weights";
	i -= m * row;
	if (i < m)
		return "output_weights";
	i -= m;
	if (i == 0)
		return "first_threshold";
	return "paddings";
}

namespace {

struct Trial {
	WindowedDataset ds;
	MixtureParams params;
	LossConfig loss;
};

Trial random_trial(std::mt19937_64& rng)
{
	const int qs[] = {2, 3, 4};
	const int ms[] = {1, 5, 25};
	const int deltas[] = {0, 1, 3};
	std::uniform_int_distribution<int> pick(0, 2);
	const int q = qs[pick(rng)];
	const int m = ms[pick(rng)];
	const int delta = deltas[pick(rng)];
	const int feature_dim = 2;
	const int input_dim = (delta + 1) * (feature_dim + q);

	std::normal_distribution<double> normal(0.0, 1.0);
	std::uniform_int_distribution<int> label(1, q);

	Trial t;
	t.ds.scale = OrdinalScale::with_classes(q);
	t.ds.delta = delta;
	t.ds.horizon = 1;
	for (int n = 0; n < 12; ++n) {
		WindowedPattern p;
		p.z.resize(static_cast<std::size_t>(input_dim));
		for (auto& v : p.z)
			v = normal(rng);
		p.current_label = OrdinalLabel(label(rng));
		p.target = OrdinalLabel(label(rng));
		p.origin_t = n;
		t.ds.patterns.push_back(std::move(p));
	}
	const NnpomConfig cfg{m, input_dim, q};
	std::vector<double> flat(static_cast<std::size_t>(input_dim + 1) + cfg.parameter_count());
	for (auto& v : flat)
		v = 0.5 * normal(rng);
	t.params = MixtureParams::unflatten(cfg, flat);
	std::bernoulli_distribution coin(0.5);
	t.loss = LossConfig::for_training(t.ds, coin(rng), coin(rng) ? 0.01 : 0.0);
	return t;
}

struct Comparison {
	const GradCheckOptions& opt;
	GradCheckReport& report;
	int trial = 0;

	void operator()(const std::string& suite, const std::string& block, std::size_t index, double analytic,
	                double numeric)
	{
		++report.components;
		const double diff = std::abs(analytic - numeric);
		const double magnitude = std::max(std::abs(analytic), std::abs(numeric));
		const double rel = magnitude > 0.0 ? diff / magnitude : 0.0;
		if (magnitude >= 1e-4)
			report.worst_relative_error = std::max(report.worst_relative_error, rel);
		if (diff >= opt.abs_tolerance && rel >= opt.rel_tolerance)
			report.failures.push_back({suite, block, trial, index, analytic, numeric});
	}
};

} // namespace

GradCheckReport run_gradient_check(const GradCheckOptions& opt)
{
	if (opt.trials < 1)
		throw DomainError("gradient check needs at least one trial");
	std::mt19937_64 rng(opt.seed);
	GradCheckReport report;
	report.trials = opt.trials;
	Comparison compare{opt, report};
	const double h = opt.step;

	for (int trial = 0; trial < opt.trials; ++trial) {
		Trial t = random_trial(rng);
		compare.trial = trial;
		const NnpomConfig& cfg = t.params.expert.config;

		// network: Jacobian of class probabilities on the first pattern
		const auto& z = t.ds.patterns.front().z;
		const auto jac = prob_gradients(z, t.params.expert);
		auto kappa = t.params.expert.flatten();
		for (std::size_t s = 0; s < kappa.size(); ++s) {
			const double keep = kappa[s];
			kappa[s] = keep + h;
			const auto up = class_probs(z, NnpomParams::unflatten(cfg, kappa));
			kappa[s] = keep - h;
			const auto down = class_probs(z, NnpomParams::unflatten(cfg, kappa));
			kappa[s] = keep;
			for (std::size_t q = 0; q < up.size(); ++q)
				compare("nnpom", parameter_block(cfg, s, false), s, jac(q, s), (up[q] - down[q]) / (2.0 * h));
		}

		// mixture: gradient of the full regularised loss
		auto grad = loss_gradient(t.ds, t.params, t.loss);
		if (opt.corrupt_gradient && trial == 0)
			grad[0] += 1e-3;
		auto flat = t.params.flatten();
		for (std::size_t s = 0; s < flat.size(); ++s) {
			const double keep = flat[s];
			flat[s] = keep + h;
			const double up = loss(t.ds, MixtureParams::unflatten(cfg, flat), t.loss);
			flat[s] = keep - h;
			const double down = loss(t.ds, MixtureParams::unflatten(cfg, flat), t.loss);
			flat[s] = keep;
			compare("mixture", parameter_block(cfg, s, true), s, grad[s], (up - down) / (2.0 * h));
		}
	}
	return report;
}

} // namespace pgmoe
