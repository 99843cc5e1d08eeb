#include "objectives.hpp"

#include <algorithm>
#include <cmath>

namespace pgmoe::detail {

namespace {

void add_ridge(double lambda, std::span<const double> s, Evaluation& e)
{
	if (lambda == 0.0)
		return;
	double sq = 0.0;
	for (std::size_t i = 0; i < s.size(); ++i) {
		sq += s[i] * s[i];
		e.gradient[i] += 2.0 * lambda * s[i];
	}
	e.value += lambda * sq;
}

} // namespace

Objective mixture_objective(const WindowedDataset& ds, const NnpomConfig& config, LossConfig loss)
{
	return [&ds, config, loss = std::move(loss)](std::span<const double> s) {
		const auto params = MixtureParams::unflatten(config, s);
		auto lg = loss_and_gradient(ds, params, loss);
		return Evaluation{lg.value, std::move(lg.gradient)};
	};
}

Objective network_objective(const WindowedDataset& ds, const NnpomConfig& config, LossConfig loss)
{
	return [&ds, config, loss = std::move(loss)](std::span<const double> s) {
		const auto params = NnpomParams::unflatten(config, s);
		const auto b = params.thresholds();
		const double inv_n = 1.0 / static_cast<double>(ds.size());
		Evaluation e;
		e.gradient.assign(s.size(), 0.0);
		NnpomForward fwd;
		double data_term = 0.0;
		for (const auto& pat : ds.patterns) {
			const std::size_t y = pat.target.index();
			forward_into(pat.z, params, b, fwd);
			const double p = std::max(fwd.probs[y], kProbabilityFloor);
			data_term += loss.class_weights[y] * std::log(p);
			if (fwd.probs[y] >= kProbabilityFloor)
				add_prob_gradient(pat.z, params, fwd, y, -loss.class_weights[y] * inv_n / p, e.gradient);
		}
		e.value = -data_term * inv_n;
		add_ridge(loss.lambda, s, e);
		return e;
	};
}

Objective linear_objective(const WindowedDataset& ds, double lambda)
{
	const int input_dim = static_cast<int>(ds.input_dim());
	const int q = ds.num_classes();
	return [&ds, input_dim, q, lambda](std::span<const double> s) {
		const auto params = PomParams::unflatten(input_dim, q, s);
		const auto b = params.thresholds();
		const std::size_t w = params.weights.size();
		const double inv_n = 1.0 / static_cast<double>(ds.size());
		Evaluation e;
		e.gradient.assign(s.size(), 0.0);
		std::vector<double> g(static_cast<std::size_t>(q - 1)), p(static_cast<std::size_t>(q));
		std::vector<double> d_pad(params.paddings.size());
		double data_term = 0.0;
		for (const auto& pat : ds.patterns) {
			const std::size_t y = pat.target.index();
			const double f = latent(pat.z, params);
			ordinal_head::cumulative(f, b, g);
			ordinal_head::probs_from_cumulative(f, b, params.paddings, g, p);
			const double py = std::max(p[y], kProbabilityFloor);
			data_term += std::log(py);
			if (p[y] < kProbabilityFloor)
				continue;
			const double coef = -inv_n / py;
			const double d_latent = coef * ordinal_head::sensitivity(g, params.paddings, y, d_pad);
			e.gradient[0] += d_latent;
			for (std::size_t i = 0; i < pat.z.size(); ++i)
				e.gradient[i + 1] += d_latent * pat.z[i];
			e.gradient[w] -= d_latent;
			for (std::size_t j = 0; j < d_pad.size(); ++j)
				e.gradient[w + 1 + j] += coef * d_pad[j];
		}
		e.value = -data_term * inv_n;
		add_ridge(lambda, s, e);
		return e;
	};
}

Objective logistic_objective(const WindowedDataset& ds, std::span<const int> labels, double lambda)
{
	return [&ds, labels, lambda](std::span<const double> nu) {
		const double inv_n = 1.0 / static_cast<double>(ds.size());
		Evaluation e;
		e.gradient.assign(nu.size(), 0.0);
		double data_term = 0.0;
		for (std::size_t t = 0; t < ds.size(); ++t) {
			const auto& z = ds.patterns[t].z;
			const double a = gate(z, nu);
			const double c = labels[t];
			data_term += c * std::log(std::max(a, kProbabilityFloor)) +
			             (1.0 - c) * std::log(std::max(1.0 - a, kProbabilityFloor));
			// d/dh of the binary cross-entropy is (a - c)
			const bool flat = c == 1.0 ? a < kProbabilityFloor : 1.0 - a < kProbabilityFloor;
			const double r = flat ? 0.0 : (a - c) * inv_n;
			e.gradient[0] += r;
			for (std::size_t i = 0; i < z.size(); ++i)
				e.gradient[i + 1] += r * z[i];
		}
		e.value = -data_term * inv_n;
		add_ridge(lambda, nu, e);
		return e;
	};
}

} // namespace pgmoe::detail
