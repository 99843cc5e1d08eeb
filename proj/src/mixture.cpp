#include <pgmoe/mixture.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace pgmoe {

std::vector<double> MixtureParams::flatten() const
{
	std::vector<double> flat(gate_weights);
	const auto kappa = expert.flatten();
	flat.insert(flat.end(), kappa.begin(), kappa.end());
	return flat;
}

MixtureParams MixtureParams::unflatten(const NnpomConfig& expert_config, std::span<const double> flat)
{
	const auto gate_len = static_cast<std::size_t>(expert_config.input_dim + 1);
	if (flat.size() != gate_len + expert_config.parameter_count())
		throw DomainError("mixture parameter vector has length " + std::to_string(flat.size()) + ", expected " +
		                  std::to_string(gate_len + expert_config.parameter_count()));
	MixtureParams p;
	p.gate_weights.assign(flat.begin(), flat.begin() + gate_len);
	p.expert = NnpomParams::unflatten(expert_config, flat.subspan(gate_len));
	return p;
}

MixtureParams init_mixture_params(const NnpomConfig& config, std::uint64_t seed)
{
	MixtureParams p;
	p.expert = init_params(config, seed);
	p.gate_weights.assign(static_cast<std::size_t>(config.input_dim + 1), 0.0);
	return p;
}

std::vector<double> class_weights(const WindowedDataset& train, bool weighted)
{
	const auto q = static_cast<std::size_t>(train.num_classes());
	std::vector<double> o(q, 1.0);
	if (!weighted)
		return o;
	if (train.empty())
		throw DomainError("class weights need a non-empty training set");
	const auto counts = class_distribution(train);
	const double n = static_cast<double>(train.size());
	for (std::size_t c = 0; c < q; ++c)
		o[c] = 1.0 - static_cast<double>(counts[c]) / n;
	return o;
}

LossConfig LossConfig::for_training(const WindowedDataset& train, bool weighted, double lambda)
{
	if (lambda < 0.0)
		throw DomainError("regularisation coefficient must be non-negative");
	LossConfig cfg;
	cfg.class_weights = pgmoe::class_weights(train, weighted);
	cfg.lambda = lambda;
	cfg.weighted = weighted;
	return cfg;
}

double gate(std::span<const double> z, std::span<const double> gate_weights)
{
	if (gate_weights.size() != z.size() + 1)
		throw DomainError("gate has " + std::to_string(gate_weights.size()) + " weights for an input of dimension " +
		                  std::to_string(z.size()));
	double h = gate_weights[0];
	for (std::size_t i = 0; i < z.size(); ++i)
		h += gate_weights[i + 1] * z[i];
	return sigmoid(h);
}

std::vector<double> mixture_probs(const WindowedPattern& pattern, const MixtureParams& params)
{
	const double alpha = gate(pattern.z, params.gate_weights);
	auto p = class_probs(pattern.z, params.expert);
	for (auto& v : p)
		v *= 1.0 - alpha;
	p.at(pattern.current_label.index()) += alpha;
	return p;
}

OrdinalLabel argmax_label(std::span<const double> probs)
{
	std::size_t best = 0;
	for (std::size_t q = 1; q < probs.size(); ++q)
		if (probs[q] > probs[best])
			best = q;
	return OrdinalLabel::from_index(best);
}

OrdinalLabel predict(const WindowedPattern& pattern, const MixtureParams& params)
{
	return argmax_label(mixture_probs(pattern, params));
}

namespace {

template <bool WithGradient>
LossAndGradient evaluate(const WindowedDataset& ds, const MixtureParams& params, const LossConfig& cfg)
{
	const std::size_t q = static_cast<std::size_t>(ds.num_classes());
	if (params.expert.config.num_classes != ds.num_classes())
		throw DomainError("model and dataset disagree on the number of classes");
	if (cfg.class_weights.size() != q)
		throw DomainError("class weight vector does not match the number of classes");
	if (ds.empty())
		throw DomainError("loss over an empty dataset");

	const std::size_t gate_len = params.gate_weights.size();
	LossAndGradient out;
	if constexpr (WithGradient)
		out.gradient.assign(params.parameter_count(), 0.0);
	std::span<double> grad_nu, grad_kappa;
	if constexpr (WithGradient) {
		grad_nu = std::span<double>(out.gradient).first(gate_len);
		grad_kappa = std::span<double>(out.gradient).subspan(gate_len);
	}

	const auto b = params.expert.thresholds();
	const double inv_n = 1.0 / static_cast<double>(ds.size());
	NnpomForward fwd;
	double data_term = 0.0;
	for (const auto& pat : ds.patterns) {
		const std::size_t y = pat.target.index();
		if (y >= q)
			throw DomainError("target label outside the scale");
		const double alpha = gate(pat.z, params.gate_weights);
		forward_into(pat.z, params.expert, b, fwd);
		const double persist = pat.current_label.index() == y ? 1.0 : 0.0;
		const double p = alpha * persist + (1.0 - alpha) * fwd.probs[y];
		const double p_floor = std::max(p, kProbabilityFloor);
		data_term += cfg.class_weights[y] * std::log(p_floor);

		if constexpr (WithGradient) {
			if (p < kProbabilityFloor)
				continue;
			const double coef = -cfg.class_weights[y] * inv_n / p_floor;
			const double g_gate = coef * sigmoid_slope(alpha) * (persist - fwd.probs[y]);
			grad_nu[0] += g_gate;
			for (std::size_t i = 0; i < pat.z.size(); ++i)
				grad_nu[i + 1] += g_gate * pat.z[i];
			if (alpha < 1.0)
				add_prob_gradient(pat.z, params.expert, fwd, y, coef * (1.0 - alpha), grad_kappa);
		}
	}
	out.value = -data_term * inv_n;

	if (cfg.lambda != 0.0) {
		double sq = 0.0;
		for (double s : params.gate_weights)
			sq += s * s;
		const auto kappa = params.expert.flatten();
		for (double s : kappa)
			sq += s * s;
		out.value += cfg.lambda * sq;
		if constexpr (WithGradient) {
			for (std::size_t i = 0; i < gate_len; ++i)
				grad_nu[i] += 2.0 * cfg.lambda * params.gate_weights[i];
			for (std::size_t i = 0; i < kappa.size(); ++i)
				grad_kappa[i] += 2.0 * cfg.lambda * kappa[i];
		}
	}
	return out;
}

} // namespace

double loss(const WindowedDataset& ds, const MixtureParams& params, const LossConfig& cfg)
{
	return evaluate<false>(ds, params, cfg).value;
}

std::vector<double> loss_gradient(const WindowedDataset& ds, const MixtureParams& params, const LossConfig& cfg)
{
	return evaluate<true>(ds, params, cfg).gradient;
}

LossAndGradient loss_and_gradient(const WindowedDataset& ds, const MixtureParams& params, const LossConfig& cfg)
{
	return evaluate<true>(ds, params, cfg);
}

} // namespace pgmoe
