#include <pgmoe/nnpom.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace pgmoe {

double sigmoid(double x) noexcept
{
	x = std::clamp(x, -500.0, 500.0);
	return 1.0 / (1.0 + std::exp(-x));
}

namespace ordinal_head {

std::vector<double> thresholds(double first_threshold, std::span<const double> paddings)
{
	std::vector<double> b(paddings.size() + 1);
	b[0] = first_threshold;
	for (std::size_t j = 0; j < paddings.size(); ++j)
		b[j + 1] = b[j] + paddings[j] * paddings[j];
	return b;
}

void cumulative(double latent, std::span<const double> thresholds, std::span<double> out)
{
	for (std::size_t q = 0; q < thresholds.size(); ++q)
		out[q] = sigmoid(thresholds[q] - latent);
}

void probs_from_cumulative(double latent, std::span<const double> thresholds, std::span<const double> paddings,
                           std::span<const double> cumulative, std::span<double> out)
{
	const std::size_t last = cumulative.size();
	out[0] = cumulative[0];
	// sigma(u) - sigma(v) = expm1(u - v) sigma(v) (1 - sigma(u)), free of cancellation for close thresholds
	for (std::size_t q = 1; q < last; ++q) {
		const double gap = paddings[q - 1] * paddings[q - 1];
		if (gap < 30.0)
			out[q] = std::expm1(gap) * cumulative[q - 1] * sigmoid(latent - thresholds[q]);
		else
			out[q] = cumulative[q] - cumulative[q - 1];
	}
	out[last] = sigmoid(latent - thresholds[last - 1]);
}

double sensitivity(std::span<const double> cumulative, std::span<const double> paddings, std::size_t target,
                   std::span<double> d_paddings)
{
	const std::size_t cuts = cumulative.size(); // Q-1
	// p_target = g_target - g_{target-1}, with g_0 = 0 and g_Q = 1
	const double upper = target < cuts ? sigmoid_slope(cumulative[target]) : 0.0;
	const double lower = target > 0 ? sigmoid_slope(cumulative[target - 1]) : 0.0;
	// padding a_{p+2} moves thresholds b_{p+2}..b_{Q-1} (zero-based p+1..cuts-1)
	for (std::size_t p = 0; p < paddings.size(); ++p) {
		double d_shift = 0.0;
		if (target < cuts && target >= p + 1)
			d_shift += upper;
		if (target > 0 && target - 1 >= p + 1)
			d_shift -= lower;
		d_paddings[p] = 2.0 * paddings[p] * d_shift;
	}
	return lower - upper;
}

} // namespace ordinal_head

void NnpomConfig::validate() const
{
	if (hidden_units < 1)
		throw DomainError("network needs at least one hidden unit");
	if (input_dim < 1)
		throw DomainError("network input dimension must be positive");
	if (num_classes < 2)
		throw DomainError("network needs at least two classes");
}

std::size_t NnpomConfig::parameter_count() const noexcept
{
	const auto m = static_cast<std::size_t>(hidden_units);
	const auto i = static_cast<std::size_t>(input_dim);
	return m * (i + 1) + m + 1 + static_cast<std::size_t>(num_classes - 2);
}

std::vector<double> NnpomParams::flatten() const
{
	std::vector<double> flat;
	flat.reserve(config.parameter_count());
	flat.insert(flat.end(), hidden_weights.begin(), hidden_weights.end());
	flat.insert(flat.end(), output_weights.begin(), output_weights.end());
	flat.push_back(first_threshold);
	flat.insert(flat.end(), paddings.begin(), paddings.end());
	return flat;
}

NnpomParams NnpomParams::unflatten(const NnpomConfig& config, std::span<const double> flat)
{
	config.validate();
	if (flat.size() != config.parameter_count())
		throw DomainError("network parameter vector has length " + std::to_string(flat.size()) + ", expected " +
		                  std::to_string(config.parameter_count()));
	const auto m = static_cast<std::size_t>(config.hidden_units);
	const auto w = m * static_cast<std::size_t>(config.input_dim + 1);
	NnpomParams p;
	p.config = config;
	p.hidden_weights.assign(flat.begin(), flat.begin() + w);
	p.output_weights.assign(flat.begin() + w, flat.begin() + w + m);
	p.first_threshold = flat[w + m];
	p.paddings.assign(flat.begin() + w + m + 1, flat.end());
	return p;
}

namespace {

void check_input(std::span<const double> z, int input_dim)
{
	if (z.size() != static_cast<std::size_t>(input_dim))
		throw DomainError("input has dimension " + std::to_string(z.size()) + ", model expects " +
		                  std::to_string(input_dim));
}

double affine(std::span<const double> weights_with_bias, std::span<const double> z) noexcept
{
	double h = weights_with_bias[0];
	for (std::size_t i = 0; i < z.size(); ++i)
		h += weights_with_bias[i + 1] * z[i];
	return h;
}

} // namespace

void forward_into(std::span<const double> z, const NnpomParams& params, std::span<const double> thresholds,
                  NnpomForward& out)
{
	check_input(z, params.config.input_dim);
	const auto m = static_cast<std::size_t>(params.config.hidden_units);
	const std::size_t row = z.size() + 1;
	const auto q = static_cast<std::size_t>(params.config.num_classes);

	out.hidden.resize(m);
	out.latent = 0.0;
	std::span<const double> w(params.hidden_weights);
	for (std::size_t j = 0; j < m; ++j) {
		out.hidden[j] = sigmoid(affine(w.subspan(j * row, row), z));
		out.latent += params.output_weights[j] * out.hidden[j];
	}
	out.cumulative.resize(q - 1);
	out.probs.resize(q);
	ordinal_head::cumulative(out.latent, thresholds, out.cumulative);
	ordinal_head::probs_from_cumulative(out.latent, thresholds, params.paddings, out.cumulative, out.probs);
}

NnpomForward forward(std::span<const double> z, const NnpomParams& params)
{
	NnpomForward fwd;
	forward_into(z, params, params.thresholds(), fwd);
	return fwd;
}

double latent(std::span<const double> z, const NnpomParams& params)
{
	return forward(z, params).latent;
}

std::vector<double> class_probs(std::span<const double> z, const NnpomParams& params)
{
	return forward(z, params).probs;
}

void add_prob_gradient(std::span<const double> z, const NnpomParams& params, const NnpomForward& fwd,
                       std::size_t target, double scale, std::span<double> grad)
{
	const auto m = static_cast<std::size_t>(params.config.hidden_units);
	const std::size_t row = z.size() + 1;
	const std::size_t pads = params.paddings.size();

	double d_pad_buf[64];
	std::vector<double> d_pad_heap;
	std::span<double> d_pad;
	if (pads <= 64) {
		d_pad = std::span<double>(d_pad_buf, pads);
	} else {
		d_pad_heap.resize(pads);
		d_pad = d_pad_heap;
	}
	const double d_latent = scale * ordinal_head::sensitivity(fwd.cumulative, params.paddings, target, d_pad);

	const std::size_t beta_off = m * row;
	for (std::size_t j = 0; j < m; ++j) {
		const double a = fwd.hidden[j];
		grad[beta_off + j] += d_latent * a;
		const double back = d_latent * params.output_weights[j] * sigmoid_slope(a);
		if (back == 0.0)
			continue;
		double* gw = grad.data() + j * row;
		gw[0] += back;
		for (std::size_t i = 0; i < z.size(); ++i)
			gw[i + 1] += back * z[i];
	}
	const std::size_t b1_off = beta_off + m;
	grad[b1_off] -= d_latent;
	for (std::size_t p = 0; p < pads; ++p)
		grad[b1_off + 1 + p] += scale * d_pad[p];
}

ProbJacobian prob_gradients(std::span<const double> z, const NnpomParams& params)
{
	const NnpomForward fwd = forward(z, params);
	ProbJacobian jac;
	jac.num_classes = static_cast<std::size_t>(params.config.num_classes);
	jac.num_params = params.config.parameter_count();
	jac.values.assign(jac.num_classes * jac.num_params, 0.0);
	for (std::size_t q = 0; q < jac.num_classes; ++q)
		add_prob_gradient(z, params, fwd, q, 1.0,
		                  std::span<double>(jac.values).subspan(q * jac.num_params, jac.num_params));
	return jac;
}

NnpomParams init_params(const NnpomConfig& config, std::uint64_t seed)
{
	config.validate();
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> weight(-0.1, 0.1);
	std::uniform_real_distribution<double> padding(0.1, 1.1);

	NnpomParams p;
	p.config = config;
	p.hidden_weights.resize(static_cast<std::size_t>(config.hidden_units) *
	                        static_cast<std::size_t>(config.input_dim + 1));
	for (auto& w : p.hidden_weights)
		w = weight(rng);
	p.output_weights.resize(static_cast<std::size_t>(config.hidden_units));
	for (auto& b : p.output_weights)
		b = weight(rng);
	p.first_threshold = 0.0;
	p.paddings.resize(static_cast<std::size_t>(config.num_classes - 2));
	for (auto& a : p.paddings)
		a = padding(rng);
	return p;
}

std::size_t PomParams::parameter_count() const noexcept
{
	return static_cast<std::size_t>(input_dim + 1) + 1 + static_cast<std::size_t>(num_classes - 2);
}

std::vector<double> PomParams::flatten() const
{
	std::vector<double> flat(weights);
	flat.push_back(first_threshold);
	flat.insert(flat.end(), paddings.begin(), paddings.end());
	return flat;
}

PomParams PomParams::unflatten(int input_dim, int num_classes, std::span<const double> flat)
{
	PomParams p;
	p.input_dim = input_dim;
	p.num_classes = num_classes;
	if (input_dim < 1 || num_classes < 2 || flat.size() != p.parameter_count())
		throw DomainError("linear model parameter vector does not match its dimensions");
	const auto w = static_cast<std::size_t>(input_dim + 1);
	p.weights.assign(flat.begin(), flat.begin() + w);
	p.first_threshold = flat[w];
	p.paddings.assign(flat.begin() + w + 1, flat.end());
	return p;
}

double latent(std::span<const double> z, const PomParams& params)
{
	check_input(z, params.input_dim);
	return affine(params.weights, z);
}

std::vector<double> class_probs(std::span<const double> z, const PomParams& params)
{
	const auto q = static_cast<std::size_t>(params.num_classes);
	std::vector<double> g(q - 1), p(q);
	const double f = latent(z, params);
	const auto b = params.thresholds();
	ordinal_head::cumulative(f, b, g);
	ordinal_head::probs_from_cumulative(f, b, params.paddings, g, p);
	return p;
}

PomParams init_pom_params(int input_dim, int num_classes, std::uint64_t seed)
{
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> weight(-0.1, 0.1);
	std::uniform_real_distribution<double> padding(0.1, 1.1);
	PomParams p;
	p.input_dim = input_dim;
	p.num_classes = num_classes;
	p.weights.resize(static_cast<std::size_t>(input_dim + 1));
	for (auto& w : p.weights)
		w = weight(rng);
	p.paddings.resize(static_cast<std::size_t>(num_classes - 2));
	for (auto& a : p.paddings)
		a = padding(rng);
	return p;
}

} // namespace pgmoe
