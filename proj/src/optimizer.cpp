#include <pgmoe/optimizer.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace pgmoe {

void RpropConfig::validate() const
{
	if (!(eta_plus > 1.0))
		throw DomainError("eta_plus must exceed 1");
	if (!(eta_minus > 0.0 && eta_minus < 1.0))
		throw DomainError("eta_minus must lie in (0, 1)");
	if (!(step_min > 0.0 && step_min <= initial_step && initial_step <= step_max))
		throw DomainError("step sizes must satisfy 0 < step_min <= initial_step <= step_max");
}

Rprop::Rprop(std::size_t num_params, RpropConfig config) :
		m_config(config),
		m_step(num_params, config.initial_step),
		m_prev_gradient(num_params, 0.0),
		m_prev_delta(num_params, 0.0),
		m_prev_loss(std::numeric_limits<double>::infinity())
{
	m_config.validate();
}

namespace {

double sign(double x) noexcept
{
	return static_cast<double>((x > 0.0) - (x < 0.0));
}

} // namespace

void Rprop::step(std::span<double> params, double loss, std::span<const double> gradient)
{
	const bool worse = loss > m_prev_loss;
	for (std::size_t i = 0; i < params.size(); ++i) {
		const double g = gradient[i];
		const double agreement = m_prev_gradient[i] * g;
		if (agreement > 0.0) {
			m_step[i] = std::min(m_step[i] * m_config.eta_plus, m_config.step_max);
			m_prev_delta[i] = -sign(g) * m_step[i];
			params[i] += m_prev_delta[i];
			m_prev_gradient[i] = g;
		} else if (agreement < 0.0) {
			m_step[i] = std::max(m_step[i] * m_config.eta_minus, m_config.step_min);
			if (worse)
				params[i] -= m_prev_delta[i];
			m_prev_gradient[i] = 0.0;
		} else {
			m_prev_delta[i] = -sign(g) * m_step[i];
			params[i] += m_prev_delta[i];
			m_prev_gradient[i] = g;
		}
	}
	m_prev_loss = loss;
}

MinimizeResult minimize(const Objective& objective, std::vector<double> init, const MinimizeOptions& options)
{
	if (options.max_iters < 1)
		throw DomainError("optimizer needs at least one iteration");
	for (int c : options.checkpoints)
		if (c < 0 || c > options.max_iters)
			throw DomainError("checkpoint " + std::to_string(c) + " outside the iteration budget");

	auto checked = [&](std::span<const double> x, int it) {
		Evaluation e = objective(x);
		if (e.gradient.size() != x.size())
			throw OptimizerError("gradient length mismatch", it);
		if (!std::isfinite(e.value))
			throw OptimizerError("non-finite loss", it);
		for (std::size_t i = 0; i < e.gradient.size(); ++i)
			if (!std::isfinite(e.gradient[i]))
				throw OptimizerError("non-finite gradient component " + std::to_string(i), it);
		return e;
	};

	MinimizeResult result;
	result.trace.reserve(static_cast<std::size_t>(options.max_iters) + 1);
	result.checkpoint_params.resize(options.checkpoints.size());

	Rprop rprop(init.size(), options.rprop);
	std::vector<double> x = std::move(init);
	Evaluation e = checked(x, 0);
	result.trace.push_back(e.value);
	result.params = x;
	double best = e.value;
	if (options.observer)
		options.observer(0, x, rprop);

	auto snapshot = [&](int it) {
		for (std::size_t c = 0; c < options.checkpoints.size(); ++c)
			if (options.checkpoints[c] == it)
				result.checkpoint_params[c] = result.params;
	};
	snapshot(0);

	for (int it = 1; it <= options.max_iters; ++it) {
		rprop.step(x, e.value, e.gradient);
		e = checked(x, it);
		result.trace.push_back(e.value);
		if (e.value < best) {
			best = e.value;
			result.params = x;
			result.best_iteration = static_cast<std::size_t>(it);
		}
		if (options.observer)
			options.observer(it, x, rprop);
		snapshot(it);
	}
	return result;
}

void write_trace_csv(const std::string& path, std::span<const double> trace)
{
	std::ofstream out(path);
	if (!out)
		throw DomainError("cannot write loss trace to " + path);
	out << "iteration,loss\n";
	char buf[64];
	for (std::size_t i = 0; i < trace.size(); ++i) {
		std::snprintf(buf, sizeof(buf), "%.17g", trace[i]);
		out << i << ',' << buf << '\n';
	}
}

} // namespace pgmoe
