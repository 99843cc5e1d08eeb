#pragma once

#include <pgmoe/core.hpp>

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgmoe {

/// Raised when the objective returns a non-finite value or gradient.
class OptimizerError : public std::runtime_error {
public:
	OptimizerError(const std::string& what, int iteration) :
			std::runtime_error(what + " at iteration " + std::to_string(iteration)),
			m_iteration(iteration)
	{
	}
	int iteration() const noexcept { return m_iteration; }

private:
	int m_iteration;
};

struct RpropConfig {
	double eta_plus = 1.2;
	double eta_minus = 0.5;
	double initial_step = 0.0125;
	double step_min = 1e-12;
	double step_max = 50.0;

	void validate() const;
};

/// Loss value and gradient at a parameter vector.
struct Evaluation {
	double value = 0.0;
	std::vector<double> gradient;
};

using Objective = std::function<Evaluation(std::span<const double>)>;

/**
 * iRprop+ state machine (resilient propagation with weight-backtracking).
 *
 * Each step() consumes the loss and gradient at the current parameters and
 * moves the parameters in place.
 */
class Rprop {
public:
	Rprop(std::size_t num_params, RpropConfig config = {});

	void step(std::span<double> params, double loss, std::span<const double> gradient);

	const std::vector<double>& step_sizes() const noexcept { return m_step; }
	const std::vector<double>& prev_gradient() const noexcept { return m_prev_gradient; }
	const std::vector<double>& prev_delta() const noexcept { return m_prev_delta; }
	double prev_loss() const noexcept { return m_prev_loss; }
	const RpropConfig& config() const noexcept { return m_config; }

private:
	RpropConfig m_config;
	std::vector<double> m_step;
	std::vector<double> m_prev_gradient;
	std::vector<double> m_prev_delta;
	double m_prev_loss;
};

struct MinimizeResult {
	std::vector<double> params;  ///< best-loss iterate
	std::vector<double> trace;   ///< loss at iterations 0..max_iters
	std::size_t best_iteration = 0;
	/// Best iterate within the first `c` iterations, one entry per requested checkpoint.
	std::vector<std::vector<double>> checkpoint_params;
};

/// Called after each evaluation with the iteration index and the parameters evaluated.
using IterationObserver = std::function<void(int, std::span<const double>, const Rprop&)>;

struct MinimizeOptions {
	int max_iters = 100;
	RpropConfig rprop{};
	/// Iteration counts (each <= max_iters) at which the best-so-far iterate is also kept.
	std::vector<int> checkpoints;
	IterationObserver observer;
};

/// Runs exactly max_iters iRprop+ iterations; no early stopping.
MinimizeResult minimize(const Objective& objective, std::vector<double> init, const MinimizeOptions& options);

/// Writes `iteration,loss` rows.
void write_trace_csv(const std::string& path, std::span<const double> trace);

} // namespace pgmoe
