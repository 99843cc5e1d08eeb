#pragma once

#include <pgmoe/core.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace pgmoe {

/// Logistic sigmoid with its argument clamped to [-500, 500].
double sigmoid(double x) noexcept;

/// Derivative of the sigmoid expressed through its value s = sigmoid(x).
inline double sigmoid_slope(double s) noexcept { return s * (1.0 - s); }

namespace ordinal_head {

/// b_1, then b_q = b_1 + sum_{j=2..q} a_j^2.
std::vector<double> thresholds(double first_threshold, std::span<const double> paddings);

/// g_q = P(y <= C_q) = sigmoid(b_q - f) for q = 1..Q-1.
void cumulative(double latent, std::span<const double> thresholds, std::span<double> out);

/// Differences of the cumulative curve: P(y = C_q), q = 1..Q. `cumulative` must come from cumulative().
void probs_from_cumulative(double latent, std::span<const double> thresholds, std::span<const double> paddings,
                           std::span<const double> cumulative, std::span<double> out);

/**
 * Sensitivity of P(y = C_target) to the head inputs.
 *
 * Returns d p / d f. Writes d p / d a_j into `d_paddings` (length Q-2). The
 * derivative with respect to b_1 is always the negative of the returned value.
 */
double sensitivity(std::span<const double> cumulative, std::span<const double> paddings, std::size_t target,
                   std::span<double> d_paddings);

} // namespace ordinal_head

struct NnpomConfig {
	int hidden_units = 5;
	int input_dim = 1;
	int num_classes = 3;

	void validate() const;
	std::size_t parameter_count() const noexcept;
};

/**
 * Parameters of the proportional-odds network.
 *
 * Flattened order: hidden weights row-major (bias first in each row), output
 * weights, first threshold, paddings a_2..a_{Q-1}.
 */
struct NnpomParams {
	NnpomConfig config;
	std::vector<double> hidden_weights; ///< M x (I+1), row-major
	std::vector<double> output_weights; ///< M
	double first_threshold = 0.0;
	std::vector<double> paddings; ///< Q-2

	std::vector<double> thresholds() const { return ordinal_head::thresholds(first_threshold, paddings); }
	std::vector<double> flatten() const;
	static NnpomParams unflatten(const NnpomConfig& config, std::span<const double> flat);
};

/// Hidden activations, latent value and head outputs for one input.
struct NnpomForward {
	std::vector<double> hidden;
	double latent = 0.0;
	std::vector<double> cumulative;
	std::vector<double> probs;
};

NnpomForward forward(std::span<const double> z, const NnpomParams& params);

/// Allocation-free variant for hot loops; `thresholds` must equal params.thresholds().
void forward_into(std::span<const double> z, const NnpomParams& params, std::span<const double> thresholds,
                  NnpomForward& out);

double latent(std::span<const double> z, const NnpomParams& params);
std::vector<double> class_probs(std::span<const double> z, const NnpomParams& params);

/// Dense Jacobian of class probabilities: rows are classes, columns follow the flattened parameter order.
struct ProbJacobian {
	std::size_t num_classes = 0;
	std::size_t num_params = 0;
	std::vector<double> values;

	double operator()(std::size_t cls, std::size_t param) const { return values[cls * num_params + param]; }
};

ProbJacobian prob_gradients(std::span<const double> z, const NnpomParams& params);

/**
 * Adds `scale` * d P(y = C_target) / d kappa into `grad` (flattened order).
 * `fwd` must come from forward() on the same input and parameters.
 */
void add_prob_gradient(std::span<const double> z, const NnpomParams& params, const NnpomForward& fwd,
                       std::size_t target, double scale, std::span<double> grad);

/// Uniform weights in [-0.1, 0.1], b_1 = 0, paddings uniform in [0.1, 1.1].
NnpomParams init_params(const NnpomConfig& config, std::uint64_t seed);

/// Linear-latent variant sharing the ordinal head: f = theta . (1, z).
struct PomParams {
	int input_dim = 1;
	int num_classes = 3;
	std::vector<double> weights; ///< I+1, bias first
	double first_threshold = 0.0;
	std::vector<double> paddings;

	std::size_t parameter_count() const noexcept;
	std::vector<double> thresholds() const { return ordinal_head::thresholds(first_threshold, paddings); }
	std::vector<double> flatten() const;
	static PomParams unflatten(int input_dim, int num_classes, std::span<const double> flat);
};

double latent(std::span<const double> z, const PomParams& params);
std::vector<double> class_probs(std::span<const double> z, const PomParams& params);
PomParams init_pom_params(int input_dim, int num_classes, std::uint64_t seed);

} // namespace pgmoe
