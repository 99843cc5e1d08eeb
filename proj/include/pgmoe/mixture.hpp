#pragma once

#include <pgmoe/core.hpp>
#include <pgmoe/nnpom.hpp>

#include <span>
#include <vector>

namespace pgmoe {

/// Floor applied to a probability before taking its logarithm or reciprocal.
inline constexpr double kProbabilityFloor = 1e-12;

/// Gate weights (bias first) followed by the network expert. Flattened as nu then kappa.
struct MixtureParams {
	std::vector<double> gate_weights;
	NnpomParams expert;

	std::size_t parameter_count() const noexcept { return gate_weights.size() + expert.config.parameter_count(); }
	std::vector<double> flatten() const;
	static MixtureParams unflatten(const NnpomConfig& expert_config, std::span<const double> flat);
};

/// Gate at zero, expert from init_params().
MixtureParams init_mixture_params(const NnpomConfig& config, std::uint64_t seed);

struct LossConfig {
	std::vector<double> class_weights; ///< o_q
	double lambda = 0.0;
	bool weighted = false;

	/// o_q = 1 - N_q / N on `train` when weighted, otherwise all ones.
	static LossConfig for_training(const WindowedDataset& train, bool weighted, double lambda);
};

std::vector<double> class_weights(const WindowedDataset& train, bool weighted);

/// alpha = sigmoid(nu . (1, z)).
double gate(std::span<const double> z, std::span<const double> gate_weights);

/// alpha [[y_t = C_q]] + (1 - alpha) P_net(C_q).
std::vector<double> mixture_probs(const WindowedPattern& pattern, const MixtureParams& params);

/// Most probable class; ties go to the lowest rank.
OrdinalLabel argmax_label(std::span<const double> probs);

OrdinalLabel predict(const WindowedPattern& pattern, const MixtureParams& params);

/**
 * Class-weighted cross-entropy plus lambda times the squared norm of every
 * parameter (gate, network weights, thresholds and paddings alike).
 */
double loss(const WindowedDataset& ds, const MixtureParams& params, const LossConfig& cfg);

std::vector<double> loss_gradient(const WindowedDataset& ds, const MixtureParams& params, const LossConfig& cfg);

struct LossAndGradient {
	double value = 0.0;
	std::vector<double> gradient;
};

/// One pass computing both; loss() and loss_gradient() agree with it bit for bit.
LossAndGradient loss_and_gradient(const WindowedDataset& ds, const MixtureParams& params, const LossConfig& cfg);

} // namespace pgmoe
