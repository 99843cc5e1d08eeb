#pragma once

#include <pgmoe/core.hpp>

#include <cstdint>
#include <vector>

namespace pgmoe {

/**
 * Synthetic persistent ordinal series.
 *
 * Labels follow a birth-death chain on 1..Q whose stationary law is
 * `class_marginals` and whose average switch rate is 1 - base_persistence.
 * A switch always moves the label one class up or down. Feature 0 is shifted by
 * `switch_signal_strength` on steps that switch, feature 1 (when present) by
 * +/- strength in the direction of the move; all other features are noise.
 */
struct GenConfig {
	int num_steps = 1000;
	int num_classes = 4;
	int feature_dim = 3;
	double base_persistence = 0.9;
	double switch_signal_strength = 0.0;
	std::vector<double> class_marginals; ///< empty means uniform
	double gap_probability = 0.0;
	std::uint64_t seed = 1;

	void validate() const;
	std::vector<double> marginals() const;
};

/// Per-class switch and upward-move probabilities of the label chain.
struct RegimeChain {
	std::vector<double> switch_prob;
	std::vector<double> up_prob;
};

RegimeChain regime_chain(const GenConfig& cfg);

std::vector<TimeSeriesRecord> generate(const GenConfig& cfg);

/**
 * Monte-Carlo estimate of the best attainable one-step-ahead accuracy given the
 * current label and features, using the exact posterior of the generating law.
 * `samples` = 0 uses cfg.num_steps.
 */
double oracle_bayes_accuracy(const GenConfig& cfg, std::size_t samples = 0);

} // namespace pgmoe
