#pragma once

#include <pgmoe/mixture.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace pgmoe {

/// Which part of s = (nu, kappa) a flattened index belongs to.
std::string parameter_block(const NnpomConfig& config, std::size_t flat_index, bool with_gate);

struct GradCheckOptions {
	std::uint64_t seed = 1;
	int trials = 100;
	double step = 1e-6;
	double rel_tolerance = 1e-5;
	double abs_tolerance = 1e-8;
	/// Test hook: perturbs one analytic gradient entry to prove the check can fail.
	bool corrupt_gradient = false;
};

struct GradCheckFailure {
	std::string suite; ///< "nnpom" or "mixture"
	std::string block;
	int trial = 0;
	std::size_t index = 0;
	double analytic = 0.0;
	double numeric = 0.0;
};

struct GradCheckReport {
	int trials = 0;
	std::size_t components = 0;
	double worst_relative_error = 0.0; ///< over components of magnitude at least 1e-4
	std::vector<GradCheckFailure> failures;

	bool passed() const noexcept { return failures.empty(); }
};

/**
 * Central-difference check of the network probability Jacobian and the mixture
 * loss gradient over random configurations (Q in {2,3,4}, M in {1,5,25},
 * window size in {0,1,3}).
 */
GradCheckReport run_gradient_check(const GradCheckOptions& options);

} // namespace pgmoe
