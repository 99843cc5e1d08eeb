#pragma once

// Cross-entropy objectives over flat parameter vectors, for the optimizer.

#include <pgmoe/mixture.hpp>
#include <pgmoe/optimizer.hpp>

#include <span>
#include <vector>

namespace pgmoe::detail {

/// Mixture loss over s = (nu, kappa).
Objective mixture_objective(const WindowedDataset& ds, const NnpomConfig& config, LossConfig loss);

/// Network-only cross-entropy over kappa.
Objective network_objective(const WindowedDataset& ds, const NnpomConfig& config, LossConfig loss);

/// Linear proportional-odds cross-entropy over (theta, b_1, a).
Objective linear_objective(const WindowedDataset& ds, double lambda);

/// Binary logistic regression over nu; labels are 0 or 1.
Objective logistic_objective(const WindowedDataset& ds, std::span<const int> labels, double lambda);

} // namespace pgmoe::detail
