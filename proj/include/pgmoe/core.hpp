#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pgmoe {

/// Error raised for violated preconditions on user-supplied data or configuration.
class DomainError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// A class on the ordered scale C_1 < ... < C_Q. Stored 1-based, as ranks are reported.
class OrdinalLabel {
public:
	constexpr OrdinalLabel() = default;
	constexpr explicit OrdinalLabel(int rank) : m_rank(rank) {}

	constexpr int rank() const noexcept { return m_rank; }
	/// Zero-based position, for indexing probability vectors.
	constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(m_rank - 1); }

	static constexpr OrdinalLabel from_index(std::size_t i) noexcept { return OrdinalLabel(static_cast<int>(i) + 1); }

	friend constexpr bool operator==(OrdinalLabel, OrdinalLabel) = default;
	friend constexpr auto operator<=>(OrdinalLabel, OrdinalLabel) = default;

private:
	int m_rank = 1;
};

/**
 * Ordered class scale with optional cut-points for discretising a raw series.
 *
 * A scale built with from_thresholds() carries Q-1 strictly ascending cut-points.
 * A scale built with with_classes() only fixes Q and is used for series whose
 * labels are already discrete.
 */
class OrdinalScale {
public:
	static OrdinalScale from_thresholds(std::vector<double> thresholds);
	static OrdinalScale with_classes(int num_classes);

	int num_classes() const noexcept { return m_num_classes; }
	const std::vector<double>& thresholds() const noexcept { return m_thresholds; }
	bool has_thresholds() const noexcept { return !m_thresholds.empty(); }
	bool contains(OrdinalLabel y) const noexcept { return y.rank() >= 1 && y.rank() <= m_num_classes; }

	/// Runway visual range cut-points (metres).
	static OrdinalScale rvr() { return from_thresholds({300.0, 550.0, 2000.0}); }
	/// Cloud height cut-points (metres).
	static OrdinalScale cloud_height() { return from_thresholds({200.0, 1500.0}); }

private:
	OrdinalScale() = default;
	int m_num_classes = 2;
	std::vector<double> m_thresholds;
};

/// Maps a raw value onto the scale. Every interval is closed on the left: raw == R_q gives C_{q+1}.
OrdinalLabel discretize(double raw, const OrdinalScale& scale);

struct TimeSeriesRecord {
	std::int64_t timestamp = 0; ///< hour index
	std::vector<double> features;
	std::optional<double> raw_value;
	OrdinalLabel label;
};

struct WindowedPattern {
	std::vector<double> z;
	OrdinalLabel current_label; ///< y_t
	OrdinalLabel target;        ///< y_{t+k}
	std::int64_t origin_t = 0;
};

/// Per-column z-score statistics. Columns with zero spread map to 0.
struct Standardization {
	std::vector<double> mean;
	std::vector<double> stddev;

	bool empty() const noexcept { return mean.empty(); }
	void apply(std::span<double> z) const;
};

struct WindowedDataset {
	std::vector<WindowedPattern> patterns;
	OrdinalScale scale = OrdinalScale::with_classes(2);
	int delta = 0;
	int horizon = 1;
	Standardization standardization;

	std::size_t size() const noexcept { return patterns.size(); }
	bool empty() const noexcept { return patterns.empty(); }
	int num_classes() const noexcept { return scale.num_classes(); }
	std::size_t input_dim() const noexcept { return patterns.empty() ? 0 : patterns.front().z.size(); }

	/// Copy holding the patterns at the given positions, in that order.
	WindowedDataset subset(std::span<const std::size_t> indices) const;
};

/// Width of one window step inside z: the features followed by a one-hot label block.
std::size_t step_width(std::size_t feature_dim, int num_classes) noexcept;

/**
 * Builds sliding-window patterns without standardising them.
 *
 * A pattern exists for record t when records t-delta..t sit at consecutive hour
 * indices and a record exists exactly `horizon` hours after t.
 */
WindowedDataset build_raw_windows(std::span<const TimeSeriesRecord> series, int delta, int horizon,
                                  const OrdinalScale& scale);

/// Column statistics over the dataset's z vectors.
Standardization fit_standardization(const WindowedDataset& ds);

/// Applies `stats` to every pattern in place and records it on the dataset.
void standardize(WindowedDataset& ds, const Standardization& stats);

/**
 * Builds windows and z-scores them. With no `stats`, statistics are fitted on the
 * result itself (training split); otherwise the supplied ones are used (test split).
 */
WindowedDataset build_windows(std::span<const TimeSeriesRecord> series, int delta, int horizon,
                              const OrdinalScale& scale, const Standardization* stats = nullptr);

/// Concatenates pattern lists. All parts must share scale, delta and horizon.
WindowedDataset concatenate(std::span<const WindowedDataset> parts);

std::vector<std::size_t> class_distribution(const WindowedDataset& ds);

/// Fraction of patterns whose target equals the current label.
double persistence_rate(const WindowedDataset& ds);

} // namespace pgmoe
