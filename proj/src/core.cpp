#include <pgmoe/core.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace pgmoe {

OrdinalScale OrdinalScale::from_thresholds(std::vector<double> thresholds)
{
	if (thresholds.empty())
		throw DomainError("ordinal scale needs at least one threshold");
	for (std::size_t i = 0; i < thresholds.size(); ++i) {
		if (!std::isfinite(thresholds[i]))
			throw DomainError("ordinal scale thresholds must be finite");
		if (i > 0 && !(thresholds[i - 1] < thresholds[i]))
			throw DomainError("ordinal scale thresholds must be strictly ascending");
	}
	OrdinalScale scale;
	scale.m_num_classes = static_cast<int>(thresholds.size()) + 1;
	scale.m_thresholds = std::move(thresholds);
	return scale;
}

OrdinalScale OrdinalScale::with_classes(int num_classes)
{
	if (num_classes < 2)
		throw DomainError("ordinal scale needs at least two classes");
	OrdinalScale scale;
	scale.m_num_classes = num_classes;
	return scale;
}

OrdinalLabel discretize(double raw, const OrdinalScale& scale)
{
	if (!std::isfinite(raw))
		throw DomainError("cannot discretise a non-finite value");
	if (!scale.has_thresholds())
		throw DomainError("scale has no thresholds to discretise against");
	const auto& r = scale.thresholds();
	// first cut strictly greater than raw; raw == R_q therefore lands above the cut
	const auto it = std::upper_bound(r.begin(), r.end(), raw);
	return OrdinalLabel(static_cast<int>(it - r.begin()) + 1);
}

void Standardization::apply(std::span<double> z) const
{
	if (z.size() != mean.size())
		throw DomainError("standardization width " + std::to_string(mean.size()) + " does not match pattern width " +
		                  std::to_string(z.size()));
	for (std::size_t i = 0; i < z.size(); ++i)
		z[i] = stddev[i] > 0.0 ? (z[i] - mean[i]) / stddev[i] : 0.0;
}

WindowedDataset WindowedDataset::subset(std::span<const std::size_t> indices) const
{
	WindowedDataset out;
	out.scale = scale;
	out.delta = delta;
	out.horizon = horizon;
	out.standardization = standardization;
	out.patterns.reserve(indices.size());
	for (std::size_t i : indices)
		out.patterns.push_back(patterns.at(i));
	return out;
}

std::size_t step_width(std::size_t feature_dim, int num_classes) noexcept
{
	return feature_dim + static_cast<std::size_t>(num_classes);
}

WindowedDataset build_raw_windows(std::span<const TimeSeriesRecord> series, int delta, int horizon,
                                  const OrdinalScale& scale)
{
	if (delta < 0)
		throw DomainError("window size must be non-negative");
	if (horizon < 1)
		throw DomainError("prediction horizon must be at least 1");

	const int q = scale.num_classes();
	const std::size_t feature_dim = series.empty() ? 0 : series.front().features.size();
	for (std::size_t i = 0; i < series.size(); ++i) {
		if (series[i].features.size() != feature_dim)
			throw DomainError("record " + std::to_string(i) + " has inconsistent feature count");
		if (!scale.contains(series[i].label))
			throw DomainError("record " + std::to_string(i) + " has a label outside the scale");
		if (i > 0 && series[i].timestamp <= series[i - 1].timestamp)
			throw DomainError("series timestamps must be strictly increasing");
	}

	const std::size_t width = step_width(feature_dim, q);
	const std::size_t n = series.size();
	const auto d = static_cast<std::size_t>(delta);

	WindowedDataset ds;
	ds.scale = scale;
	ds.delta = delta;
	ds.horizon = horizon;

	// run[i]: number of consecutive hours ending at record i
	std::vector<std::size_t> run(n, 1);
	for (std::size_t i = 1; i < n; ++i)
		if (series[i].timestamp == series[i - 1].timestamp + 1)
			run[i] = run[i - 1] + 1;

	std::size_t ahead = 0;
	for (std::size_t t = 0; t < n; ++t) {
		if (run[t] < d + 1)
			continue;
		const std::int64_t wanted = series[t].timestamp + horizon;
		ahead = std::max(ahead, t + 1);
		while (ahead < n && series[ahead].timestamp < wanted)
			++ahead;
		if (ahead >= n || series[ahead].timestamp != wanted)
			continue;

		WindowedPattern p;
		p.z.assign((d + 1) * width, 0.0);
		for (std::size_t s = 0; s <= d; ++s) {
			const TimeSeriesRecord& rec = series[t - d + s];
			double* block = p.z.data() + s * width;
			std::copy(rec.features.begin(), rec.features.end(), block);
			block[feature_dim + rec.label.index()] = 1.0;
		}
		p.current_label = series[t].label;
		p.target = series[ahead].label;
		p.origin_t = series[t].timestamp;
		ds.patterns.push_back(std::move(p));
	}
	if (ds.patterns.empty())
		throw DomainError("insufficient contiguous data: no window of size " + std::to_string(delta) +
		                  " with horizon " + std::to_string(horizon) + " fits the series");
	return ds;
}

Standardization fit_standardization(const WindowedDataset& ds)
{
	Standardization stats;
	const std::size_t width = ds.input_dim();
	stats.mean.assign(width, 0.0);
	stats.stddev.assign(width, 0.0);
	if (ds.empty())
		return stats;
	const double n = static_cast<double>(ds.size());
	for (const auto& p : ds.patterns)
		for (std::size_t i = 0; i < width; ++i)
			stats.mean[i] += p.z[i];
	for (auto& m : stats.mean)
		m /= n;
	for (const auto& p : ds.patterns)
		for (std::size_t i = 0; i < width; ++i) {
			const double c = p.z[i] - stats.mean[i];
			stats.stddev[i] += c * c;
		}
	for (std::size_t i = 0; i < width; ++i) {
		const double sd = std::sqrt(stats.stddev[i] / n);
		// spread at rounding level of the mean counts as constant
		stats.stddev[i] = sd > 1e-12 * std::max(1.0, std::abs(stats.mean[i])) ? sd : 0.0;
	}
	return stats;
}

void standardize(WindowedDataset& ds, const Standardization& stats)
{
	for (auto& p : ds.patterns)
		stats.apply(p.z);
	ds.standardization = stats;
}

WindowedDataset build_windows(std::span<const TimeSeriesRecord> series, int delta, int horizon,
                              const OrdinalScale& scale, const Standardization* stats)
{
	WindowedDataset ds = build_raw_windows(series, delta, horizon, scale);
	standardize(ds, stats ? *stats : fit_standardization(ds));
	return ds;
}

WindowedDataset concatenate(std::span<const WindowedDataset> parts)
{
	if (parts.empty())
		throw DomainError("nothing to concatenate");
	WindowedDataset out;
	out.scale = parts.front().scale;
	out.delta = parts.front().delta;
	out.horizon = parts.front().horizon;
	out.standardization = parts.front().standardization;
	for (const auto& part : parts) {
		if (part.num_classes() != out.num_classes() || part.delta != out.delta || part.horizon != out.horizon)
			throw DomainError("cannot concatenate datasets with different window settings");
		out.patterns.insert(out.patterns.end(), part.patterns.begin(), part.patterns.end());
	}
	return out;
}

std::vector<std::size_t> class_distribution(const WindowedDataset& ds)
{
	std::vector<std::size_t> counts(static_cast<std::size_t>(ds.num_classes()), 0);
	for (const auto& p : ds.patterns)
		++counts.at(p.target.index());
	return counts;
}

double persistence_rate(const WindowedDataset& ds)
{
	if (ds.empty())
		return 0.0;
	const auto same = std::count_if(ds.patterns.begin(), ds.patterns.end(),
	                                [](const WindowedPattern& p) { return p.target == p.current_label; });
	return static_cast<double>(same) / static_cast<double>(ds.size());
}

} // namespace pgmoe
