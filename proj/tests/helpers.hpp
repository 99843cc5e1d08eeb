#pragma once

#include <pgmoe/core.hpp>
#include <pgmoe/datagen.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace testing {

/// Labelled series with consecutive hour stamps, optional holes at `missing`.
inline std::vector<pgmoe::TimeSeriesRecord> labelled_series(const std::vector<int>& labels,
                                                           const std::vector<std::int64_t>& missing = {},
                                                           int features = 2)
{
	std::vector<pgmoe::TimeSeriesRecord> out;
	std::int64_t t = 0;
	for (int y : labels) {
		while (std::find(missing.begin(), missing.end(), t) != missing.end())
			++t;
		pgmoe::TimeSeriesRecord r;
		r.timestamp = t;
		for (int f = 0; f < features; ++f)
			r.features.push_back(0.1 * static_cast<double>(t) + f);
		r.label = pgmoe::OrdinalLabel(y);
		out.push_back(r);
		++t;
	}
	return out;
}

inline pgmoe::WindowedDataset random_dataset(std::mt19937_64& rng, int q, int dim, int n)
{
	std::normal_distribution<double> normal(0.0, 1.0);
	std::uniform_int_distribution<int> label(1, q);
	pgmoe::WindowedDataset ds;
	ds.scale = pgmoe::OrdinalScale::with_classes(q);
	for (int i = 0; i < n; ++i) {
		pgmoe::WindowedPattern p;
		p.z.resize(static_cast<std::size_t>(dim));
		for (auto& v : p.z)
			v = normal(rng);
		p.current_label = pgmoe::OrdinalLabel(label(rng));
		p.target = pgmoe::OrdinalLabel(label(rng));
		p.origin_t = i;
		ds.patterns.push_back(std::move(p));
	}
	return ds;
}

inline double oracle_sigmoid(double x)
{
	return 1.0 / (1.0 + std::exp(-x));
}

} // namespace testing
