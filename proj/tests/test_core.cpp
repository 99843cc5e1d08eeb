#include "helpers.hpp"

#include <doctest.h>

#include <pgmoe/core.hpp>
#include <pgmoe/datagen.hpp>

#include <cmath>
#include <limits>
#include <set>

using namespace pgmoe;

TEST_CASE("discretize on the RVR scale")
{
	const auto rvr = OrdinalScale::rvr();
	CHECK(rvr.num_classes() == 4);
	CHECK(discretize(100.0, rvr) == OrdinalLabel(1));
	CHECK(discretize(299.999, rvr) == OrdinalLabel(1));
	CHECK(discretize(300.0, rvr) == OrdinalLabel(2));
	CHECK(discretize(549.0, rvr) == OrdinalLabel(2));
	CHECK(discretize(550.0, rvr) == OrdinalLabel(3));
	CHECK(discretize(2000.0, rvr) == OrdinalLabel(4));
	CHECK(discretize(1e6, rvr) == OrdinalLabel(4));
}

TEST_CASE("discretize on the cloud height scale")
{
	const auto ch = OrdinalScale::cloud_height();
	CHECK(ch.num_classes() == 3);
	CHECK(discretize(150.0, ch) == OrdinalLabel(1));
	CHECK(discretize(1499.9, ch) == OrdinalLabel(2));
	CHECK(discretize(1500.0, ch) == OrdinalLabel(3));
}

TEST_CASE("discretize agrees with a linear scan over the cut-points")
{
	const std::vector<double> cuts{-2.0, 0.0, 0.5, 3.0};
	const auto scale = OrdinalScale::from_thresholds(cuts);
	std::mt19937_64 rng(1);
	std::uniform_real_distribution<double> u(-5.0, 5.0);
	for (int i = 0; i < 2000; ++i) {
		const double x = i % 10 == 0 ? cuts[static_cast<std::size_t>(i / 10) % cuts.size()] : u(rng);
		int rank = 1;
		for (double c : cuts)
			if (x >= c)
				++rank;
		CHECK(discretize(x, scale).rank() == rank);
	}
}

TEST_CASE("discretize preserves order")
{
	const auto scale = OrdinalScale::rvr();
	std::mt19937_64 rng(2);
	std::uniform_real_distribution<double> u(0.0, 3000.0);
	for (int i = 0; i < 1000; ++i) {
		const double a = u(rng), b = u(rng);
		if (a <= b)
			CHECK(discretize(a, scale) <= discretize(b, scale));
	}
}

TEST_CASE("scale and discretize reject bad input")
{
	CHECK_THROWS_AS(OrdinalScale::from_thresholds({}), DomainError);
	CHECK_THROWS_AS(OrdinalScale::from_thresholds({3.0, 1.0}), DomainError);
	CHECK_THROWS_AS(OrdinalScale::from_thresholds({1.0, 1.0}), DomainError);
	CHECK_THROWS_AS(OrdinalScale::with_classes(1), DomainError);
	CHECK_THROWS_AS(discretize(std::numeric_limits<double>::quiet_NaN(), OrdinalScale::rvr()), DomainError);
	CHECK_THROWS_AS(discretize(std::numeric_limits<double>::infinity(), OrdinalScale::rvr()), DomainError);
	CHECK_THROWS_AS(discretize(1.0, OrdinalScale::with_classes(3)), DomainError);
}

TEST_CASE("window layout: features then one-hot label per step, oldest first")
{
	const auto series = testing::labelled_series({1, 2, 3, 2, 1});
	const auto ds = build_raw_windows(series, 1, 1, OrdinalScale::with_classes(3));
	REQUIRE(ds.size() == 3);
	CHECK(step_width(2, 3) == 5);
	const auto& p = ds.patterns[0];
	CHECK(p.origin_t == 1);
	CHECK(p.current_label == OrdinalLabel(2));
	CHECK(p.target == OrdinalLabel(3));
	const std::vector<double> expected{0.0, 1.0, 1.0, 0.0, 0.0, 0.1, 1.1, 0.0, 1.0, 0.0};
	REQUIRE(p.z.size() == expected.size());
	for (std::size_t i = 0; i < expected.size(); ++i)
		CHECK(p.z[i] == doctest::Approx(expected[i]));
}

TEST_CASE("window count for a gap-free 500 step series")
{
	GenConfig g;
	g.num_steps = 500;
	const auto ds = build_raw_windows(generate(g), 3, 6, OrdinalScale::with_classes(4));
	CHECK(ds.size() == 491);
}

TEST_CASE("windows match a brute-force enumeration on series with gaps")
{
	std::mt19937_64 rng(5);
	for (int trial = 0; trial < 40; ++trial) {
		GenConfig g;
		g.num_steps = 150;
		g.gap_probability = 0.08;
		g.seed = rng();
		const auto series = generate(g);
		const int delta = static_cast<int>(rng() % 4);
		const int horizon = 1 + static_cast<int>(rng() % 5);
		std::set<std::int64_t> stamps;
		for (const auto& r : series)
			stamps.insert(r.timestamp);
		std::vector<std::int64_t> expected;
		for (const auto& r : series) {
			bool ok = stamps.count(r.timestamp + horizon) > 0;
			for (int d = 1; d <= delta; ++d)
				ok = ok && stamps.count(r.timestamp - d) > 0;
			if (ok)
				expected.push_back(r.timestamp);
		}
		if (expected.empty()) {
			CHECK_THROWS_AS(build_raw_windows(series, delta, horizon, OrdinalScale::with_classes(4)), DomainError);
			continue;
		}
		const auto ds = build_raw_windows(series, delta, horizon, OrdinalScale::with_classes(4));
		std::vector<std::int64_t> got;
		for (const auto& p : ds.patterns)
			got.push_back(p.origin_t);
		CHECK(got == expected);
		for (const auto& p : ds.patterns)
			CHECK(p.z.size() == static_cast<std::size_t>(delta + 1) * step_width(3, 4));
	}
}

TEST_CASE("a two-hour hole removes exactly the windows touching it")
{
	std::vector<int> labels(12, 1);
	const auto series = testing::labelled_series(labels, {5, 6});
	const auto ds = build_raw_windows(series, 1, 1, OrdinalScale::with_classes(2));
	std::vector<std::int64_t> got;
	for (const auto& p : ds.patterns)
		got.push_back(p.origin_t);
	CHECK(got == std::vector<std::int64_t>{1, 2, 3, 8, 9, 10, 11, 12});
}

TEST_CASE("window construction errors")
{
	const auto series = testing::labelled_series({1, 2, 1});
	CHECK_THROWS_AS(build_raw_windows(series, 5, 1, OrdinalScale::with_classes(2)), DomainError);
	CHECK_THROWS_AS(build_raw_windows(series, -1, 1, OrdinalScale::with_classes(2)), DomainError);
	CHECK_THROWS_AS(build_raw_windows(series, 0, 0, OrdinalScale::with_classes(2)), DomainError);
	const auto bad = testing::labelled_series({1, 3, 1});
	CHECK_THROWS_AS(build_raw_windows(bad, 0, 1, OrdinalScale::with_classes(2)), DomainError);
}

TEST_CASE("standardisation: train statistics, zero-spread columns map to zero")
{
	const auto series = testing::labelled_series({1, 2, 1, 2, 2, 1, 1});
	const auto scale = OrdinalScale::with_classes(2);
	const auto train = build_windows(series, 0, 1, scale);
	const std::size_t dim = train.input_dim();
	for (std::size_t c = 0; c < dim; ++c) {
		double mean = 0.0, sq = 0.0;
		for (const auto& p : train.patterns)
			mean += p.z[c];
		mean /= static_cast<double>(train.size());
		for (const auto& p : train.patterns)
			sq += (p.z[c] - mean) * (p.z[c] - mean);
		CHECK(std::abs(mean) < 1e-12);
		if (sq > 0.0)
			CHECK(sq / static_cast<double>(train.size()) == doctest::Approx(1.0));
	}

	std::vector<int> all_one(6, 1);
	auto constant = build_raw_windows(testing::labelled_series(all_one), 0, 1, scale);
	const auto stats = fit_standardization(constant);
	standardize(constant, stats);
	for (const auto& p : constant.patterns) {
		CHECK(p.z[2] == 0.0);
		CHECK(p.z[3] == 0.0);
	}

	const auto test = build_windows(testing::labelled_series({2, 1, 2}), 0, 1, scale, &train.standardization);
	CHECK(test.standardization.mean == train.standardization.mean);
}

TEST_CASE("class distribution and persistence rate against direct counts")
{
	GenConfig g;
	g.num_steps = 3000;
	g.seed = 17;
	const auto series = generate(g);
	const auto ds = build_raw_windows(series, 1, 1, OrdinalScale::with_classes(4));
	std::vector<std::size_t> counts(4, 0);
	std::size_t same = 0;
	for (std::size_t i = 1; i + 1 < series.size(); ++i) {
		++counts[series[i + 1].label.index()];
		same += series[i + 1].label == series[i].label ? 1 : 0;
	}
	CHECK(class_distribution(ds) == counts);
	CHECK(persistence_rate(ds) == doctest::Approx(static_cast<double>(same) / static_cast<double>(ds.size())));
}

TEST_CASE("distribution entries sum to the pattern count")
{
	std::mt19937_64 rng(4);
	for (int i = 0; i < 10; ++i) {
		const auto ds = testing::random_dataset(rng, 2 + i % 4, 3, 50 + i);
		std::size_t total = 0;
		for (auto c : class_distribution(ds))
			total += c;
		CHECK(total == ds.size());
	}
}

TEST_CASE("subset and concatenate")
{
	std::mt19937_64 rng(8);
	const auto ds = testing::random_dataset(rng, 3, 2, 10);
	const std::vector<std::size_t> idx{7, 2, 2};
	const auto sub = ds.subset(idx);
	REQUIRE(sub.size() == 3);
	CHECK(sub.patterns[0].origin_t == 7);
	CHECK(sub.patterns[2].z == ds.patterns[2].z);
	const std::vector<WindowedDataset> parts{ds, sub};
	CHECK(concatenate(parts).size() == 13);
	const std::vector<std::size_t> bad{10};
	CHECK_THROWS(ds.subset(bad));
}
