#include <doctest.h>

#include <pgmoe/metrics.hpp>

#include <cmath>
#include <random>

using namespace pgmoe;

namespace {

std::vector<OrdinalLabel> labels(std::initializer_list<int> ranks)
{
	std::vector<OrdinalLabel> out;
	for (int r : ranks)
		out.emplace_back(r);
	return out;
}

struct Oracle {
	double acc, amae, mmae, gms;
};

// Brute-force metrics written from the definitions.
Oracle oracle(const std::vector<OrdinalLabel>& t, const std::vector<OrdinalLabel>& p, int q)
{
	std::size_t hits = 0;
	for (std::size_t i = 0; i < t.size(); ++i)
		hits += t[i] == p[i] ? 1 : 0;
	double sum = 0.0, worst = 0.0, prod = 1.0;
	int present = 0;
	bool zero = false;
	for (int c = 1; c <= q; ++c) {
		double err = 0.0;
		int n = 0, ok = 0;
		for (std::size_t i = 0; i < t.size(); ++i)
			if (t[i].rank() == c) {
				++n;
				err += std::abs(p[i].rank() - c);
				ok += p[i].rank() == c ? 1 : 0;
			}
		if (n == 0)
			continue;
		++present;
		sum += err / n;
		worst = std::max(worst, err / n);
		zero = zero || ok == 0;
		prod *= static_cast<double>(ok) / n;
	}
	return {100.0 * static_cast<double>(hits) / static_cast<double>(t.size()), sum / present, worst,
	        zero ? 0.0 : 100.0 * std::pow(prod, 1.0 / present)};
}

} // namespace

TEST_CASE("accuracy on hand examples")
{
	CHECK(accuracy(labels({1, 2, 3, 1}), labels({1, 2, 1, 1})) == 75.0);
	CHECK(accuracy(labels({2, 2}), labels({2, 2})) == 100.0);
	CHECK_THROWS_AS(accuracy(labels({1}), labels({1, 2})), DomainError);
	CHECK_THROWS_AS(accuracy(labels({}), labels({})), DomainError);
}

TEST_CASE("MMAE reaches Q-1 when a class is sent to the opposite extreme")
{
	const auto t = labels({1, 1, 2, 3, 4});
	const auto p = labels({4, 4, 2, 3, 4});
	CHECK(mmae(t, p, 4) == 3.0);
	CHECK(amae(t, p, 4) == doctest::Approx(0.75));
}

TEST_CASE("GMS is zero when one class is never predicted")
{
	const auto t = labels({1, 2, 3, 1, 2, 3});
	const auto p = labels({1, 2, 2, 1, 2, 1});
	CHECK(gms(t, p, 3) == 0.0);
	CHECK(gms(t, t, 3) == doctest::Approx(100.0));
}

TEST_CASE("random label sets agree with the brute-force oracle and the confusion matrix")
{
	std::mt19937_64 rng(1);
	for (int trial = 0; trial < 500; ++trial) {
		const int q = 2 + trial % 5;
		std::uniform_int_distribution<int> label(1, q);
		const std::size_t n = 1 + rng() % 80;
		std::vector<OrdinalLabel> t(n), p(n);
		for (std::size_t i = 0; i < n; ++i) {
			t[i] = OrdinalLabel(label(rng));
			p[i] = OrdinalLabel(label(rng));
		}
		const auto o = oracle(t, p, q);
		const auto r = evaluate(t, p, q);
		CHECK(r.acc == doctest::Approx(o.acc).epsilon(1e-13));
		CHECK(r.amae == doctest::Approx(o.amae).epsilon(1e-13));
		CHECK(r.mmae == doctest::Approx(o.mmae).epsilon(1e-13));
		CHECK(r.gms == doctest::Approx(o.gms).epsilon(1e-12));
		const auto m = evaluate(ConfusionMatrix(t, p, q));
		CHECK(m.acc == r.acc);
		CHECK(m.amae == r.amae);
		CHECK(m.mmae == r.mmae);
		CHECK(m.gms == r.gms);
		CHECK(r.amae <= r.mmae);
		CHECK(r.mmae <= q - 1);
	}
}

TEST_CASE("absent classes are excluded and flagged")
{
	const auto t = labels({1, 1, 3});
	const auto p = labels({1, 2, 3});
	const auto r = evaluate(t, p, 3);
	CHECK(r.missing_classes);
	CHECK(std::isnan(r.per_class_mae[1]));
	CHECK(std::isnan(r.per_class_sensitivity[1]));
	CHECK(r.n_per_class == std::vector<std::size_t>{2, 0, 1});
	CHECK(r.amae == doctest::Approx(0.25));
	CHECK(r.mmae == doctest::Approx(0.5));
	CHECK(r.gms == doctest::Approx(100.0 * std::sqrt(0.5)));
}

TEST_CASE("confusion matrix bookkeeping")
{
	ConfusionMatrix m(3);
	m.add(OrdinalLabel(1), OrdinalLabel(2));
	m.add(OrdinalLabel(1), OrdinalLabel(2));
	m.add(OrdinalLabel(3), OrdinalLabel(3));
	CHECK(m(0, 1) == 2);
	CHECK(m(2, 2) == 1);
	CHECK(m.total() == 3);
	CHECK(m.row_total(0) == 2);
	CHECK(m.row_total(1) == 0);
	CHECK_THROWS_AS(m.add(OrdinalLabel(4), OrdinalLabel(1)), DomainError);
	CHECK_THROWS_AS(evaluate(ConfusionMatrix(3)), DomainError);
}
