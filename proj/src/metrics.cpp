#include <pgmoe/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace pgmoe {

ConfusionMatrix::ConfusionMatrix(int num_classes) :
		m_num_classes(num_classes)
{
	if (num_classes < 2)
		throw DomainError("confusion matrix needs at least two classes");
	const auto q = static_cast<std::size_t>(num_classes);
	m_counts.assign(q * q, 0);
}

ConfusionMatrix::ConfusionMatrix(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred,
                                 int num_classes) :
		ConfusionMatrix(num_classes)
{
	if (truth.size() != pred.size())
		throw DomainError("label sequences differ in length");
	for (std::size_t i = 0; i < truth.size(); ++i)
		add(truth[i], pred[i]);
}

void ConfusionMatrix::add(OrdinalLabel truth, OrdinalLabel pred)
{
	if (truth.rank() < 1 || truth.rank() > m_num_classes || pred.rank() < 1 || pred.rank() > m_num_classes)
		throw DomainError("label outside the confusion matrix");
	++m_counts[truth.index() * static_cast<std::size_t>(m_num_classes) + pred.index()];
	++m_total;
}

std::size_t ConfusionMatrix::row_total(std::size_t truth) const
{
	std::size_t n = 0;
	for (std::size_t p = 0; p < static_cast<std::size_t>(m_num_classes); ++p)
		n += (*this)(truth, p);
	return n;
}

namespace {

/// Integer tallies every metric is derived from.
struct Tally {
	std::vector<std::size_t> n;       // patterns per true class
	std::vector<std::size_t> correct; // per true class
	std::vector<std::size_t> error;   // summed rank distance per true class
};

EvalReport finish(const Tally& t)
{
	const std::size_t q = t.n.size();
	EvalReport r;
	r.n_per_class = t.n;
	r.per_class_mae.assign(q, std::numeric_limits<double>::quiet_NaN());
	r.per_class_sensitivity.assign(q, std::numeric_limits<double>::quiet_NaN());

	std::size_t total = 0, correct = 0, present = 0;
	double mae_sum = 0.0, mae_max = 0.0, sens_product = 1.0;
	for (std::size_t c = 0; c < q; ++c) {
		total += t.n[c];
		correct += t.correct[c];
		if (t.n[c] == 0) {
			r.missing_classes = true;
			continue;
		}
		++present;
		const double nc = static_cast<double>(t.n[c]);
		r.per_class_mae[c] = static_cast<double>(t.error[c]) / nc;
		r.per_class_sensitivity[c] = 100.0 * static_cast<double>(t.correct[c]) / nc;
		mae_sum += r.per_class_mae[c];
		mae_max = std::max(mae_max, r.per_class_mae[c]);
		sens_product *= r.per_class_sensitivity[c];
	}
	if (total == 0)
		throw DomainError("cannot evaluate an empty prediction set");
	r.acc = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
	r.amae = mae_sum / static_cast<double>(present);
	r.mmae = mae_max;
	r.gms = sens_product == 0.0 ? 0.0 : std::pow(sens_product, 1.0 / static_cast<double>(present));
	return r;
}

} // namespace

EvalReport evaluate(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes)
{
	if (truth.size() != pred.size())
		throw DomainError("label sequences differ in length");
	if (truth.empty())
		throw DomainError("cannot evaluate an empty prediction set");
	if (num_classes < 2)
		throw DomainError("evaluation needs at least two classes");
	const auto q = static_cast<std::size_t>(num_classes);
	Tally t{std::vector<std::size_t>(q, 0), std::vector<std::size_t>(q, 0), std::vector<std::size_t>(q, 0)};
	for (std::size_t i = 0; i < truth.size(); ++i) {
		const int y = truth[i].rank(), yhat = pred[i].rank();
		if (y < 1 || y > num_classes || yhat < 1 || yhat > num_classes)
			throw DomainError("label outside the scale");
		const std::size_t c = truth[i].index();
		++t.n[c];
		if (y == yhat)
			++t.correct[c];
		t.error[c] += static_cast<std::size_t>(std::abs(y - yhat));
	}
	return finish(t);
}

EvalReport evaluate(const ConfusionMatrix& m)
{
	const auto q = static_cast<std::size_t>(m.num_classes());
	Tally t{std::vector<std::size_t>(q, 0), std::vector<std::size_t>(q, 0), std::vector<std::size_t>(q, 0)};
	for (std::size_t a = 0; a < q; ++a) {
		t.n[a] = m.row_total(a);
		t.correct[a] = m(a, a);
		for (std::size_t p = 0; p < q; ++p)
			t.error[a] += m(a, p) * (a > p ? a - p : p - a);
	}
	return finish(t);
}

double accuracy(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred)
{
	if (truth.size() != pred.size())
		throw DomainError("label sequences differ in length");
	if (truth.empty())
		throw DomainError("accuracy of an empty prediction set");
	std::size_t hits = 0;
	for (std::size_t i = 0; i < truth.size(); ++i)
		hits += truth[i] == pred[i] ? 1 : 0;
	return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

double amae(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes)
{
	return evaluate(truth, pred, num_classes).amae;
}

double mmae(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes)
{
	return evaluate(truth, pred, num_classes).mmae;
}

double gms(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes)
{
	return evaluate(truth, pred, num_classes).gms;
}

} // namespace pgmoe
