#pragma once

#include <pgmoe/core.hpp>

#include <span>
#include <vector>

namespace pgmoe {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
	explicit ConfusionMatrix(int num_classes);
	ConfusionMatrix(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes);

	void add(OrdinalLabel truth, OrdinalLabel pred);

	int num_classes() const noexcept { return m_num_classes; }
	std::size_t operator()(std::size_t truth, std::size_t pred) const
	{
		return m_counts[truth * static_cast<std::size_t>(m_num_classes) + pred];
	}
	std::size_t total() const noexcept { return m_total; }
	std::size_t row_total(std::size_t truth) const;

private:
	int m_num_classes;
	std::vector<std::size_t> m_counts;
	std::size_t m_total = 0;
};

/**
 * Summary of one evaluation.
 *
 * Classes absent from the true labels are left out of AMAE, MMAE and GMS; their
 * per-class entries are NaN and `missing_classes` is set.
 */
struct EvalReport {
	double acc = 0.0;  ///< percentage
	double amae = 0.0;
	double mmae = 0.0;
	double gms = 0.0;  ///< percentage
	std::vector<double> per_class_mae;
	std::vector<double> per_class_sensitivity; ///< percentage
	std::vector<std::size_t> n_per_class;
	bool missing_classes = false;
};

double accuracy(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred);
double amae(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes);
/// Largest per-class MAE; ranges over [0, Q-1].
double mmae(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes);
double gms(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes);

/// Single streaming pass over label pairs.
EvalReport evaluate(std::span<const OrdinalLabel> truth, std::span<const OrdinalLabel> pred, int num_classes);

/// Same report derived from a confusion matrix.
EvalReport evaluate(const ConfusionMatrix& matrix);

} // namespace pgmoe
