#pragma once

#include <pgmoe/core.hpp>
#include <pgmoe/metrics.hpp>
#include <pgmoe/mixture.hpp>
#include <pgmoe/nnpom.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pgmoe {

enum class Method { Persist, POM, NNPOM, ITME, STME, STMEIC };

std::string_view to_string(Method m) noexcept;
/// Accepts the exact method tags ("Persist", "POM", ...); throws DomainError otherwise.
Method parse_method(std::string_view name);
/// Methods whose result depends on the initialisation seed.
bool is_stochastic(Method m) noexcept;

enum class SelectionMetric { AMAE, MMAE, Acc, GMS };

std::string_view to_string(SelectionMetric m) noexcept;
SelectionMetric parse_selection_metric(std::string_view name);

struct HyperGrid {
	std::vector<int> hidden_units{5, 10, 25, 50, 75};
	std::vector<int> iterations{100, 250, 500, 1000};
	std::vector<double> lambdas{0.0, 0.001};
};

struct TrainSpec {
	Method method = Method::STME;
	HyperGrid grid;
	int repeats = 10;
	std::uint64_t seed = 1;
	int cv_folds = 5;
	SelectionMetric selection_metric = SelectionMetric::AMAE;
	int threads = 1;

	void validate() const;
};

struct Hyperparameters {
	int hidden_units = 0; ///< 0 for models without a hidden layer
	int iterations = 0;
	double lambda = 0.0;

	friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/**
 * A trained model of any method. Persist carries no parameters; POM carries
 * `linear`; NNPOM carries `network`; the three mixtures carry `mixture`.
 */
struct FittedModel {
	Method method = Method::Persist;
	Hyperparameters hyper;
	std::uint64_t seed = 0;
	std::optional<MixtureParams> mixture;
	std::optional<NnpomParams> network;
	std::optional<PomParams> linear;
	double final_loss = 0.0;
	std::size_t best_iteration = 0;
	std::vector<std::string> warnings;

	std::vector<double> probs(const WindowedPattern& pattern, int num_classes) const;
	OrdinalLabel predict(const WindowedPattern& pattern) const;
	/// Gate output for mixtures; empty for the other methods.
	std::optional<double> gate_alpha(const WindowedPattern& pattern) const;
};

std::vector<OrdinalLabel> predict_all(const FittedModel& model, const WindowedDataset& ds);
EvalReport evaluate_model(const FittedModel& model, const WindowedDataset& ds);

/// Indices t with y_{t+k} != y_t.
std::vector<std::size_t> problematic_patterns(const WindowedDataset& ds);

FittedModel train_persist();

/**
 * Trains `method` with fixed hyperparameters. For each entry of
 * `iteration_checkpoints` an extra model is returned holding the best iterate
 * within that many iterations of the same run (iRprop+ is deterministic, so it
 * equals a fresh run with that budget). The last element is the full-budget model.
 */
std::vector<FittedModel> fit_with_checkpoints(Method method, const WindowedDataset& train, const Hyperparameters& hyper,
                                              std::uint64_t seed, const std::vector<int>& iteration_checkpoints);

FittedModel fit(Method method, const WindowedDataset& train, const Hyperparameters& hyper, std::uint64_t seed);

/// Weights of the standalone logistic gate learned in the independent scheme.
std::vector<double> fit_logistic_gate(const WindowedDataset& train, std::span<const int> binary_labels, int iterations,
                                      double lambda, std::vector<int> checkpoints,
                                      std::vector<std::vector<double>>* checkpoint_weights);

struct GridScore {
	Hyperparameters hyper;
	double mean_metric = 0.0;
	std::vector<double> fold_metrics;
};

struct CvResult {
	Hyperparameters chosen;
	std::vector<GridScore> scores;
	std::vector<std::string> flags;
};

/// Contiguous [begin, end) blocks partitioning 0..n-1.
std::vector<std::pair<std::size_t, std::size_t>> temporal_folds(std::size_t n, int folds);

/// Candidate hyperparameters for `method`, in tie-break order.
std::vector<Hyperparameters> grid_points(Method method, const HyperGrid& grid);

CvResult cross_validate(const WindowedDataset& train, const TrainSpec& spec);

/// CV on `train`, then a final fit on all of it with `spec.seed`.
FittedModel train_method(const WindowedDataset& train, const TrainSpec& spec);
FittedModel train_itme(const WindowedDataset& train, const TrainSpec& spec);
FittedModel train_stme(const WindowedDataset& train, const TrainSpec& spec, bool weighted);

struct RunRecord {
	Method method = Method::Persist;
	int split = 0;
	int repeat = 0;
	Hyperparameters hyper;
	EvalReport report;
};

struct MetricSummary {
	double mean = 0.0;
	double stddev = 0.0;
};

struct SplitSummary {
	int split = 0;
	MetricSummary acc, amae, mmae, gms;
};

struct MethodSummary {
	Method method = Method::Persist;
	std::vector<SplitSummary> splits;
	/// Mean over splits of the per-split means.
	double acc = 0.0, amae = 0.0, mmae = 0.0, gms = 0.0;
	/// Mean over splits of the per-split standard deviations.
	double acc_sd = 0.0, amae_sd = 0.0, mmae_sd = 0.0, gms_sd = 0.0;
};

struct ExperimentReport {
	int num_classes = 0;
	std::vector<RunRecord> runs;

	std::vector<Method> methods() const;
	std::vector<MethodSummary> summarize() const;
};

struct DataSplit {
	WindowedDataset train;
	WindowedDataset test;
};

/**
 * Cuts the series into `n_splits` contiguous blocks; each block is the test set
 * once and the remaining blocks form the training set. With one split the last
 * `test_fraction` of the records is held out. Windows never cross a block
 * boundary, and every split is z-scored with its own training statistics.
 */
std::vector<DataSplit> build_splits(std::span<const TimeSeriesRecord> series, const OrdinalScale& scale, int delta,
                                    int horizon, int n_splits, double test_fraction = 0.3);

/**
 * For every split and method: select hyperparameters once by CV, then train
 * `repeats` final models with seeds seed..seed+repeats-1 and score each on test.
 */
ExperimentReport run_experiment(const std::vector<DataSplit>& splits, const std::vector<Method>& methods,
                                const TrainSpec& spec);
ExperimentReport run_experiment(const std::vector<DataSplit>& splits, const TrainSpec& spec);

} // namespace pgmoe
