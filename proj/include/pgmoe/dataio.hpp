#pragma once

#include <pgmoe/core.hpp>
#include <pgmoe/datagen.hpp>
#include <pgmoe/training.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pgmoe {

/**
 * Series CSV: header row, then `timestamp`, one column per feature, and a last
 * column named either `raw_value` or `label`. Raw values need a scale with thresholds.
 */
std::vector<TimeSeriesRecord> read_series(const std::filesystem::path& path,
                                          const std::optional<OrdinalScale>& scale = std::nullopt);

/// Writes labels, or raw values when `raw` is set and every record carries one.
void write_series(const std::filesystem::path& path, const std::vector<TimeSeriesRecord>& series,
                  const std::vector<std::string>& feature_names = {}, bool raw = false);

/// origin_t, current_label, target, z_0.. z_{n-1}
void write_windows(const std::filesystem::path& path, const WindowedDataset& ds);

/**
 * One row per (method, split, repeat) followed by one aggregate row per method
 * (split "all", repeat "mean") holding the cross-split means.
 */
void write_report(const ExperimentReport& report, const std::filesystem::path& path);

/// Detail rows of a file written by write_report().
ExperimentReport read_report(const std::filesystem::path& path);

/// Per-split mean and standard deviation of every metric.
void write_summary(const ExperimentReport& report, const std::filesystem::path& path);

/// Plain-text comparison table: Method, Acc, AMAE, MMAE, GM.
std::string render_table(const ExperimentReport& report);

/// {"config": {...}, "parameters": [flattened]} documents.
std::string params_to_json(const NnpomParams& params);
NnpomParams nnpom_params_from_json(const std::string& text);
/// Same layout; the flattened vector starts with the gate weights.
std::string params_to_json(const MixtureParams& params);
MixtureParams mixture_params_from_json(const std::string& text);

/// Everything needed to rebuild windows for a stored model.
struct ModelBundle {
	FittedModel model;
	int num_classes = 2;
	std::vector<double> thresholds; ///< empty when the series is labelled directly
	int delta = 0;
	int horizon = 1;
	Standardization standardization;
};

void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& path);

/// Where an experiment's series comes from.
struct DataSource {
	std::optional<std::filesystem::path> path;
	std::vector<double> thresholds;
	int num_classes = 0;
	std::optional<GenConfig> generator;
};

struct ExperimentConfig {
	TrainSpec spec;
	std::vector<Method> methods;
	int delta = 1;
	int horizon = 1;
	int splits = 3;
	double test_fraction = 0.3; ///< used only when splits == 1
	DataSource data;
};

/// JSON run configuration. Unknown keys are rejected with the key named in the message.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir = ".");

GenConfig parse_gen_config(const std::string& json_text);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

/// %.17g formatting.
std::string format_double(double v);

} // namespace pgmoe
