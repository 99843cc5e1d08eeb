#pragma once

#include <pgmoe/dataio.hpp>
#include <pgmoe/gradcheck.hpp>

#include <filesystem>
#include <iosfwd>

namespace pgmoe::cli {

enum ExitCode : int { kSuccess = 0, kDomainError = 1, kUsageError = 2 };

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs splits x methods x repeats and writes report.csv, summary.csv and table.txt into `out_dir`.
int cmd_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& out);

int cmd_gradcheck(const GradCheckOptions& options, std::ostream& out);

/// Per-pattern CSV: t, true_label, predicted_label, gate_alpha, p_c1..p_cQ.
int cmd_trace(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
              const std::filesystem::path& out_path);

} // namespace pgmoe::cli
