#pragma once

// Helpers shared by the subcommand implementations.

#include <optional>
#include <string>
#include <vector>

#include "sectorial/cli/config.hpp"
#include "sectorial/cli/report.hpp"
#include "sectorial/core/ensemble.hpp"
#include "sectorial/core/sample_path.hpp"

namespace sectorial::cli {

// A point of the model's parameter space.
models::Point point_param(Section& s, const std::string& key, std::size_t dim,
                          std::optional<models::Point> fallback = std::nullopt);

// {lo, hi} block, defaulting to `fallback`.
models::Box box_param(Section& s, const std::string& key, std::size_t dim, std::optional<models::Box> fallback);

// Dyadic scale ladder 2^{-k} for k in [from, to], or an explicit list.
std::vector<double> scale_param(Section& s, int from, int to);

int positive_int(Section& s, const std::string& key, std::int64_t fallback, std::int64_t max = 100000000);

// Sample-path dumps named in experiment.input, checked against the configured
// model dimensions.
std::vector<std::string> input_param(Section& s);
std::vector<core::SamplePath> load_inputs(const std::vector<std::string>& files, const models::FieldModel& model);

// Leading lineage columns of every report row.
std::vector<std::string> lineage_header(std::vector<std::string> rest);
std::vector<Cell> lineage(const ExperimentConfig& cfg, Cell replicate, Cell spacing, Cell scale,
                          std::vector<Cell> rest);
// Same, for rows about an ingested path with its own seed.
std::vector<Cell> lineage(const ExperimentConfig& cfg, const core::SamplePath& path, Cell scale,
                          std::vector<Cell> rest);

// Ensemble on the configured grid and layout.
core::GaussianEnsemble make_ensemble(const ExperimentConfig& cfg, int threads);

std::string replicate_range(std::uint64_t first, std::uint64_t count);

}  // namespace sectorial::cli
