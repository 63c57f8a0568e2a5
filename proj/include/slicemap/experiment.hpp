#pragma once

#include "slicemap/agents.hpp"
#include "slicemap/infra.hpp"
#include "slicemap/metrics.hpp"
#include "slicemap/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace slicemap::experiment {

struct TrainResult {
    metrics::RunRecord record;
    agents::Learner learner;
};

/// Trains one learner for hyper.episodes episodes with a generator seeded
/// from `seed`. Propagates divergence_error.
TrainResult train(const scenario::Scenario& scenario, agents::AgentVariant variant,
                  const mdp::Hyperparameters& hyper, std::uint64_t seed, const std::string& label = "");

/// One train() per seed, run on up to `threads` workers. Results come back
/// in seed order whatever the scheduling.
std::vector<TrainResult> sweep(const scenario::Scenario& scenario, agents::AgentVariant variant,
                               const mdp::Hyperparameters& hyper, std::span<const std::uint64_t> seeds,
                               unsigned threads = 0, const std::string& label = "");

/// Writes episodes.csv, summary.json and agent.json into `dir` (created if needed).
void write_run(const std::filesystem::path& dir, const TrainResult& result);

/// Reads every summary.json under the given paths (files or directories,
/// searched recursively), in sorted path order.
std::vector<metrics::RunRecord> load_runs(std::span<const std::filesystem::path> paths);

/// Cross-seed summary for a sweep: per-seed aggregates plus their mean and std.
nlohmann::ordered_json sweep_summary_json(std::span<const TrainResult> results);

/// Placement check and workload/wastage diagnostics. VM loads come from the
/// oracle's assignment of the slice; PM terms need a PM substrate.
nlohmann::ordered_json infra_report(const scenario::Scenario& scenario, const infra::WastageWeights& weights = {});

}  // namespace slicemap::experiment
