#pragma once

#include "slicemap/mdp.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slicemap::metrics {

struct EpisodeLog {
    int episode_index = 1;  // 1-based
    double total_reward = 0.0;
    int length = 0;
    int exploratory_actions = 0;
    bool success = false;  // every component placed

    friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

/// exploratory_actions / length. Throws structural_error when length < 1.
double exploration_ratio(const EpisodeLog& log);

/// Trapezoidal area under the per-episode reward curve over 1-based episode
/// indices: sum_{e=1}^{N-1} (r_e + r_{e+1}) / 2. Needs at least two episodes.
double reward_auc(std::span<const double> rewards);

inline constexpr int kConvergenceWindow = 10;
inline constexpr double kConvergenceBand = 0.10;
inline constexpr double kConvergenceAbsoluteBand = 0.1;

/// Convergence episode of a learning curve.
///
/// Rolling means are taken over forward windows: m_e = mean(r_e .. r_{e+w-1})
/// for e = 1 .. N-w+1. The reference is the last window's mean M. The
/// tolerance is band*|M|, or the absolute band when |M| < 1. The result is
/// the smallest e such that every m_k with k >= e satisfies |m_k - M| < tol
/// (strict). A curve whose stable suffix is shorter than one window is
/// reported as not converged.
///
/// Throws structural_error unless rewards.size() >= 2 * window.
std::optional<int> convergence_episode(std::span<const double> rewards,
                                       int window = kConvergenceWindow,
                                       double band = kConvergenceBand);

struct Aggregates {
    double average_reward = 0.0;
    double std_dev = 0.0;  // population std over episodes
    double auc = 0.0;
    std::optional<int> convergence_episode;
    std::vector<double> cumulative_reward;
    std::vector<double> exploration_ratio;

    friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

struct RunRecord {
    std::string variant;
    std::uint64_t seed = 0;
    std::string scenario;  // label or path of the instance
    mdp::Hyperparameters hyper;
    std::vector<EpisodeLog> episodes;
    Aggregates aggregates;
};

std::vector<double> rewards_of(std::span<const EpisodeLog> logs);

/// Recomputes every aggregate from the logs. Needs at least one episode;
/// AUC and convergence are left at 0 / empty when the curve is too short.
Aggregates summarize(std::span<const EpisodeLog> logs);

inline void summarize(RunRecord& run) { run.aggregates = summarize(run.episodes); }

/// Per-variant statistics across several runs.
struct VariantSummary {
    std::string variant;
    int runs = 0;
    double average_reward = 0.0;       // mean of per-run averages
    double average_reward_std = 0.0;   // cross-seed std of per-run averages
    double std_dev = 0.0;              // mean of per-run episode std
    double auc = 0.0;                  // mean of per-run AUC
    std::optional<double> convergence_episode;  // mean over converged runs
    int converged_runs = 0;
};

struct Comparison {
    std::vector<VariantSummary> rows;  // in first-seen variant order
    std::vector<std::string> by_average_reward;  // descending
    std::vector<std::string> by_auc;             // descending
};

Comparison compare(std::span<const RunRecord> runs);

/// True when `order` lists a before b.
bool ranks_before(const std::vector<std::string>& order, const std::string& a, const std::string& b);

// Output formats.

inline constexpr const char* kEpisodeCsvHeader =
    "episode,total_reward,length,exploratory_actions,success,cumulative_reward,exploration_ratio";

void write_episode_csv(std::ostream& out, const RunRecord& run);
nlohmann::ordered_json summary_json(const RunRecord& run);
nlohmann::ordered_json comparison_json(const Comparison& cmp);
std::string comparison_table(const Comparison& cmp);

/// Reads back a summary written by summary_json (episode logs are not part of it).
RunRecord run_from_summary_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const mdp::Hyperparameters& h);
mdp::Hyperparameters hyperparameters_from_json(const nlohmann::json& j);

}  // namespace slicemap::metrics
