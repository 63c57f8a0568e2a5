#include "slicemap/metrics.hpp"

#include "slicemap/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace slicemap::metrics {

double exploration_ratio(const EpisodeLog& log)
{
    if (log.length < 1) throw structural_error("exploration ratio of an empty episode");
    return static_cast<double>(log.exploratory_actions) / static_cast<double>(log.length);
}

double reward_auc(std::span<const double> rewards)
{
    if (rewards.size() < 2) throw structural_error("AUC needs at least two episodes");
    double area = 0.0;
    for (std::size_t e = 0; e + 1 < rewards.size(); ++e) area += (rewards[e] + rewards[e + 1]) / 2.0;
    return area;
}

std::optional<int> convergence_episode(std::span<const double> rewards, int window, double band)
{
    if (window < 1) throw structural_error("window must be positive");
    const auto w = static_cast<std::size_t>(window);
    if (rewards.size() < 2 * w)
        throw structural_error(fmt::format("convergence needs at least {} episodes, got {}", 2 * w, rewards.size()));

    const std::size_t count = rewards.size() - w + 1;
    std::vector<double> means(count);
    for (std::size_t e = 0; e < count; ++e) {
        double s = 0.0;
        for (std::size_t k = e; k < e + w; ++k) s += rewards[k];
        means[e] = s / static_cast<double>(w);
    }
    const double final_mean = means.back();
    const double tol = std::abs(final_mean) < 1.0 ? kConvergenceAbsoluteBand : band * std::abs(final_mean);

    std::size_t first = count;
    while (first > 0 && std::abs(means[first - 1] - final_mean) < tol) --first;
    if (count - first < w) return std::nullopt;
    return static_cast<int>(first) + 1;
}

std::vector<double> rewards_of(std::span<const EpisodeLog> logs)
{
    std::vector<double> r;
    r.reserve(logs.size());
    for (const auto& l : logs) r.push_back(l.total_reward);
    return r;
}

Aggregates summarize(std::span<const EpisodeLog> logs)
{
    if (logs.empty()) throw structural_error("cannot summarize a run without episodes");
    Aggregates a;
    const auto rewards = rewards_of(logs);
    const double n = static_cast<double>(rewards.size());

    double sum = 0.0;
    a.cumulative_reward.reserve(rewards.size());
    for (double r : rewards) {
        sum += r;
        a.cumulative_reward.push_back(sum);
    }
    a.average_reward = sum / n;

    double sq = 0.0;
    for (double r : rewards) sq += (r - a.average_reward) * (r - a.average_reward);
    a.std_dev = std::sqrt(sq / n);

    a.exploration_ratio.reserve(logs.size());
    for (const auto& l : logs) a.exploration_ratio.push_back(exploration_ratio(l));

    if (rewards.size() >= 2) a.auc = reward_auc(rewards);
    if (rewards.size() >= 2 * static_cast<std::size_t>(kConvergenceWindow))
        a.convergence_episode = convergence_episode(rewards);
    return a;
}

Comparison compare(std::span<const RunRecord> runs)
{
    if (runs.empty()) throw structural_error("nothing to compare");
    Comparison cmp;
    std::vector<std::string> order;
    std::map<std::string, std::vector<const RunRecord*>> groups;
    for (const auto& r : runs) {
        if (!groups.contains(r.variant)) order.push_back(r.variant);
        groups[r.variant].push_back(&r);
    }

    for (const auto& name : order) {
        const auto& g = groups[name];
        VariantSummary s;
        s.variant = name;
        s.runs = static_cast<int>(g.size());
        double conv = 0.0;
        for (const RunRecord* r : g) {
            s.average_reward += r->aggregates.average_reward;
            s.std_dev += r->aggregates.std_dev;
            s.auc += r->aggregates.auc;
            if (r->aggregates.convergence_episode) {
                conv += *r->aggregates.convergence_episode;
                ++s.converged_runs;
            }
        }
        const double n = static_cast<double>(g.size());
        s.average_reward /= n;
        s.std_dev /= n;
        s.auc /= n;
        if (s.converged_runs > 0) s.convergence_episode = conv / s.converged_runs;
        double sq = 0.0;
        for (const RunRecord* r : g) sq += std::pow(r->aggregates.average_reward - s.average_reward, 2);
        s.average_reward_std = std::sqrt(sq / n);
        cmp.rows.push_back(s);
    }

    auto ranked = [&](auto key) {
        std::vector<const VariantSummary*> rows;
        for (const auto& r : cmp.rows) rows.push_back(&r);
        std::stable_sort(rows.begin(), rows.end(), [&](auto* a, auto* b) { return key(*a) > key(*b); });
        std::vector<std::string> names;
        for (auto* r : rows) names.push_back(r->variant);
        return names;
    };
    cmp.by_average_reward = ranked([](const VariantSummary& s) { return s.average_reward; });
    cmp.by_auc = ranked([](const VariantSummary& s) { return s.auc; });
    return cmp;
}

bool ranks_before(const std::vector<std::string>& order, const std::string& a, const std::string& b)
{
    auto ia = std::find(order.begin(), order.end(), a);
    auto ib = std::find(order.begin(), order.end(), b);
    return ia != order.end() && ib != order.end() && ia < ib;
}

void write_episode_csv(std::ostream& out, const RunRecord& run)
{
    out << kEpisodeCsvHeader << '\n';
    double cumulative = 0.0;
    for (const auto& e : run.episodes) {
        cumulative += e.total_reward;
        out << fmt::format("{},{},{},{},{},{},{}\n", e.episode_index, e.total_reward, e.length,
                           e.exploratory_actions, e.success ? 1 : 0, cumulative, exploration_ratio(e));
    }
}

nlohmann::ordered_json to_json(const mdp::Hyperparameters& h)
{
    return {
        {"alpha", h.alpha},
        {"gamma", h.gamma},
        {"epsilon", h.epsilon},
        {"episodes", h.episodes},
        {"reward_mode", std::string(mdp::to_string(h.reward_mode))},
        {"alpha_schedule", std::string(mdp::to_string(h.alpha_schedule))},
    };
}

mdp::Hyperparameters hyperparameters_from_json(const nlohmann::json& j)
{
    mdp::Hyperparameters h;
    h.alpha = j.at("alpha").get<double>();
    h.gamma = j.at("gamma").get<double>();
    h.epsilon = j.at("epsilon").get<double>();
    h.episodes = j.at("episodes").get<int>();
    h.reward_mode = mdp::reward_mode_from_string(j.at("reward_mode").get<std::string>());
    h.alpha_schedule = mdp::alpha_schedule_from_string(j.at("alpha_schedule").get<std::string>());
    return h;
}

nlohmann::ordered_json summary_json(const RunRecord& run)
{
    const auto& a = run.aggregates;
    nlohmann::ordered_json j;
    j["variant"] = run.variant;
    j["seed"] = run.seed;
    j["scenario"] = run.scenario;
    j["hyperparameters"] = to_json(run.hyper);
    j["episodes"] = run.episodes.size();
    j["average_reward"] = a.average_reward;
    j["std_dev"] = a.std_dev;
    j["auc"] = a.auc;
    j["convergence_episode"] = a.convergence_episode ? nlohmann::ordered_json(*a.convergence_episode) : nullptr;
    int successes = 0;
    for (const auto& e : run.episodes) successes += e.success ? 1 : 0;
    j["successful_episodes"] = successes;
    j["final_cumulative_reward"] = a.cumulative_reward.empty() ? 0.0 : a.cumulative_reward.back();
    return j;
}

RunRecord run_from_summary_json(const nlohmann::json& j)
{
    try {
        RunRecord r;
        r.variant = j.at("variant").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.scenario = j.value("scenario", "");
        r.hyper = hyperparameters_from_json(j.at("hyperparameters"));
        r.aggregates.average_reward = j.at("average_reward").get<double>();
        r.aggregates.std_dev = j.at("std_dev").get<double>();
        r.aggregates.auc = j.at("auc").get<double>();
        if (!j.at("convergence_episode").is_null())
            r.aggregates.convergence_episode = j.at("convergence_episode").get<int>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("summary", fmt::format("malformed run summary: {}", e.what()));
    }
}

nlohmann::ordered_json comparison_json(const Comparison& cmp)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json variants = nlohmann::ordered_json::object();
    for (const auto& r : cmp.rows) {
        variants[r.variant] = {
            {"runs", r.runs},
            {"average_reward", r.average_reward},
            {"average_reward_std_across_runs", r.average_reward_std},
            {"std_dev", r.std_dev},
            {"auc", r.auc},
            {"convergence_episode",
             r.convergence_episode ? nlohmann::ordered_json(*r.convergence_episode) : nlohmann::ordered_json(nullptr)},
            {"converged_runs", r.converged_runs},
        };
    }
    j["variants"] = variants;
    j["ordering"] = {{"average_reward", cmp.by_average_reward}, {"auc", cmp.by_auc}};
    return j;
}

std::string comparison_table(const Comparison& cmp)
{
    std::string out = fmt::format("{:<10} | {:>14} | {:>18} | {:>19} | {:>10}\n", "Algorithm", "Average Reward",
                                  "Standard Deviation", "Convergence Episode", "AUC");
    out += std::string(83, '-') + '\n';
    for (const auto& r : cmp.rows) {
        const std::string conv = r.convergence_episode ? fmt::format("{:.1f}", *r.convergence_episode) : "n/a";
        out += fmt::format("{:<10} | {:>14.2f} | {:>18.2f} | {:>19} | {:>10.2f}\n", r.variant, r.average_reward,
                           r.std_dev, conv, r.auc);
    }
    return out;
}

}  // namespace slicemap::metrics
