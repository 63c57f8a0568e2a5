#pragma once

#include "slicemap/mdp.hpp"
#include "slicemap/metrics.hpp"
#include "slicemap/random.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace slicemap::agents {

enum class AgentVariant {
    on_policy_tabular,
    off_policy_tabular,
    on_policy_linear,
    off_policy_linear,
};

inline constexpr std::array<AgentVariant, 4> kAllVariants = {
    AgentVariant::on_policy_tabular,
    AgentVariant::off_policy_tabular,
    AgentVariant::on_policy_linear,
    AgentVariant::off_policy_linear,
};

/// Short CLI names: on-tab, off-tab, on-lin, off-lin.
std::string_view to_string(AgentVariant v);
AgentVariant variant_from_string(std::string_view name);

constexpr bool is_tabular(AgentVariant v)
{
    return v == AgentVariant::on_policy_tabular || v == AgentVariant::off_policy_tabular;
}
constexpr bool is_on_policy(AgentVariant v)
{
    return v == AgentVariant::on_policy_tabular || v == AgentVariant::on_policy_linear;
}

/// Dense index of (component index, anchor VM): (i - 1) * m + (anchor - 1).
struct StateKeyLayout {
    std::size_t components = 0;
    std::size_t vms = 0;

    std::size_t state_count() const noexcept { return components * vms; }
    std::size_t key(const mdp::MappingEpisodeState& s) const;
};

/// Tabular action values, all starting at zero.
class QTable {
public:
    QTable(std::size_t components, std::size_t vms);

    const StateKeyLayout& layout() const noexcept { return layout_; }
    std::size_t action_count() const noexcept { return layout_.vms; }

    double& at(std::size_t state, std::size_t action);
    double at(std::size_t state, std::size_t action) const;

    std::span<const double> row(std::size_t state) const;
    std::span<double> row(std::size_t state);

    const std::vector<double>& values() const noexcept { return values_; }

private:
    StateKeyLayout layout_;
    std::vector<double> values_;
};

inline constexpr std::size_t kFeatureCount = 7;
using Features = std::array<double, kFeatureCount>;

/// State-action features for the linear learner:
///   0 bias
///   1 compute ratio  min(C_req / C_max, 2)
///   2 storage ratio  min(S_req / S_max, 2)
///   3 compute waste  clamp(1 - C_req / C_max, 0, 1)
///   4 storage waste  clamp(1 - S_req / S_max, 0, 1)
///   5 feasible       target available and large enough
///   6 occupied       target already hosts a component
Features feature_map(const mdp::MappingEpisodeState& state, mdp::Action action, const mdp::MappingEnvironment& env);

struct LinearQ {
    Features weights{};  // zero-initialised

    double value(const Features& phi) const;
};

/// Q-hat(state, a) for every action a = 1..m.
std::vector<double> action_values(const LinearQ& q, const mdp::MappingEpisodeState& state,
                                  const mdp::MappingEnvironment& env);

/// First index of the maximum (lowest VM id wins ties).
std::size_t argmax(std::span<const double> values);

struct ActionChoice {
    mdp::Action action;
    bool exploratory = false;
};

/// Epsilon-greedy over a row of action values: with probability epsilon a
/// uniform action (flagged exploratory), otherwise the argmax.
ActionChoice select_action(std::span<const double> values, double epsilon, Rng& rng);
ActionChoice select_action(const QTable& q, const mdp::MappingEpisodeState& state, double epsilon, Rng& rng);
ActionChoice select_action(const LinearQ& q, const mdp::MappingEpisodeState& state,
                           const mdp::MappingEnvironment& env, double epsilon, Rng& rng);

enum class PolicyMode {
    epsilon_greedy,  // greedy action 1 - (eps/|A|)(|A| - 1), others eps/|A|
    greedy_target,   // all mass on the greedy action
};

/// Explicit per-state action distributions, one row per state key.
class PolicyTable {
public:
    PolicyTable(StateKeyLayout layout, PolicyMode mode, double epsilon = 0.0);

    PolicyMode mode() const noexcept { return mode_; }
    double epsilon() const noexcept { return epsilon_; }
    const StateKeyLayout& layout() const noexcept { return layout_; }

    std::span<const double> row(std::size_t state) const;
    std::size_t greedy_action(std::size_t state) const { return greedy_[state]; }

    /// Rewrites one row around `greedy` with this table's epsilon.
    void set_greedy(std::size_t state, std::size_t greedy);

    /// Draws from a row: the epsilon branch picks uniformly (exploratory),
    /// the rest goes to the greedy action. Same law as the stored row.
    ActionChoice sample(std::size_t state, Rng& rng) const;

private:
    StateKeyLayout layout_;
    PolicyMode mode_;
    double epsilon_;
    std::vector<double> probs_;
    std::vector<std::size_t> greedy_;
};

/// On-policy improvement step for one state from a Q-table.
void epsilon_greedy_policy_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const QTable& q,
                                  double epsilon);
/// Greedy target improvement step for one state from a Q-table.
void greedy_target_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const QTable& q);

/// Same two updates from a linear estimate.
void epsilon_greedy_policy_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const LinearQ& q,
                                  const mdp::MappingEnvironment& env, double epsilon);
void greedy_target_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const LinearQ& q,
                          const mdp::MappingEnvironment& env);

/// Per (state key, action) update counts for the harmonic learning-rate schedule.
class VisitCounts {
public:
    explicit VisitCounts(StateKeyLayout layout);

    std::uint32_t get(std::size_t state, std::size_t action) const;
    void bump(std::size_t state, std::size_t action);

private:
    StateKeyLayout layout_;
    std::vector<std::uint32_t> counts_;
};

/// Learning rate for the next update of (state, action).
double learning_rate(const mdp::Hyperparameters& h, std::uint32_t visits);

/// (S, A, R, S') with S' absent when the step ended the episode.
struct Transition {
    mdp::MappingEpisodeState state;
    mdp::Action action;
    double reward = 0.0;
    std::optional<mdp::MappingEpisodeState> next_state;
};

/// Q(S,A) <- Q(S,A) - alpha [Q(S,A) - (R + gamma max_a Q(S',a))], terminal S'
/// contributing zero. Returns the TD target used.
double tabular_update(QTable& q, const Transition& t, double alpha, double gamma);

/// Same rule with the bootstrap on a given next action (on-policy form).
double tabular_update(QTable& q, const Transition& t, double alpha, double gamma, mdp::Action next_action);

inline constexpr double kDivergenceLimit = 1e9;

/// w <- w + alpha (target - w.phi) phi. Returns the TD error. Throws
/// divergence_error when a weight leaves [-1e9, 1e9] or turns non-finite.
double semi_gradient_step(LinearQ& q, const Features& phi, double target, double alpha);

/// Semi-gradient step w <- w + alpha [R + gamma max_a w.phi(S',a) - w.phi(S,A)] phi(S,A).
/// Throws divergence_error when a weight leaves [-1e9, 1e9] or turns non-finite.
/// Returns the TD target used.
double linear_update(LinearQ& q, const Transition& t, const mdp::MappingEnvironment& env, double alpha,
                     double gamma);

/// Same rule with the bootstrap on a given next action.
double linear_update(LinearQ& q, const Transition& t, const mdp::MappingEnvironment& env, double alpha,
                     double gamma, mdp::Action next_action);

/// Everything one training run owns.
///
/// On-policy variants act from their epsilon-greedy policy table and
/// bootstrap on the action that table picks next. Off-policy variants act
/// epsilon-greedily on the current estimate, bootstrap on the max, and keep a
/// greedy target table.
class Learner {
public:
    Learner(AgentVariant variant, std::size_t components, std::size_t vms, double epsilon);

    AgentVariant variant() const noexcept { return variant_; }
    const StateKeyLayout& layout() const noexcept { return layout_; }

    const QTable& q_table() const { return q_; }
    QTable& q_table() { return q_; }
    const LinearQ& linear() const noexcept { return linear_; }
    LinearQ& linear() noexcept { return linear_; }
    const PolicyTable& policy() const noexcept { return policy_; }
    PolicyTable& policy() noexcept { return policy_; }
    VisitCounts& visits() noexcept { return visits_; }

    /// Estimated values of all actions in `state`.
    std::vector<double> values(const mdp::MappingEpisodeState& state, const mdp::MappingEnvironment& env) const;

    /// Action of the learnt greedy policy (ties to the lowest VM id).
    mdp::Action greedy_action(const mdp::MappingEpisodeState& state, const mdp::MappingEnvironment& env) const;

private:
    AgentVariant variant_;
    StateKeyLayout layout_;
    QTable q_;  // empty (0 x 0) for linear variants
    LinearQ linear_;
    PolicyTable policy_;
    VisitCounts visits_;
};

/// One step of an episode, for inspection.
struct StepRecord {
    mdp::MappingEpisodeState state;
    mdp::Action action;
    double reward = 0.0;
    bool exploratory = false;
    bool feasible = false;
    double td_target = 0.0;
    std::optional<mdp::Action> next_action;  // action actually taken next, if any
};

struct EpisodeTrace {
    metrics::EpisodeLog log;
    std::vector<StepRecord> steps;
};

/// Runs one training episode and updates the learner in place. Episode
/// index in the log is left at 1; callers number episodes.
EpisodeTrace run_episode(Learner& learner, const mdp::MappingEnvironment& env, const mdp::Hyperparameters& hyper,
                         Rng& rng);

/// Greedy rollout of the learnt policy from a given primary VM.
struct Rollout {
    std::vector<mdp::Action> actions;
    std::vector<double> rewards;
    bool success = false;
};

Rollout greedy_rollout(const Learner& learner, const mdp::MappingEnvironment& env, int primary_vm);

/// Versioned JSON form of a trained learner (variant, state-key layout, and
/// table or weights). Policy tables and visit counts are rebuilt on load.
nlohmann::ordered_json to_json(const Learner& learner);
Learner learner_from_json(const nlohmann::json& j);

}  // namespace slicemap::agents
