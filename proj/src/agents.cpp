#include "slicemap/agents.hpp"

#include "slicemap/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace slicemap::agents {

std::string_view to_string(AgentVariant v)
{
    switch (v) {
    case AgentVariant::on_policy_tabular: return "on-tab";
    case AgentVariant::off_policy_tabular: return "off-tab";
    case AgentVariant::on_policy_linear: return "on-lin";
    case AgentVariant::off_policy_linear: return "off-lin";
    }
    return "?";
}

AgentVariant variant_from_string(std::string_view name)
{
    for (auto v : kAllVariants)
        if (to_string(v) == name) return v;
    throw validation_error(fmt::format("unknown variant '{}' (expected on-tab|off-tab|on-lin|off-lin)", name));
}

std::size_t StateKeyLayout::key(const mdp::MappingEpisodeState& s) const
{
    if (s.next_component < 1 || static_cast<std::size_t>(s.next_component) > components || s.anchor_vm < 1
        || static_cast<std::size_t>(s.anchor_vm) > vms)
        throw structural_error(fmt::format("state (f{}, v{}) outside a {}x{} layout", s.next_component,
                                           s.anchor_vm, components, vms));
    return static_cast<std::size_t>(s.next_component - 1) * vms + static_cast<std::size_t>(s.anchor_vm - 1);
}

// QTable

QTable::QTable(std::size_t components, std::size_t vms)
    : layout_{components, vms}, values_(components * vms * vms, 0.0)
{
}

double& QTable::at(std::size_t state, std::size_t action)
{
    return values_[state * layout_.vms + action];
}

double QTable::at(std::size_t state, std::size_t action) const
{
    return values_[state * layout_.vms + action];
}

std::span<const double> QTable::row(std::size_t state) const
{
    return {values_.data() + state * layout_.vms, layout_.vms};
}

std::span<double> QTable::row(std::size_t state)
{
    return {values_.data() + state * layout_.vms, layout_.vms};
}

// Features

Features feature_map(const mdp::MappingEpisodeState& state, mdp::Action action, const mdp::MappingEnvironment& env)
{
    const auto& c = env.component(state.next_component);
    const auto& vm = env.vm(action.target_vm);
    const double compute_ratio = c.compute_req / vm.compute_cap;
    const double storage_ratio = c.storage_req / vm.storage_cap;
    const bool occupied = state.is_occupied(action.target_vm);
    const bool feasible = !occupied && capacity_fits(c, vm);
    return {
        1.0,
        std::min(compute_ratio, 2.0),
        std::min(storage_ratio, 2.0),
        std::clamp(1.0 - compute_ratio, 0.0, 1.0),
        std::clamp(1.0 - storage_ratio, 0.0, 1.0),
        feasible ? 1.0 : 0.0,
        occupied ? 1.0 : 0.0,
    };
}

double LinearQ::value(const Features& phi) const
{
    double v = 0.0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) v += weights[k] * phi[k];
    return v;
}

std::vector<double> action_values(const LinearQ& q, const mdp::MappingEpisodeState& state,
                                  const mdp::MappingEnvironment& env)
{
    std::vector<double> out(env.vm_count());
    for (std::size_t a = 0; a < out.size(); ++a)
        out[a] = q.value(feature_map(state, {static_cast<int>(a) + 1}, env));
    return out;
}

// Action selection

std::size_t argmax(std::span<const double> values)
{
    if (values.empty()) throw structural_error("argmax of an empty row");
    std::size_t best = 0;
    for (std::size_t a = 1; a < values.size(); ++a)
        if (values[a] > values[best]) best = a;
    return best;
}

ActionChoice select_action(std::span<const double> values, double epsilon, Rng& rng)
{
    if (values.empty()) throw structural_error("no actions to choose from");
    if (rng.uniform01() < epsilon)
        return {{static_cast<int>(rng.uniform_index(values.size())) + 1}, true};
    return {{static_cast<int>(argmax(values)) + 1}, false};
}

ActionChoice select_action(const QTable& q, const mdp::MappingEpisodeState& state, double epsilon, Rng& rng)
{
    return select_action(q.row(q.layout().key(state)), epsilon, rng);
}

ActionChoice select_action(const LinearQ& q, const mdp::MappingEpisodeState& state,
                           const mdp::MappingEnvironment& env, double epsilon, Rng& rng)
{
    const auto values = action_values(q, state, env);
    return select_action(values, epsilon, rng);
}

// PolicyTable

PolicyTable::PolicyTable(StateKeyLayout layout, PolicyMode mode, double epsilon)
    : layout_(layout),
      mode_(mode),
      epsilon_(mode == PolicyMode::greedy_target ? 0.0 : epsilon),
      probs_(layout.state_count() * layout.vms, 0.0),
      greedy_(layout.state_count(), 0)
{
    if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0))
        throw validation_error(fmt::format("epsilon {} outside [0, 1]", epsilon));
    // pi_0 is derived from Q_0 = 0, whose argmax is the first action.
    for (std::size_t s = 0; s < layout_.state_count(); ++s) set_greedy(s, 0);
}

std::span<const double> PolicyTable::row(std::size_t state) const
{
    return {probs_.data() + state * layout_.vms, layout_.vms};
}

void PolicyTable::set_greedy(std::size_t state, std::size_t greedy)
{
    const std::size_t n = layout_.vms;
    if (state >= layout_.state_count() || greedy >= n) throw structural_error("policy index out of range");
    const double nd = static_cast<double>(n);
    const double other = epsilon_ / nd;
    const double top = 1.0 - (epsilon_ / nd) * (nd - 1.0);
    double* row = probs_.data() + state * n;
    std::fill(row, row + n, other);
    row[greedy] = top;
    greedy_[state] = greedy;
}

ActionChoice PolicyTable::sample(std::size_t state, Rng& rng) const
{
    if (rng.uniform01() < epsilon_)
        return {{static_cast<int>(rng.uniform_index(layout_.vms)) + 1}, true};
    return {{static_cast<int>(greedy_[state]) + 1}, false};
}

namespace {

void require_mode(const PolicyTable& p, PolicyMode mode, double epsilon)
{
    if (p.mode() != mode) throw contract_error("policy table has the wrong mode for this update");
    if (mode == PolicyMode::epsilon_greedy && epsilon != p.epsilon())
        throw contract_error(fmt::format("policy table was built for epsilon {}, not {}", p.epsilon(), epsilon));
}

}  // namespace

void epsilon_greedy_policy_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const QTable& q,
                                  double epsilon)
{
    require_mode(policy, PolicyMode::epsilon_greedy, epsilon);
    const auto key = q.layout().key(state);
    policy.set_greedy(key, argmax(q.row(key)));
}

void greedy_target_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const QTable& q)
{
    require_mode(policy, PolicyMode::greedy_target, 0.0);
    const auto key = q.layout().key(state);
    policy.set_greedy(key, argmax(q.row(key)));
}

void epsilon_greedy_policy_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const LinearQ& q,
                                  const mdp::MappingEnvironment& env, double epsilon)
{
    require_mode(policy, PolicyMode::epsilon_greedy, epsilon);
    policy.set_greedy(policy.layout().key(state), argmax(action_values(q, state, env)));
}

void greedy_target_update(PolicyTable& policy, const mdp::MappingEpisodeState& state, const LinearQ& q,
                          const mdp::MappingEnvironment& env)
{
    require_mode(policy, PolicyMode::greedy_target, 0.0);
    policy.set_greedy(policy.layout().key(state), argmax(action_values(q, state, env)));
}

// Visit counts and learning rate

VisitCounts::VisitCounts(StateKeyLayout layout) : layout_(layout), counts_(layout.state_count() * layout.vms, 0)
{
}

std::uint32_t VisitCounts::get(std::size_t state, std::size_t action) const
{
    return counts_[state * layout_.vms + action];
}

void VisitCounts::bump(std::size_t state, std::size_t action)
{
    ++counts_[state * layout_.vms + action];
}

double learning_rate(const mdp::Hyperparameters& h, std::uint32_t visits)
{
    if (h.alpha_schedule == mdp::AlphaSchedule::fixed) return h.alpha;
    return h.alpha / (1.0 + static_cast<double>(visits) / 100.0);
}

// Updates

namespace {

double apply_tabular(QTable& q, const Transition& t, double alpha, double target)
{
    double& value = q.at(q.layout().key(t.state), static_cast<std::size_t>(t.action.target_vm - 1));
    value = value - alpha * (value - target);
    return target;
}

}  // namespace

double semi_gradient_step(LinearQ& q, const Features& phi, double target, double alpha)
{
    const double td_error = target - q.value(phi);
    for (std::size_t k = 0; k < kFeatureCount; ++k) q.weights[k] += alpha * td_error * phi[k];
    for (double w : q.weights) {
        if (!std::isfinite(w) || std::abs(w) > kDivergenceLimit)
            throw divergence_error(fmt::format("linear weights diverged: [{}]", fmt::join(q.weights, ", ")));
    }
    return td_error;
}

double tabular_update(QTable& q, const Transition& t, double alpha, double gamma)
{
    double bootstrap = 0.0;
    if (t.next_state) {
        const auto row = q.row(q.layout().key(*t.next_state));
        bootstrap = *std::max_element(row.begin(), row.end());
    }
    return apply_tabular(q, t, alpha, t.reward + gamma * bootstrap);
}

double tabular_update(QTable& q, const Transition& t, double alpha, double gamma, mdp::Action next_action)
{
    double bootstrap = 0.0;
    if (t.next_state)
        bootstrap = q.at(q.layout().key(*t.next_state), static_cast<std::size_t>(next_action.target_vm - 1));
    return apply_tabular(q, t, alpha, t.reward + gamma * bootstrap);
}

double linear_update(LinearQ& q, const Transition& t, const mdp::MappingEnvironment& env, double alpha,
                     double gamma)
{
    double bootstrap = 0.0;
    if (t.next_state) {
        const auto values = action_values(q, *t.next_state, env);
        bootstrap = *std::max_element(values.begin(), values.end());
    }
    const double target = t.reward + gamma * bootstrap;
    semi_gradient_step(q, feature_map(t.state, t.action, env), target, alpha);
    return target;
}

double linear_update(LinearQ& q, const Transition& t, const mdp::MappingEnvironment& env, double alpha,
                     double gamma, mdp::Action next_action)
{
    double bootstrap = 0.0;
    if (t.next_state) bootstrap = q.value(feature_map(*t.next_state, next_action, env));
    const double target = t.reward + gamma * bootstrap;
    semi_gradient_step(q, feature_map(t.state, t.action, env), target, alpha);
    return target;
}

// Learner

Learner::Learner(AgentVariant variant, std::size_t components, std::size_t vms, double epsilon)
    : variant_(variant),
      layout_{components, vms},
      q_(is_tabular(variant) ? components : 0, is_tabular(variant) ? vms : 0),
      policy_(layout_, is_on_policy(variant) ? PolicyMode::epsilon_greedy : PolicyMode::greedy_target, epsilon),
      visits_(layout_)
{
    if (components == 0 || vms == 0) throw structural_error("learner needs at least one component and one VM");
}

std::vector<double> Learner::values(const mdp::MappingEpisodeState& state, const mdp::MappingEnvironment& env) const
{
    if (is_tabular(variant_)) {
        const auto row = q_.row(layout_.key(state));
        return {row.begin(), row.end()};
    }
    return action_values(linear_, state, env);
}

mdp::Action Learner::greedy_action(const mdp::MappingEpisodeState& state, const mdp::MappingEnvironment& env) const
{
    const auto v = values(state, env);
    return {static_cast<int>(argmax(v)) + 1};
}

namespace {

void check_dimensions(const Learner& learner, const mdp::MappingEnvironment& env)
{
    if (learner.layout().components != env.component_count() || learner.layout().vms != env.vm_count())
        throw structural_error(fmt::format("learner is {}x{} but the environment is {}x{}",
                                           learner.layout().components, learner.layout().vms,
                                           env.component_count(), env.vm_count()));
}

}  // namespace

EpisodeTrace run_episode(Learner& learner, const mdp::MappingEnvironment& env, const mdp::Hyperparameters& hyper,
                         Rng& rng)
{
    check_dimensions(learner, env);
    const AgentVariant variant = learner.variant();
    const bool on_policy = is_on_policy(variant);
    const bool tabular = is_tabular(variant);
    const auto& layout = learner.layout();

    auto act = [&](const mdp::MappingEpisodeState& s) -> ActionChoice {
        if (on_policy) return learner.policy().sample(layout.key(s), rng);
        return select_action(learner.values(s, env), hyper.epsilon, rng);
    };

    EpisodeTrace trace;
    auto state = env.reset(rng);
    ActionChoice choice = act(state);
    while (true) {
        const auto out = env.step(state, choice.action);

        StepRecord rec;
        rec.state = state;
        rec.action = choice.action;
        rec.reward = out.reward;
        rec.exploratory = choice.exploratory;
        rec.feasible = out.feasible;

        trace.log.total_reward += out.reward;
        trace.log.length += 1;
        trace.log.exploratory_actions += choice.exploratory ? 1 : 0;

        Transition t{state, choice.action, out.reward, std::nullopt};
        if (!out.terminated) t.next_state = out.next_state;

        const std::size_t key = layout.key(state);
        const auto action_index = static_cast<std::size_t>(choice.action.target_vm - 1);
        const double alpha = learning_rate(hyper, learner.visits().get(key, action_index));
        learner.visits().bump(key, action_index);

        std::optional<ActionChoice> next;
        if (on_policy && !out.terminated) next = act(out.next_state);

        if (tabular) {
            rec.td_target = next ? tabular_update(learner.q_table(), t, alpha, hyper.gamma, next->action)
                                 : tabular_update(learner.q_table(), t, alpha, hyper.gamma);
        } else {
            rec.td_target = next ? linear_update(learner.linear(), t, env, alpha, hyper.gamma, next->action)
                                 : linear_update(learner.linear(), t, env, alpha, hyper.gamma);
        }

        if (tabular && on_policy)
            epsilon_greedy_policy_update(learner.policy(), state, learner.q_table(), learner.policy().epsilon());
        else if (tabular)
            greedy_target_update(learner.policy(), state, learner.q_table());
        else if (on_policy)
            epsilon_greedy_policy_update(learner.policy(), state, learner.linear(), env, learner.policy().epsilon());
        else
            greedy_target_update(learner.policy(), state, learner.linear(), env);

        if (out.terminated) {
            trace.log.success = out.feasible && state.next_component == static_cast<int>(env.component_count());
            trace.steps.push_back(std::move(rec));
            break;
        }
        if (!next) next = act(out.next_state);
        rec.next_action = next->action;
        trace.steps.push_back(std::move(rec));
        state = out.next_state;
        choice = *next;
    }
    return trace;
}

Rollout greedy_rollout(const Learner& learner, const mdp::MappingEnvironment& env, int primary_vm)
{
    check_dimensions(learner, env);
    Rollout r;
    auto state = env.reset_at(primary_vm);
    while (true) {
        const auto a = learner.greedy_action(state, env);
        const auto out = env.step(state, a);
        r.actions.push_back(a);
        r.rewards.push_back(out.reward);
        if (out.terminated) {
            r.success = out.feasible && state.next_component == static_cast<int>(env.component_count());
            break;
        }
        state = out.next_state;
    }
    return r;
}

// Serialization

namespace {

constexpr int kAgentFormatVersion = 1;
constexpr const char* kAgentFormat = "slicemap-agent";
constexpr const char* kStateKey = "(component_index - 1) * vms + (anchor_vm - 1)";

}  // namespace

nlohmann::ordered_json to_json(const Learner& learner)
{
    nlohmann::ordered_json j;
    j["format"] = kAgentFormat;
    j["version"] = kAgentFormatVersion;
    j["variant"] = std::string(to_string(learner.variant()));
    j["components"] = learner.layout().components;
    j["vms"] = learner.layout().vms;
    j["state_key"] = kStateKey;
    j["epsilon"] = learner.policy().epsilon();
    if (is_tabular(learner.variant()))
        j["q"] = learner.q_table().values();
    else
        j["weights"] = learner.linear().weights;
    return j;
}

Learner learner_from_json(const nlohmann::json& j)
{
    auto field = [&](const char* name) -> const nlohmann::json& {
        if (!j.contains(name)) throw parse_error(name, fmt::format("agent file is missing '{}'", name));
        return j.at(name);
    };
    try {
        if (field("format").get<std::string>() != kAgentFormat)
            throw parse_error("format", "not a slicemap agent file");
        if (field("version").get<int>() != kAgentFormatVersion)
            throw parse_error("version", fmt::format("unsupported agent file version {}", j.at("version").dump()));
        const auto variant = variant_from_string(field("variant").get<std::string>());
        const auto components = field("components").get<std::size_t>();
        const auto vms = field("vms").get<std::size_t>();
        Learner learner(variant, components, vms, j.value("epsilon", 0.0));
        if (is_tabular(variant)) {
            const auto q = field("q").get<std::vector<double>>();
            if (q.size() != components * vms * vms)
                throw parse_error("q", fmt::format("expected {} Q values, got {}", components * vms * vms, q.size()));
            std::copy(q.begin(), q.end(), learner.q_table().row(0).data());
            for (std::size_t s = 0; s < learner.layout().state_count(); ++s)
                learner.policy().set_greedy(s, argmax(learner.q_table().row(s)));
        } else {
            const auto w = field("weights").get<std::vector<double>>();
            if (w.size() != kFeatureCount)
                throw parse_error("weights", fmt::format("expected {} weights, got {}", kFeatureCount, w.size()));
            std::copy(w.begin(), w.end(), learner.linear().weights.begin());
        }
        return learner;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("agent", fmt::format("malformed agent file: {}", e.what()));
    }
}

}  // namespace slicemap::agents
