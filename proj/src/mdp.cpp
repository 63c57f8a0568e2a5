#include "slicemap/mdp.hpp"

#include "slicemap/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace slicemap::mdp {

std::string_view to_string(RewardMode mode)
{
    return mode == RewardMode::paper_literal ? "paper-literal" : "efficiency";
}

RewardMode reward_mode_from_string(std::string_view name)
{
    if (name == "paper-literal") return RewardMode::paper_literal;
    if (name == "efficiency") return RewardMode::efficiency;
    throw validation_error(fmt::format("unknown reward mode '{}' (expected paper-literal|efficiency)", name));
}

std::string_view to_string(AlphaSchedule schedule)
{
    return schedule == AlphaSchedule::fixed ? "fixed" : "harmonic";
}

AlphaSchedule alpha_schedule_from_string(std::string_view name)
{
    if (name == "fixed") return AlphaSchedule::fixed;
    if (name == "harmonic") return AlphaSchedule::harmonic_decay;
    throw validation_error(fmt::format("unknown alpha schedule '{}' (expected fixed|harmonic)", name));
}

void validate(const Hyperparameters& h)
{
    if (!(h.alpha >= 0.0 && h.alpha <= 1.0))
        throw validation_error(fmt::format("alpha {} outside [0, 1]", h.alpha));
    if (!(h.gamma > 0.0 && h.gamma < 1.0))
        throw validation_error(fmt::format("gamma {} outside (0, 1)", h.gamma));
    if (!(h.epsilon >= 0.0 && h.epsilon <= 1.0))
        throw validation_error(fmt::format("epsilon {} outside [0, 1]", h.epsilon));
    if (h.episodes < 1)
        throw validation_error(fmt::format("episodes must be positive, got {}", h.episodes));
}

std::size_t MappingEpisodeState::occupied_count() const
{
    return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), true));
}

double placement_reward(RewardMode mode, const VnfComponent& c, const VirtualMachine& vm)
{
    const double storage_used = c.storage_req / vm.storage_cap;
    const double compute_used = c.compute_req / vm.compute_cap;
    if (mode == RewardMode::paper_literal) return (1.0 - storage_used) + (1.0 - compute_used);
    return storage_used + compute_used;
}

MappingEnvironment::MappingEnvironment(std::vector<VnfComponent> components, std::vector<VirtualMachine> vms,
                                       RewardMode mode)
    : components_(std::move(components)), vms_(std::move(vms)), mode_(mode)
{
    if (components_.empty()) throw structural_error("environment needs at least one component");
    if (vms_.empty()) throw structural_error("environment needs at least one VM");
    for (std::size_t i = 0; i < components_.size(); ++i) validate(components_[i]);
    for (std::size_t j = 0; j < vms_.size(); ++j) {
        validate(vms_[j]);
        if (vms_[j].id != static_cast<int>(j) + 1)
            throw structural_error(fmt::format("VM ids must run 1..m in order; position {} has v{}", j + 1, vms_[j].id));
        if (!vms_[j].available())
            throw structural_error(fmt::format("VM v{} is already occupied", vms_[j].id));
    }
}

MappingEpisodeState MappingEnvironment::reset(Rng& rng) const
{
    return reset_at(static_cast<int>(rng.uniform_index(vms_.size())) + 1);
}

MappingEpisodeState MappingEnvironment::reset_at(int anchor_vm) const
{
    if (anchor_vm < 1 || anchor_vm > static_cast<int>(vms_.size()))
        throw contract_error(fmt::format("primary VM v{} outside 1..{}", anchor_vm, vms_.size()));
    MappingEpisodeState s;
    s.next_component = 1;
    s.anchor_vm = anchor_vm;
    s.occupied.assign(vms_.size(), false);
    return s;
}

bool MappingEnvironment::feasible(const MappingEpisodeState& state, int vm_id) const
{
    return !state.is_occupied(vm_id) && capacity_fits(component(state.next_component), vm(vm_id));
}

StepOutcome MappingEnvironment::step(const MappingEpisodeState& state, Action action) const
{
    if (state.terminal) throw contract_error("step() on a terminal state");
    if (action.target_vm < 1 || action.target_vm > static_cast<int>(vms_.size()))
        throw contract_error(fmt::format("target v{} outside 1..{}", action.target_vm, vms_.size()));

    StepOutcome out;
    out.next_state = state;
    if (!feasible(state, action.target_vm)) {
        out.reward = kInfeasiblePenalty;
        out.feasible = false;
        out.terminated = true;
        out.next_state.terminal = true;
        return out;
    }

    out.reward = placement_reward(mode_, component(state.next_component), vm(action.target_vm));
    out.feasible = true;
    out.next_state.occupied[static_cast<std::size_t>(action.target_vm - 1)] = true;
    out.next_state.anchor_vm = action.target_vm;
    if (state.next_component == static_cast<int>(components_.size())) {
        out.terminated = true;
        out.next_state.terminal = true;
    } else {
        out.next_state.next_component = state.next_component + 1;
    }
    return out;
}

MappingEpisodeState reset(const MappingEnvironment& env, std::uint64_t seed)
{
    Rng rng(seed);
    return env.reset(rng);
}

namespace {

void check_gamma(double gamma)
{
    if (!(gamma > 0.0 && gamma < 1.0)) throw validation_error(fmt::format("gamma {} outside (0, 1)", gamma));
}

}  // namespace

double discounted_return(std::span<const double> rewards, double gamma)
{
    check_gamma(gamma);
    double g = 0.0;
    for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
    return g;
}

double constant_reward_return(double reward, double gamma)
{
    check_gamma(gamma);
    return reward / (1.0 - gamma);
}

double delayed_constant_reward_return(double reward, double gamma, int delay)
{
    check_gamma(gamma);
    if (delay < 0) throw validation_error("delay must be non-negative");
    return std::pow(gamma, delay) * reward / (1.0 - gamma);
}

}  // namespace slicemap::mdp
