#pragma once

#include "slicemap/model.hpp"
#include "slicemap/random.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace slicemap::mdp {

enum class RewardMode {
    paper_literal,  // unused fractions: (1 - S_req/S_max) + (1 - C_req/C_max)
    efficiency,     // used fractions:    S_req/S_max + C_req/C_max
};

enum class AlphaSchedule {
    fixed,
    harmonic_decay,  // alpha0 / (1 + visits(s, a) / 100)
};

std::string_view to_string(RewardMode mode);
RewardMode reward_mode_from_string(std::string_view name);
std::string_view to_string(AlphaSchedule schedule);
AlphaSchedule alpha_schedule_from_string(std::string_view name);

struct Hyperparameters {
    double alpha = 0.1;
    double gamma = 0.99;
    double epsilon = 0.1;
    int episodes = 500;
    RewardMode reward_mode = RewardMode::paper_literal;
    AlphaSchedule alpha_schedule = AlphaSchedule::fixed;
};

/// Throws validation_error unless 0 <= alpha <= 1, 0 < gamma < 1,
/// 0 <= epsilon <= 1 and episodes >= 1.
void validate(const Hyperparameters& h);

inline constexpr double kInfeasiblePenalty = -1.0;

/// Where the sequential placement stands. The VM status alone aliases the
/// eight placement stages, so the component index is part of the state.
struct MappingEpisodeState {
    int next_component = 1;  // 1-based index of the component being placed
    int anchor_vm = 1;       // primary VM at the start, then the last chosen VM
    std::vector<bool> occupied;  // by VM position (id - 1)
    bool terminal = false;

    std::size_t occupied_count() const;
    bool is_occupied(int vm_id) const { return occupied[static_cast<std::size_t>(vm_id - 1)]; }

    friend bool operator==(const MappingEpisodeState&, const MappingEpisodeState&) = default;
};

struct Action {
    int target_vm = 1;

    friend bool operator==(const Action&, const Action&) = default;
};

struct StepOutcome {
    double reward = 0.0;
    MappingEpisodeState next_state;
    bool terminated = false;
    bool feasible = false;
};

/// Per-step reward of hosting `c` on `vm` (capacity is assumed to fit).
double placement_reward(RewardMode mode, const VnfComponent& c, const VirtualMachine& vm);

/// Places components f1..fK in order onto VMs with ids 1..m. Stateless with
/// respect to episodes: states are values passed in and returned.
class MappingEnvironment {
public:
    MappingEnvironment(std::vector<VnfComponent> components, std::vector<VirtualMachine> vms,
                       RewardMode mode = RewardMode::paper_literal);

    std::size_t component_count() const noexcept { return components_.size(); }
    std::size_t vm_count() const noexcept { return vms_.size(); }
    RewardMode reward_mode() const noexcept { return mode_; }

    const std::vector<VnfComponent>& components() const noexcept { return components_; }
    const std::vector<VirtualMachine>& vms() const noexcept { return vms_; }
    const VnfComponent& component(int index) const { return components_[static_cast<std::size_t>(index - 1)]; }
    const VirtualMachine& vm(int id) const { return vms_[static_cast<std::size_t>(id - 1)]; }

    /// Fresh episode with a uniformly drawn primary VM.
    MappingEpisodeState reset(Rng& rng) const;

    /// Fresh episode starting from a given primary VM.
    MappingEpisodeState reset_at(int anchor_vm) const;

    /// Applies one placement. Infeasible targets (occupied or too small)
    /// earn the penalty and end the episode without changing occupancy.
    /// Throws contract_error on terminal states or out-of-range targets.
    StepOutcome step(const MappingEpisodeState& state, Action action) const;

    bool feasible(const MappingEpisodeState& state, int vm_id) const;

private:
    std::vector<VnfComponent> components_;
    std::vector<VirtualMachine> vms_;
    RewardMode mode_;
};

/// reset() with a generator seeded from `seed`.
MappingEpisodeState reset(const MappingEnvironment& env, std::uint64_t seed);

/// Finite discounted return sum_k gamma^k r_{k+1}, accumulated backwards via
/// G_t = R_{t+1} + gamma G_{t+1}.
double discounted_return(std::span<const double> rewards, double gamma);

/// Infinite-horizon return of a constant reward: R / (1 - gamma).
double constant_reward_return(double reward, double gamma);

/// Constant reward that only starts after `delay` steps: gamma^delay R / (1 - gamma).
double delayed_constant_reward_return(double reward, double gamma, int delay);

}  // namespace slicemap::mdp
