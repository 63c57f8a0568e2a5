#include "helpers.hpp"

#include "slicemap/error.hpp"
#include "slicemap/mdp.hpp"
#include "slicemap/random.hpp"
#include "slicemap/scenario.hpp"

#include <doctest.h>

#include <set>

using namespace slicemap;
using namespace slicemap::mdp;
using testing::comp;
using testing::vm;

namespace {

MappingEnvironment small_env(RewardMode mode = RewardMode::paper_literal)
{
    return MappingEnvironment({comp(1, 4, 2), comp(2, 1, 1)}, {vm(1, 8, 4), vm(2, 4, 2), vm(3, 1, 1)}, mode);
}

}  // namespace

TEST_CASE("hyperparameter ranges")
{
    CHECK_NOTHROW(validate(Hyperparameters{}));
    CHECK_THROWS_AS(validate(Hyperparameters{.epsilon = 1.5}), validation_error);
    CHECK_THROWS_AS(validate(Hyperparameters{.alpha = -0.1}), validation_error);
    CHECK_THROWS_AS(validate(Hyperparameters{.gamma = 1.0}), validation_error);
    CHECK_THROWS_AS(validate(Hyperparameters{.gamma = 0.0}), validation_error);
    CHECK_THROWS_AS(validate(Hyperparameters{.episodes = 0}), validation_error);
    CHECK(reward_mode_from_string(to_string(RewardMode::efficiency)) == RewardMode::efficiency);
    CHECK(alpha_schedule_from_string(to_string(AlphaSchedule::harmonic_decay)) == AlphaSchedule::harmonic_decay);
}

TEST_CASE("reset")
{
    const auto s = scenario::generate(3);
    const auto env = scenario::make_environment(s, RewardMode::paper_literal);
    SUBCASE("seeded anchor lies in 1..m and repeats for the same seed")
    {
        const auto a = reset(env, 0);
        const auto b = reset(env, 0);
        CHECK(a == b);
        CHECK(a.anchor_vm >= 1);
        CHECK(a.anchor_vm <= 100);
        CHECK(a.next_component == 1);
        CHECK(a.occupied_count() == 0);
        CHECK_FALSE(a.terminal);
    }
    SUBCASE("anchors cover the inventory")
    {
        Rng rng(1);
        std::set<int> seen;
        for (int i = 0; i < 5000; ++i) seen.insert(env.reset(rng).anchor_vm);
        CHECK(seen.size() == 100);
    }
    SUBCASE("a single VM forces anchor 1")
    {
        const MappingEnvironment one({comp(1, 1, 1)}, {vm(1, 2, 2)});
        for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(reset(one, seed).anchor_vm == 1);
    }
    SUBCASE("an empty inventory is a structural error")
    {
        CHECK_THROWS_AS(MappingEnvironment({comp(1, 1, 1)}, {}), structural_error);
    }
}

TEST_CASE("step rewards")
{
    SUBCASE("req (4,2) on cap (8,4) earns 1.0 under the literal formula")
    {
        const auto env = small_env();
        const auto out = env.step(env.reset_at(1), {1});
        CHECK(out.reward == 1.0);
        CHECK(out.feasible);
        CHECK_FALSE(out.terminated);
        CHECK(out.next_state.anchor_vm == 1);
        CHECK(out.next_state.next_component == 2);
        CHECK(out.next_state.is_occupied(1));
    }
    SUBCASE("a perfect fit earns 0")
    {
        const auto env = small_env();
        CHECK(env.step(env.reset_at(1), {2}).reward == 0.0);
    }
    SUBCASE("efficiency mode counts the used fractions")
    {
        const auto env = small_env(RewardMode::efficiency);
        CHECK(env.step(env.reset_at(1), {1}).reward == 1.0);
        CHECK(env.step(env.reset_at(1), {2}).reward == 2.0);
    }
    SUBCASE("an occupied target earns -1 and ends the episode without touching occupancy")
    {
        const auto env = small_env();
        const auto first = env.step(env.reset_at(3), {1});
        const auto second = env.step(first.next_state, {1});
        CHECK(second.reward == -1.0);
        CHECK(second.terminated);
        CHECK(second.next_state.terminal);
        CHECK_FALSE(second.feasible);
        CHECK(second.next_state.occupied == first.next_state.occupied);
    }
    SUBCASE("an undersized target earns -1")
    {
        const auto env = small_env();
        const auto out = env.step(env.reset_at(1), {3});
        CHECK(out.reward == kInfeasiblePenalty);
        CHECK(out.terminated);
    }
    SUBCASE("stepping a terminal state is a contract error")
    {
        const auto env = small_env();
        const auto out = env.step(env.reset_at(1), {3});
        CHECK_THROWS_AS(env.step(out.next_state, {1}), contract_error);
        CHECK_THROWS_AS(env.step(env.reset_at(1), {4}), contract_error);
    }
    SUBCASE("placing the last component terminates")
    {
        const auto env = small_env();
        const auto a = env.step(env.reset_at(2), {1});
        const auto b = env.step(a.next_state, {3});
        CHECK(b.feasible);
        CHECK(b.terminated);
        CHECK(b.next_state.terminal);
    }
}

TEST_CASE("reward-mode duality on random pairs")
{
    Rng rng(77);
    for (int i = 0; i < 10000; ++i) {
        const auto c = comp(1, 0.01 + rng.uniform01() * 5, 0.01 + rng.uniform01() * 5);
        const auto v = vm(1, c.compute_req + rng.uniform01() * 5, c.storage_req + rng.uniform01() * 5);
        const double sum = placement_reward(RewardMode::paper_literal, c, v)
                           + placement_reward(RewardMode::efficiency, c, v);
        CHECK(std::abs(sum - 2.0) <= 1e-12);
    }
}

TEST_CASE("property: episodes under random actions")
{
    const auto s = scenario::generate(5, {.vm_count = 12});
    const auto env = scenario::make_environment(s, RewardMode::paper_literal);
    Rng rng(5);
    for (int episode = 0; episode < 2000; ++episode) {
        auto state = env.reset(rng);
        std::vector<int> chosen;
        double total = 0.0;
        int length = 0;
        bool all_feasible = true;
        while (true) {
            const int a = static_cast<int>(rng.uniform_index(env.vm_count())) + 1;
            const auto out = env.step(state, {a});
            ++length;
            total += out.reward;
            all_feasible = all_feasible && out.feasible;
            if (out.feasible) {
                CHECK(out.reward >= 0.0);
                CHECK(out.reward < 2.0);
                chosen.push_back(a);
            }
            if (out.terminated) {
                CHECK(out.next_state.terminal);
                break;
            }
            CHECK(out.next_state.occupied_count() == static_cast<std::size_t>(out.next_state.next_component - 1));
            std::set<int> distinct(chosen.begin(), chosen.end());
            CHECK(distinct.size() == chosen.size());
            state = out.next_state;
        }
        CHECK(length >= 1);
        CHECK(length <= 8);
        CHECK((length == 8 && all_feasible) == (chosen.size() == 8));
        if (all_feasible) {
            CHECK(total >= 0.0);
            CHECK(total < 16.0);
        }
    }
}

TEST_CASE("property: fixed actions reproduce identical outcomes")
{
    const auto s = scenario::generate(8, {.vm_count = 20});
    const auto env = scenario::make_environment(s, RewardMode::paper_literal);
    const std::vector<int> actions{4, 9, 1, 13, 20, 2, 7, 5};
    auto play = [&] {
        auto state = reset(env, 123);
        std::vector<double> rewards;
        for (int a : actions) {
            const auto out = env.step(state, {a});
            rewards.push_back(out.reward);
            if (out.terminated) break;
            state = out.next_state;
        }
        return std::make_pair(state, rewards);
    };
    CHECK(play() == play());
}

TEST_CASE("returns")
{
    const std::vector<double> two{1.0, 2.0};
    CHECK(discounted_return(two, 0.9) == doctest::Approx(2.8).epsilon(1e-15));
    CHECK(constant_reward_return(1.0, 0.5) == 2.0);
    CHECK(delayed_constant_reward_return(1.0, 0.5, 3) == 0.25);
    CHECK_THROWS_AS(discounted_return(two, 1.0), validation_error);
}

TEST_CASE("property: return recursion G_t = R_{t+1} + gamma G_{t+1}")
{
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        const double gamma = 0.05 + 0.9 * rng.uniform01();
        std::vector<double> r(static_cast<std::size_t>(rng.uniform_int(1, 12)));
        for (auto& x : r) x = rng.uniform01() * 4 - 1;
        const double g0 = discounted_return(r, gamma);
        const double g1 = discounted_return(std::span<const double>(r).subspan(1), gamma);
        CHECK(g0 == doctest::Approx(r[0] + gamma * g1).epsilon(1e-12));
        double forward = 0.0;
        double power = 1.0;
        for (double x : r) {
            forward += power * x;
            power *= gamma;
        }
        CHECK(g0 == doctest::Approx(forward).epsilon(1e-12));
    }
}
