#include "helpers.hpp"

#include "slicemap/error.hpp"
#include "slicemap/oracle.hpp"
#include "slicemap/random.hpp"
#include "slicemap/scenario.hpp"

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <optional>

using namespace slicemap;
using namespace slicemap::oracle;
using testing::comp;
using testing::vm;

namespace {

// Reference solver: plain recursion over every injective component -> VM map,
// costs written out from the objective definitions.
struct ScanResult {
    std::optional<double> best;
    long maps_seen = 0;
};

double scan_cost(ObjectiveMode mode, const VnfComponent& c, const VirtualMachine& v)
{
    if (mode == ObjectiveMode::absolute_surplus)
        return (v.compute_cap - c.compute_req) + (v.storage_cap - c.storage_req);
    return (1.0 - c.compute_req / v.compute_cap) + (1.0 - c.storage_req / v.storage_cap);
}

void scan(const AssignmentProblem& p, std::size_t i, std::vector<int>& used, std::vector<double>& costs,
          ScanResult& out)
{
    if (i == p.components.size()) {
        ++out.maps_seen;
        double total = 0.0;
        for (double c : costs) total += c;
        if (!out.best || total < *out.best) out.best = total;
        return;
    }
    for (std::size_t j = 0; j < p.vms.size(); ++j) {
        if (std::find(used.begin(), used.end(), static_cast<int>(j)) != used.end()) continue;
        const auto& v = p.vms[j];
        const auto& c = p.components[i];
        if (v.hosted_component || v.compute_cap < c.compute_req || v.storage_cap < c.storage_req) continue;
        used.push_back(static_cast<int>(j));
        costs.push_back(scan_cost(p.mode, c, v));
        scan(p, i + 1, used, costs, out);
        costs.pop_back();
        used.pop_back();
    }
}

ScanResult exhaustive(const AssignmentProblem& p)
{
    ScanResult r;
    std::vector<int> used;
    std::vector<double> costs;
    scan(p, 0, used, costs, r);
    return r;
}

AssignmentProblem random_problem(Rng& rng, std::size_t k, std::size_t m, ObjectiveMode mode)
{
    AssignmentProblem p;
    p.mode = mode;
    for (std::size_t i = 1; i <= k; ++i)
        p.components.push_back(comp(static_cast<int>(i), static_cast<double>(rng.uniform_int(1, 5)),
                                    static_cast<double>(rng.uniform_int(1, 5))));
    for (std::size_t j = 1; j <= m; ++j) {
        auto v = vm(static_cast<int>(j), static_cast<double>(rng.uniform_int(1, 10)),
                    static_cast<double>(rng.uniform_int(1, 10)));
        if (rng.uniform01() < 0.1) v.hosted_component = 8;
        p.vms.push_back(v);
    }
    return p;
}

}  // namespace

TEST_CASE("enumeration: perfect-fit pair")
{
    const AssignmentProblem p{{comp(1, 1, 1), comp(2, 2, 2)}, {vm(1, 1, 1), vm(2, 2, 2), vm(3, 3, 3)}, {}};
    for (auto solve : {solve_exact_enumeration, solve_exact_matching}) {
        const auto r = solve(p);
        REQUIRE(r.feasible());
        CHECK(r.assignment->objective == 0.0);
        CHECK(r.assignment->pairs == std::vector<Pair>{{1, 1}, {2, 2}});
    }
}

TEST_CASE("enumeration: oversized component is infeasible through capacity fit")
{
    const AssignmentProblem p{{comp(1, 5, 5)}, {vm(1, 4, 4), vm(2, 4, 4)}, {}};
    for (auto solve : {solve_exact_enumeration, solve_exact_matching}) {
        const auto r = solve(p);
        CHECK_FALSE(r.feasible());
        CHECK(r.infeasibility.constraint == AssignmentConstraint::capacity_fit);
        CHECK(r.infeasibility.component == 1);
    }
}

TEST_CASE("infeasible through VM scarcity")
{
    const AssignmentProblem p{{comp(1, 2, 2), comp(2, 2, 2)}, {vm(1, 3, 3), vm(2, 1, 1)}, {}};
    const auto r = solve_exact_matching(p);
    CHECK_FALSE(r.feasible());
    CHECK(r.infeasibility.constraint == AssignmentConstraint::one_component_per_vm);
}

TEST_CASE("enumeration size guard")
{
    AssignmentProblem p;
    for (int i = 1; i <= 2; ++i) p.components.push_back(comp(i, 1, 1));
    for (int j = 1; j <= 11; ++j) p.vms.push_back(vm(j, 2, 2));
    CHECK_THROWS_AS(solve_exact_enumeration(p), size_error);
    CHECK(solve_exact_matching(p).feasible());
}

TEST_CASE("randomized 3x5 instances equal the exhaustive scan")
{
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto mode : {ObjectiveMode::absolute_surplus, ObjectiveMode::normalized_surplus}) {
            const auto p = random_problem(rng, 3, 5, mode);
            const auto ref = exhaustive(p);
            CHECK(ref.maps_seen <= 5 * 4 * 3);
            const auto e = solve_exact_enumeration(p);
            const auto m = solve_exact_matching(p);
            REQUIRE(e.feasible() == ref.best.has_value());
            REQUIRE(m.feasible() == ref.best.has_value());
            if (!ref.best) continue;
            CHECK(e.assignment->objective == doctest::Approx(*ref.best).epsilon(1e-12));
            CHECK(m.assignment->objective == doctest::Approx(*ref.best).epsilon(1e-12));
        }
    }
}

TEST_CASE("enumeration tie-break prefers the lowest VM ids in component order")
{
    const AssignmentProblem p{{comp(1, 1, 1), comp(2, 1, 1)}, {vm(1, 2, 2), vm(2, 2, 2), vm(3, 2, 2)}, {}};
    const auto r = solve_exact_enumeration(p);
    REQUIRE(r.feasible());
    CHECK(r.assignment->pairs == std::vector<Pair>{{1, 1}, {2, 2}});
}

TEST_CASE("property: returned assignments satisfy all three constraints")
{
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto k = static_cast<std::size_t>(rng.uniform_int(1, 6));
        const auto m = static_cast<std::size_t>(rng.uniform_int(1, 8));
        const auto p = random_problem(rng, k, m, ObjectiveMode::absolute_surplus);
        for (auto solve : {solve_exact_enumeration, solve_exact_matching}) {
            const auto r = solve(p);
            if (!r.feasible()) continue;
            CHECK_FALSE(check_assignment(p, r.assignment->pairs).has_value());
            CHECK(r.assignment->pairs.size() == k);
            std::vector<int> vms;
            for (const auto& pr : r.assignment->pairs) vms.push_back(pr.vm);
            std::sort(vms.begin(), vms.end());
            CHECK(std::adjacent_find(vms.begin(), vms.end()) == vms.end());
        }
    }
}

TEST_CASE("property: adding a VM never raises the optimum")
{
    Rng rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        auto p = random_problem(rng, 4, 6, trial % 2 ? ObjectiveMode::normalized_surplus
                                                     : ObjectiveMode::absolute_surplus);
        const auto before = solve_exact_matching(p);
        p.vms.push_back(vm(static_cast<int>(p.vms.size()) + 1, static_cast<double>(rng.uniform_int(1, 10)),
                           static_cast<double>(rng.uniform_int(1, 10))));
        const auto after = solve_exact_matching(p);
        if (before.feasible()) {
            REQUIRE(after.feasible());
            CHECK(after.assignment->objective <= before.assignment->objective + 1e-12);
        }
    }
}

TEST_CASE("check_assignment names the broken constraint")
{
    const AssignmentProblem p{{comp(1, 2, 2), comp(2, 2, 2)}, {vm(1, 3, 3), vm(2, 3, 3), vm(3, 1, 1)}, {}};
    CHECK_FALSE(check_assignment(p, {{1, 1}, {2, 2}}).has_value());
    CHECK(check_assignment(p, {{1, 1}})->constraint == AssignmentConstraint::each_component_placed);
    CHECK(check_assignment(p, {{1, 1}, {2, 1}})->constraint == AssignmentConstraint::one_component_per_vm);
    CHECK(check_assignment(p, {{1, 1}, {2, 3}})->constraint == AssignmentConstraint::capacity_fit);
}

TEST_CASE("identity instance: exact fits among oversized VMs")
{
    const auto s = scenario::load(testing::fixture("identity.json"));
    const auto r = solve_exact_matching(scenario::make_problem(s, ObjectiveMode::absolute_surplus));
    REQUIRE(r.feasible());
    CHECK(r.assignment->objective == 0.0);
    for (const auto& p : r.assignment->pairs) CHECK(p.vm == p.component);
}

TEST_CASE("canonical fixture optimum")
{
    // Recorded when the fixture was generated (seed 42, 100 VMs).
    const auto s = scenario::load(testing::fixture("canonical_seed42.json"));
    CHECK(s == scenario::generate(42));
    const auto abs = solve_exact_matching(scenario::make_problem(s, ObjectiveMode::absolute_surplus));
    REQUIRE(abs.feasible());
    CHECK(abs.assignment->objective == 4.0);
    CHECK(abs.assignment->pairs
          == std::vector<Pair>{{1, 61}, {2, 28}, {3, 22}, {4, 58}, {5, 16}, {6, 3}, {7, 93}, {8, 81}});
    const auto norm = solve_exact_matching(scenario::make_problem(s, ObjectiveMode::normalized_surplus));
    REQUIRE(norm.feasible());
    CHECK(norm.assignment->objective == doctest::Approx(1.2666666666666666).epsilon(1e-12));
}

TEST_CASE("canonical fixture: truncated sub-instances agree with enumeration")
{
    const auto s = scenario::load(testing::fixture("canonical_seed42.json"));
    const auto comps = scenario::components_of(s);
    // Windows of 10 VMs (ids renumbered) and the first 3..5 components.
    for (std::size_t start = 0; start + 10 <= s.vms.size(); start += 10) {
        for (std::size_t k = 3; k <= 5; ++k) {
            AssignmentProblem p;
            p.components.assign(comps.begin(), comps.begin() + static_cast<long>(k));
            for (std::size_t j = 0; j < 10; ++j) {
                auto v = s.vms[start + j];
                v.id = static_cast<int>(j) + 1;
                p.vms.push_back(v);
            }
            const auto e = solve_exact_enumeration(p);
            const auto m = solve_exact_matching(p);
            REQUIRE(e.feasible() == m.feasible());
            if (e.feasible()) CHECK(e.assignment->objective == m.assignment->objective);
        }
    }
}

TEST_CASE("assignments tied in exact arithmetic report identical objectives")
{
    // The two solvers pick different optimal assignments here.
    const AssignmentProblem p{{comp(1, 5, 2), comp(2, 5, 5), comp(3, 5, 1), comp(4, 3, 4), comp(5, 2, 2)},
                              {vm(1, 7, 8), vm(2, 4, 6), vm(3, 2, 1), vm(4, 3, 8), vm(5, 8, 10), vm(6, 9, 2),
                               vm(7, 5, 5)},
                              ObjectiveMode::normalized_surplus};
    const std::vector<Pair> a{{1, 6}, {2, 7}, {3, 1}, {4, 4}, {5, 2}};
    const std::vector<Pair> b{{1, 6}, {2, 7}, {3, 1}, {4, 2}, {5, 4}};
    CHECK(objective(p, a) == objective(p, b));
    CHECK(solve_exact_matching(p).assignment->objective == solve_exact_enumeration(p).assignment->objective);
}
