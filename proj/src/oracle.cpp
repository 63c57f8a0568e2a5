#include "slicemap/oracle.hpp"

#include "slicemap/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <unordered_set>

namespace slicemap::oracle {

std::string_view to_string(ObjectiveMode mode)
{
    return mode == ObjectiveMode::absolute_surplus ? "absolute" : "normalized";
}

ObjectiveMode objective_mode_from_string(std::string_view name)
{
    if (name == "absolute") return ObjectiveMode::absolute_surplus;
    if (name == "normalized") return ObjectiveMode::normalized_surplus;
    throw validation_error(fmt::format("unknown objective '{}' (expected absolute|normalized)", name));
}

std::string_view to_string(AssignmentConstraint c)
{
    switch (c) {
    case AssignmentConstraint::each_component_placed: return "each_component_placed";
    case AssignmentConstraint::one_component_per_vm: return "one_component_per_vm";
    case AssignmentConstraint::capacity_fit: return "capacity_fit";
    }
    return "?";
}

double pair_cost(ObjectiveMode mode, const VnfComponent& c, const VirtualMachine& vm)
{
    if (mode == ObjectiveMode::absolute_surplus)
        return (vm.compute_cap - c.compute_req) + (vm.storage_cap - c.storage_req);
    return (1.0 - c.compute_req / vm.compute_cap) + (1.0 - c.storage_req / vm.storage_cap);
}

namespace {

const VirtualMachine* find_vm(const AssignmentProblem& p, int id)
{
    for (const auto& vm : p.vms)
        if (vm.id == id) return &vm;
    return nullptr;
}

// Indices of available VMs ordered by id.
std::vector<std::size_t> candidate_vms(const AssignmentProblem& p)
{
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < p.vms.size(); ++j)
        if (p.vms[j].available()) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return p.vms[a].id < p.vms[b].id; });
    return idx;
}

// Exact split terms of one pair's cost: their real sum is the cost.
// a / b is carried as the quotient plus its rounding residual.
void cost_terms(ObjectiveMode mode, const VnfComponent& c, const VirtualMachine& vm, std::vector<double>& out)
{
    if (mode == ObjectiveMode::absolute_surplus) {
        out.insert(out.end(), {vm.compute_cap, -c.compute_req, vm.storage_cap, -c.storage_req});
        return;
    }
    for (auto [req, cap] : {std::pair{c.compute_req, vm.compute_cap}, std::pair{c.storage_req, vm.storage_cap}}) {
        const double q = req / cap;
        const double residual = std::fma(-q, cap, req) / cap;
        out.insert(out.end(), {1.0, -q, -residual});
    }
}

// Double-double sum of the sorted terms, rounded once. Assignments whose
// costs agree in exact arithmetic get bit-identical objectives.
double canonical_sum(std::vector<double> terms)
{
    std::sort(terms.begin(), terms.end());
    double hi = 0.0;
    double lo = 0.0;
    for (double x : terms) {
        const double s = hi + x;
        const double v = s - hi;
        const double e = (hi - (s - v)) + (x - v);
        lo += e;
        hi = s + lo;
        lo -= hi - s;
    }
    return hi + lo;
}

std::vector<Pair> sorted_pairs(std::vector<Pair> pairs)
{
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.component < b.component; });
    return pairs;
}

}  // namespace

double objective(const AssignmentProblem& problem, const std::vector<Pair>& pairs)
{
    std::vector<double> terms;
    for (const auto& c : problem.components) {
        auto it = std::find_if(pairs.begin(), pairs.end(), [&](const Pair& p) { return p.component == c.id; });
        if (it == pairs.end()) throw structural_error(fmt::format("component f{} is unassigned", c.id));
        const VirtualMachine* vm = find_vm(problem, it->vm);
        if (!vm) throw structural_error(fmt::format("unknown VM v{}", it->vm));
        cost_terms(problem.mode, c, *vm, terms);
    }
    return canonical_sum(std::move(terms));
}

std::optional<Infeasibility> check_assignment(const AssignmentProblem& problem, const std::vector<Pair>& pairs)
{
    std::unordered_set<int> used;
    for (const auto& c : problem.components) {
        const auto n = std::count_if(pairs.begin(), pairs.end(), [&](const Pair& p) { return p.component == c.id; });
        if (n != 1)
            return Infeasibility{AssignmentConstraint::each_component_placed, c.id,
                                 fmt::format("component f{} is placed {} times", c.id, n)};
    }
    for (const auto& p : pairs) {
        const VirtualMachine* vm = find_vm(problem, p.vm);
        if (!vm)
            return Infeasibility{AssignmentConstraint::each_component_placed, p.component,
                                 fmt::format("component f{} is placed on unknown VM v{}", p.component, p.vm)};
        if (!vm->available() || !used.insert(p.vm).second)
            return Infeasibility{AssignmentConstraint::one_component_per_vm, p.component,
                                 fmt::format("VM v{} would host more than one component", p.vm)};
        auto c = std::find_if(problem.components.begin(), problem.components.end(),
                              [&](const VnfComponent& x) { return x.id == p.component; });
        if (c == problem.components.end())
            return Infeasibility{AssignmentConstraint::each_component_placed, p.component,
                                 fmt::format("unknown component f{}", p.component)};
        if (!capacity_fits(*c, *vm))
            return Infeasibility{AssignmentConstraint::capacity_fit, p.component,
                                 fmt::format("VM v{} is too small for component f{}", p.vm, p.component)};
    }
    return std::nullopt;
}

Infeasibility diagnose(const AssignmentProblem& problem)
{
    const auto candidates = candidate_vms(problem);
    for (const auto& c : problem.components) {
        const bool any = std::any_of(candidates.begin(), candidates.end(),
                                     [&](std::size_t j) { return capacity_fits(c, problem.vms[j]); });
        if (!any)
            return {AssignmentConstraint::capacity_fit, c.id,
                    fmt::format("no available VM has enough compute and storage for component f{} "
                                "(requires {}, {})",
                                c.id, c.compute_req, c.storage_req)};
    }
    return {AssignmentConstraint::one_component_per_vm, 0,
            fmt::format("{} components cannot be placed one per VM on the {} available VMs that fit them",
                        problem.components.size(), candidates.size())};
}

SolveResult solve_exact_enumeration(const AssignmentProblem& problem)
{
    if (problem.components.size() > kEnumerationMaxComponents || problem.vms.size() > kEnumerationMaxVms)
        throw size_error(fmt::format("enumeration is limited to {} components and {} VMs (got {} and {})",
                                     kEnumerationMaxComponents, kEnumerationMaxVms,
                                     problem.components.size(), problem.vms.size()));

    const auto candidates = candidate_vms(problem);
    const std::size_t n = problem.components.size();
    std::vector<std::size_t> chosen(n);
    std::vector<bool> used(problem.vms.size(), false);
    std::optional<std::vector<std::size_t>> best;
    double best_value = std::numeric_limits<double>::infinity();

    auto leaf_value = [&] {
        std::vector<double> terms;
        for (std::size_t i = 0; i < n; ++i) cost_terms(problem.mode, problem.components[i], problem.vms[chosen[i]], terms);
        return canonical_sum(std::move(terms));
    };

    auto search = [&](auto&& self, std::size_t i) -> void {
        if (i == n) {
            const double v = leaf_value();
            if (v < best_value) {
                best_value = v;
                best = chosen;
            }
            return;
        }
        for (std::size_t j : candidates) {
            if (used[j] || !capacity_fits(problem.components[i], problem.vms[j])) continue;
            used[j] = true;
            chosen[i] = j;
            self(self, i + 1);
            used[j] = false;
        }
    };
    search(search, 0);

    SolveResult out;
    if (!best) {
        out.infeasibility = diagnose(problem);
        return out;
    }
    Assignment a;
    for (std::size_t i = 0; i < n; ++i) a.pairs.push_back({problem.components[i].id, problem.vms[(*best)[i]].id});
    a.pairs = sorted_pairs(std::move(a.pairs));
    a.objective = objective(problem, a.pairs);
    out.assignment = std::move(a);
    return out;
}

SolveResult solve_exact_matching(const AssignmentProblem& problem)
{
    SolveResult out;
    const auto candidates = candidate_vms(problem);
    const std::size_t n = problem.components.size();
    const std::size_t m = candidates.size();
    if (n == 0) {
        out.assignment = Assignment{};
        return out;
    }
    if (n > m) {
        out.infeasibility = diagnose(problem);
        if (out.infeasibility.constraint != AssignmentConstraint::capacity_fit)
            out.infeasibility.message = fmt::format("{} components but only {} available VMs", n, m);
        return out;
    }

    // Edges that break the capacity rule get a cost no feasible matching can reach.
    double max_cost = 0.0;
    std::vector<double> cost(n * m);
    std::vector<bool> ok(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto& c = problem.components[i];
            const auto& vm = problem.vms[candidates[j]];
            ok[i * m + j] = capacity_fits(c, vm);
            if (ok[i * m + j]) {
                cost[i * m + j] = pair_cost(problem.mode, c, vm);
                max_cost = std::max(max_cost, cost[i * m + j]);
            }
        }
    }
    const double big = (max_cost + 1.0) * static_cast<double>(n + 1);
    for (std::size_t k = 0; k < n * m; ++k)
        if (!ok[k]) cost[k] = big;

    // Rows are components (1..n), columns VMs (1..m); index 0 is the virtual root.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
    for (std::size_t row = 1; row <= n; ++row) {
        owner[0] = row;
        std::size_t col0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> seen(m + 1, false);
        do {
            seen[col0] = true;
            const std::size_t i0 = owner[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (seen[j]) continue;
                const double reduced = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (reduced < minv[j]) {
                    minv[j] = reduced;
                    way[j] = col0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (seen[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (owner[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    Assignment a;
    for (std::size_t j = 1; j <= m; ++j) {
        if (owner[j] == 0) continue;
        const std::size_t i = owner[j] - 1;
        if (!ok[i * m + (j - 1)]) {
            out.infeasibility = diagnose(problem);
            return out;
        }
        a.pairs.push_back({problem.components[i].id, problem.vms[candidates[j - 1]].id});
    }
    a.pairs = sorted_pairs(std::move(a.pairs));
    a.objective = objective(problem, a.pairs);
    out.assignment = std::move(a);
    return out;
}

}  // namespace slicemap::oracle
