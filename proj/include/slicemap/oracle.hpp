#pragma once

#include "slicemap/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slicemap::oracle {

enum class ObjectiveMode {
    absolute_surplus,    // sum of raw capacity surpluses
    normalized_surplus,  // sum of unused capacity fractions
};

std::string_view to_string(ObjectiveMode mode);
ObjectiveMode objective_mode_from_string(std::string_view name);

struct AssignmentProblem {
    std::vector<VnfComponent> components;
    std::vector<VirtualMachine> vms;
    ObjectiveMode mode = ObjectiveMode::absolute_surplus;
};

struct Pair {
    int component = 0;
    int vm = 0;

    friend bool operator==(const Pair&, const Pair&) = default;
};

struct Assignment {
    std::vector<Pair> pairs;  // sorted by component id
    double objective = 0.0;
};

/// The three assignment constraints, by role.
enum class AssignmentConstraint {
    each_component_placed,
    one_component_per_vm,
    capacity_fit,
};

std::string_view to_string(AssignmentConstraint c);

struct Infeasibility {
    AssignmentConstraint constraint = AssignmentConstraint::capacity_fit;
    int component = 0;  // offending component id, 0 when not attributable to one
    std::string message;
};

struct SolveResult {
    std::optional<Assignment> assignment;
    Infeasibility infeasibility;  // meaningful only when !feasible()

    bool feasible() const noexcept { return assignment.has_value(); }
};

/// Cost of hosting `c` on `vm` under `mode`. Capacity fit is the caller's concern.
double pair_cost(ObjectiveMode mode, const VnfComponent& c, const VirtualMachine& vm);

/// Objective of a complete pair list, summed in component order.
double objective(const AssignmentProblem& problem, const std::vector<Pair>& pairs);

/// Empty when `pairs` is a total, injective, capacity-respecting assignment of
/// the problem's components onto its available VMs.
std::optional<Infeasibility> check_assignment(const AssignmentProblem& problem,
                                              const std::vector<Pair>& pairs);

/// Explains why no assignment exists. Only meaningful for infeasible problems.
Infeasibility diagnose(const AssignmentProblem& problem);

inline constexpr std::size_t kEnumerationMaxComponents = 8;
inline constexpr std::size_t kEnumerationMaxVms = 10;

/// Exhaustive search over injective maps. Ties go to the lexicographically
/// smallest VM-id sequence in component order. Throws size_error above
/// 8 components or 10 VMs.
SolveResult solve_exact_enumeration(const AssignmentProblem& problem);

/// Minimum-cost bipartite matching (Hungarian method with potentials),
/// O(n^2 m). Same optimum as enumeration; tie choice may differ.
SolveResult solve_exact_matching(const AssignmentProblem& problem);

}  // namespace slicemap::oracle
