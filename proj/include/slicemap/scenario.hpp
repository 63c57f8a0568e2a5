#pragma once

#include "slicemap/infra.hpp"
#include "slicemap/mdp.hpp"
#include "slicemap/model.hpp"
#include "slicemap/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace slicemap::scenario {

/// Integer ranges for the random instance generator (inclusive bounds).
struct GenerationParams {
    int vm_count = 100;
    int req_min = 1;
    int req_max = 5;
    int cap_min = 1;
    int cap_max = 10;

    friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

/// Throws validation_error unless the ranges are positive and ordered and vm_count >= 8.
void validate(const GenerationParams& p);

inline constexpr int kMaxGenerationAttempts = 1000;
inline constexpr int kMaxDominanceDraws = 1'000'000;
inline constexpr int kFormatVersion = 1;

struct Scenario {
    std::uint64_t seed = 0;
    GenerationParams params;
    SliceSubnet slice;
    std::vector<VirtualMachine> vms;  // ids 1..m in order, all available
    std::vector<PhysicalMachine> pms;
    std::optional<infra::VmPlacement> placement;  // present iff pms is non-empty

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Checks VM ids, capacities and, when PMs are present, the placement.
/// Throws validation_error or structural_error.
void validate(const Scenario& s);

/// Draws a feasible instance. Requirements are redrawn until O-CU dominance
/// holds, capacities until the matching oracle finds an assignment. Throws
/// generation_error when no feasible capacity draw appears within
/// kMaxGenerationAttempts.
Scenario generate(std::uint64_t seed, const GenerationParams& params = {});

nlohmann::ordered_json to_json(const Scenario& s);

/// Throws parse_error naming the offending field path, validation_error on
/// domain invariants.
Scenario from_json(const nlohmann::json& j);

void save(const Scenario& s, const std::filesystem::path& path);
Scenario load(const std::filesystem::path& path);

/// Serialized text of a scenario (what save() writes).
std::string dump(const Scenario& s);

std::vector<VnfComponent> components_of(const Scenario& s);
mdp::MappingEnvironment make_environment(const Scenario& s, mdp::RewardMode mode);
oracle::AssignmentProblem make_problem(const Scenario& s, oracle::ObjectiveMode mode);

// Schema fragments shared with the decision service.
VnfComponent component_from_json(const nlohmann::json& j, const std::string& path);
VirtualMachine vm_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::ordered_json to_json(const VnfComponent& c);
nlohmann::ordered_json to_json(const VirtualMachine& vm);

}  // namespace slicemap::scenario
