#include "slicemap/scenario.hpp"

#include "slicemap/error.hpp"
#include "slicemap/random.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace slicemap::scenario {

using nlohmann::json;
using nlohmann::ordered_json;

void validate(const GenerationParams& p)
{
    if (p.vm_count < static_cast<int>(kSliceSize))
        throw validation_error(fmt::format("need at least {} VMs, got {}", kSliceSize, p.vm_count));
    if (p.req_min < 1 || p.req_max < p.req_min)
        throw validation_error(fmt::format("requirement range [{}, {}] must be positive and ordered", p.req_min, p.req_max));
    if (p.cap_min < 1 || p.cap_max < p.cap_min)
        throw validation_error(fmt::format("capacity range [{}, {}] must be positive and ordered", p.cap_min, p.cap_max));
}

void validate(const Scenario& s)
{
    if (s.vms.empty()) throw structural_error("scenario has no VMs");
    for (std::size_t j = 0; j < s.vms.size(); ++j) {
        const auto& vm = s.vms[j];
        if (vm.id != static_cast<int>(j) + 1)
            throw validation_error(fmt::format("VM at position {} has id {}, expected ids 1..m in order", j + 1, vm.id));
        if (!vm.available()) throw validation_error(fmt::format("scenario VM v{} must start available", vm.id));
        slicemap::validate(vm);
    }
    if (s.pms.empty()) {
        if (s.placement) throw structural_error("placement given without PMs");
        return;
    }
    if (!s.placement) throw structural_error("PMs given without a placement");
    for (const auto& pm : s.pms) slicemap::validate(pm);
    const auto violations = infra::check_vm_placement(*s.placement, s.vms, s.pms);
    if (!violations.empty())
        throw validation_error(fmt::format("VM placement violates {}: {}", to_string(violations.front().constraint),
                                           violations.front().message));
}

namespace {

std::array<Resources, kSliceSize> draw_requirements(Rng& rng, const GenerationParams& p)
{
    for (int draw = 0; draw < kMaxDominanceDraws; ++draw) {
        std::array<Resources, kSliceSize> reqs;
        for (auto& r : reqs) {
            r.compute = static_cast<double>(rng.uniform_int(p.req_min, p.req_max));
            r.storage = static_cast<double>(rng.uniform_int(p.req_min, p.req_max));
        }
        Resources cu;
        Resources du;
        for (std::size_t i = 0; i < kSliceSize; ++i) {
            auto& side = i < kCuSize ? cu : du;
            side.compute += reqs[i].compute;
            side.storage += reqs[i].storage;
        }
        if (cu.compute >= du.compute && cu.storage >= du.storage) return reqs;
    }
    throw generation_error(fmt::format("no requirement draw met O-CU dominance within {} draws", kMaxDominanceDraws));
}

}  // namespace

Scenario generate(std::uint64_t seed, const GenerationParams& params)
{
    validate(params);
    Rng rng(seed);
    const auto reqs = draw_requirements(rng, params);
    auto slice = SliceSubnet::from_requirements(reqs);

    std::vector<VirtualMachine> vms(static_cast<std::size_t>(params.vm_count));
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        for (std::size_t j = 0; j < vms.size(); ++j) {
            vms[j].id = static_cast<int>(j) + 1;
            vms[j].compute_cap = static_cast<double>(rng.uniform_int(params.cap_min, params.cap_max));
            vms[j].storage_cap = static_cast<double>(rng.uniform_int(params.cap_min, params.cap_max));
        }
        oracle::AssignmentProblem problem{{slice.components().begin(), slice.components().end()}, vms,
                                          oracle::ObjectiveMode::absolute_surplus};
        if (oracle::solve_exact_matching(problem).feasible())
            return Scenario{seed, params, slice, std::move(vms), {}, std::nullopt};
    }
    throw generation_error(fmt::format("seed {}: no feasible VM inventory within {} attempts", seed,
                                       kMaxGenerationAttempts));
}

// Serialization

namespace {

const json& require(const json& j, const char* key, const std::string& path)
{
    const std::string field = path.empty() ? key : path + "." + key;
    if (!j.is_object()) throw parse_error(path.empty() ? "(root)" : path, fmt::format("'{}' must be an object", path));
    const auto it = j.find(key);
    if (it == j.end()) throw parse_error(field, fmt::format("missing field '{}'", field));
    return *it;
}

double number(const json& j, const char* key, const std::string& path)
{
    const auto& v = require(j, key, path);
    if (!v.is_number()) throw parse_error(path + "." + key, fmt::format("'{}.{}' must be a number", path, key));
    return v.get<double>();
}

int integer(const json& j, const char* key, const std::string& path)
{
    const auto& v = require(j, key, path);
    const std::string field = path.empty() ? key : path + "." + key;
    if (!v.is_number_integer()) throw parse_error(field, fmt::format("'{}' must be an integer", field));
    return v.get<int>();
}

const json& array(const json& j, const char* key, const std::string& path)
{
    const auto& v = require(j, key, path);
    const std::string field = path.empty() ? key : path + "." + key;
    if (!v.is_array()) throw parse_error(field, fmt::format("'{}' must be an array", field));
    return v;
}

std::string element(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

ordered_json range(int lo, int hi) { return ordered_json::array({lo, hi}); }

std::pair<int, int> range_from(const json& j, const char* key, const std::string& path)
{
    const auto& v = array(j, key, path);
    const std::string field = path + "." + key;
    if (v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw parse_error(field, fmt::format("'{}' must be [lo, hi] integers", field));
    return {v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

ordered_json to_json(const VnfComponent& c)
{
    ordered_json j;
    j["id"] = c.id;
    j["kind"] = std::string(to_string(c.kind));
    j["compute"] = c.compute_req;
    j["storage"] = c.storage_req;
    return j;
}

ordered_json to_json(const VirtualMachine& vm)
{
    ordered_json j;
    j["id"] = vm.id;
    j["compute"] = vm.compute_cap;
    j["storage"] = vm.storage_cap;
    if (vm.hosted_component) j["hosted_component"] = *vm.hosted_component;
    return j;
}

VnfComponent component_from_json(const json& j, const std::string& path)
{
    VnfComponent c;
    c.id = integer(j, "id", path);
    if (c.id < 1 || c.id > static_cast<int>(kSliceSize))
        throw parse_error(path + ".id", fmt::format("'{}.id' must be in 1..{}", path, kSliceSize));
    if (j.contains("kind")) {
        const auto& kind = j.at("kind");
        if (!kind.is_string()) throw parse_error(path + ".kind", fmt::format("'{}.kind' must be a string", path));
        try {
            c.kind = vnfc_kind_from_string(kind.get<std::string>());
        } catch (const validation_error& e) {
            throw parse_error(path + ".kind", e.what());
        }
    } else {
        c.kind = kind_for_position(c.id);
    }
    c.compute_req = number(j, "compute", path);
    c.storage_req = number(j, "storage", path);
    validate(c);
    return c;
}

VirtualMachine vm_from_json(const json& j, const std::string& path)
{
    VirtualMachine vm;
    vm.id = integer(j, "id", path);
    vm.compute_cap = number(j, "compute", path);
    vm.storage_cap = number(j, "storage", path);
    if (j.contains("hosted_component") && !j.at("hosted_component").is_null())
        vm.hosted_component = integer(j, "hosted_component", path);
    validate(vm);
    return vm;
}

ordered_json to_json(const Scenario& s)
{
    ordered_json j;
    j["version"] = kFormatVersion;
    j["seed"] = s.seed;
    j["params"] = {
        {"vm_count", s.params.vm_count},
        {"req_range", range(s.params.req_min, s.params.req_max)},
        {"cap_range", range(s.params.cap_min, s.params.cap_max)},
    };
    ordered_json components = ordered_json::array();
    for (const auto& c : s.slice.components()) components.push_back(to_json(c));
    j["slice"] = {{"components", components}};
    ordered_json vms = ordered_json::array();
    for (const auto& vm : s.vms) vms.push_back(to_json(vm));
    j["vms"] = vms;
    if (!s.pms.empty()) {
        ordered_json pms = ordered_json::array();
        for (const auto& pm : s.pms)
            pms.push_back({{"id", pm.id},
                           {"compute", pm.compute_cap},
                           {"storage", pm.storage_cap},
                           {"max_vms", pm.max_vm_count},
                           {"active", pm.active}});
        j["pms"] = pms;
        ordered_json placement = ordered_json::array();
        for (std::size_t v = 0; v < s.placement->vm_count(); ++v)
            for (std::size_t k = 0; k < s.placement->pm_count(); ++k)
                if (s.placement->placed(v, k)) placement.push_back({s.vms[v].id, s.pms[k].id});
        j["placement"] = placement;
    }
    return j;
}

Scenario from_json(const json& j)
{
    if (!j.is_object()) throw parse_error("(root)", "scenario document must be an object");
    if (!j.contains("version")) throw parse_error("version", "missing field 'version'");
    const int version = integer(j, "version", "");
    if (version != kFormatVersion)
        throw parse_error("version", fmt::format("unsupported scenario version {} (expected {})", version, kFormatVersion));

    std::uint64_t seed = 0;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            throw parse_error("seed", "'seed' must be a non-negative integer");
        seed = j.at("seed").get<std::uint64_t>();
    }

    GenerationParams params;
    if (j.contains("params")) {
        const auto& p = j.at("params");
        params.vm_count = integer(p, "vm_count", "params");
        std::tie(params.req_min, params.req_max) = range_from(p, "req_range", "params");
        std::tie(params.cap_min, params.cap_max) = range_from(p, "cap_range", "params");
    }

    const auto& slice_j = require(j, "slice", "");
    const auto& comps = array(slice_j, "components", "slice");
    if (comps.size() != kSliceSize)
        throw parse_error("slice.components",
                          fmt::format("'slice.components' must list {} components, got {}", kSliceSize, comps.size()));
    std::array<VnfComponent, kSliceSize> components;
    for (std::size_t i = 0; i < kSliceSize; ++i)
        components[i] = component_from_json(comps[i], element("slice.components", i));
    SliceSubnet slice(components);

    const auto& vms_j = array(j, "vms", "");
    std::vector<VirtualMachine> vms;
    for (std::size_t i = 0; i < vms_j.size(); ++i) vms.push_back(vm_from_json(vms_j[i], element("vms", i)));
    if (!j.contains("pms") && !j.contains("params")) params.vm_count = static_cast<int>(vms.size());

    Scenario s{seed, params, slice, std::move(vms), {}, std::nullopt};

    if (j.contains("pms")) {
        const auto& pms_j = array(j, "pms", "");
        for (std::size_t i = 0; i < pms_j.size(); ++i) {
            const auto path = element("pms", i);
            PhysicalMachine pm;
            pm.id = integer(pms_j[i], "id", path);
            pm.compute_cap = number(pms_j[i], "compute", path);
            pm.storage_cap = number(pms_j[i], "storage", path);
            pm.max_vm_count = integer(pms_j[i], "max_vms", path);
            if (pms_j[i].contains("active")) {
                if (!pms_j[i].at("active").is_boolean())
                    throw parse_error(path + ".active", fmt::format("'{}.active' must be a boolean", path));
                pm.active = pms_j[i].at("active").get<bool>();
            }
            if (pm.id != static_cast<int>(i) + 1)
                throw parse_error(path + ".id", fmt::format("'{}.id' must be {}", path, i + 1));
            s.pms.push_back(pm);
        }
        infra::VmPlacement placement(s.vms.size(), s.pms.size());
        for (std::size_t k = 0; k < s.pms.size(); ++k) placement.set_pm_active(k, s.pms[k].active);
        const auto& pairs = array(j, "placement", "");
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto path = element("placement", i);
            const auto& p = pairs[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
                throw parse_error(path, fmt::format("'{}' must be [vm_id, pm_id]", path));
            const int vm = p[0].get<int>();
            const int pm = p[1].get<int>();
            if (vm < 1 || vm > static_cast<int>(s.vms.size()) || pm < 1 || pm > static_cast<int>(s.pms.size()))
                throw parse_error(path, fmt::format("'{}' references an unknown VM or PM", path));
            placement.set(static_cast<std::size_t>(vm - 1), static_cast<std::size_t>(pm - 1));
        }
        s.placement = placement;
    }

    validate(s);
    return s;
}

std::string dump(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

void save(const Scenario& s, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(fmt::format("cannot write {}", path.string()));
    out << dump(s);
}

Scenario load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(fmt::format("cannot read {}", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw parse_error("(root)", fmt::format("{}: {}", path.string(), e.what()));
    }
    return from_json(j);
}

std::vector<VnfComponent> components_of(const Scenario& s)
{
    return {s.slice.components().begin(), s.slice.components().end()};
}

mdp::MappingEnvironment make_environment(const Scenario& s, mdp::RewardMode mode)
{
    return mdp::MappingEnvironment(components_of(s), s.vms, mode);
}

oracle::AssignmentProblem make_problem(const Scenario& s, oracle::ObjectiveMode mode)
{
    return {components_of(s), s.vms, mode};
}

}  // namespace slicemap::scenario
