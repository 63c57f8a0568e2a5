#include "slicemap/model.hpp"

#include "slicemap/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace slicemap {

namespace {

constexpr std::array<std::string_view, kSliceSize> kKindNames = {
    "RRC", "PDCP", "SDAP", "RLC_HIGH", "RLC_LOW", "MAC_HIGH", "MAC_LOW", "PHY_HIGH",
};

bool finite_nonnegative(double x) { return std::isfinite(x) && x >= 0.0; }
bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::string_view to_string(VnfcKind kind)
{
    return kKindNames[static_cast<std::size_t>(kind)];
}

VnfcKind vnfc_kind_from_string(std::string_view name)
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<VnfcKind>(i);
    }
    throw validation_error(fmt::format("unknown VNFC kind '{}'", name));
}

VnfcKind kind_for_position(int position)
{
    if (position < 1 || position > static_cast<int>(kSliceSize))
        throw validation_error(fmt::format("component position {} outside 1..8", position));
    return static_cast<VnfcKind>(position - 1);
}

void validate(const VnfComponent& c)
{
    if (!finite_nonnegative(c.compute_req) || !finite_nonnegative(c.storage_req))
        throw validation_error(
            fmt::format("component f{}: requirements must be finite and non-negative", c.id));
}

SliceSubnet::SliceSubnet(std::array<VnfComponent, kSliceSize> components)
    : components_(components)
{
    Resources cu;
    Resources du;
    for (std::size_t i = 0; i < kSliceSize; ++i) {
        const auto& c = components_[i];
        validate(c);
        if (c.id != static_cast<int>(i) + 1)
            throw validation_error(fmt::format("component at position {} has id {}", i + 1, c.id));
        if (c.kind != kind_for_position(c.id))
            throw validation_error(fmt::format("component f{} must be {}", c.id, to_string(kind_for_position(c.id))));
        auto& side = is_cu(c.kind) ? cu : du;
        side.compute += c.compute_req;
        side.storage += c.storage_req;
    }
    if (cu.compute < du.compute || cu.storage < du.storage)
        throw validation_error(fmt::format(
            "O-CU dominance violated: O-CU demand ({}, {}) must be >= O-DU demand ({}, {})",
            cu.compute, cu.storage, du.compute, du.storage));
    total_ = {cu.compute + du.compute, cu.storage + du.storage};
}

SliceSubnet SliceSubnet::from_requirements(std::span<const Resources> reqs)
{
    if (reqs.size() != kSliceSize)
        throw validation_error(fmt::format("a slice has exactly 8 components, got {}", reqs.size()));
    std::array<VnfComponent, kSliceSize> comps;
    for (std::size_t i = 0; i < kSliceSize; ++i) {
        const int id = static_cast<int>(i) + 1;
        comps[i] = {id, kind_for_position(id), reqs[i].compute, reqs[i].storage};
    }
    return SliceSubnet(comps);
}

const VnfComponent& SliceSubnet::component(int id) const
{
    if (id < 1 || id > static_cast<int>(kSliceSize))
        throw structural_error(fmt::format("no component f{}", id));
    return components_[static_cast<std::size_t>(id - 1)];
}

Resources total_slice_demand(const SliceSubnet& slice)
{
    return slice.total_demand();
}

void validate(const VirtualMachine& vm)
{
    if (!finite_positive(vm.compute_cap) || !finite_positive(vm.storage_cap))
        throw validation_error(fmt::format("VM v{}: capacities must be positive", vm.id));
    if (vm.hosted_component && (*vm.hosted_component < 1 || *vm.hosted_component > static_cast<int>(kSliceSize)))
        throw validation_error(fmt::format("VM v{} hosts unknown component {}", vm.id, *vm.hosted_component));
}

void validate(const PhysicalMachine& pm)
{
    if (!finite_positive(pm.compute_cap) || !finite_positive(pm.storage_cap))
        throw validation_error(fmt::format("PM p{}: capacities must be positive", pm.id));
    if (pm.max_vm_count < 1)
        throw validation_error(fmt::format("PM p{}: max_vm_count must be >= 1", pm.id));
}

std::string_view to_string(VmLabel label)
{
    switch (label) {
    case VmLabel::occupied: return "occupied";
    case VmLabel::available_sufficient: return "available_sufficient";
    case VmLabel::available_insufficient: return "available_insufficient";
    }
    return "?";
}

VmClassification classify_vms(std::span<const VirtualMachine> vms,
                              const VnfComponent& component,
                              std::optional<int> primary)
{
    if (vms.empty()) throw structural_error("cannot classify an empty VM list");
    VmClassification out;
    out.labels.reserve(vms.size());
    for (const auto& vm : vms) {
        if (!vm.available())
            out.labels.push_back(VmLabel::occupied);
        else if (capacity_fits(component, vm))
            out.labels.push_back(VmLabel::available_sufficient);
        else
            out.labels.push_back(VmLabel::available_insufficient);
    }
    out.primary = primary.value_or(vms.front().id);
    return out;
}

}  // namespace slicemap
