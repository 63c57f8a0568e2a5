#include "slicemap/infra.hpp"

#include "slicemap/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace slicemap::infra {

VmPlacement::VmPlacement(std::size_t vm_count, std::size_t pm_count)
    : vms_(vm_count), pms_(pm_count), x_(vm_count * pm_count, 0), active_(pm_count, 1)
{
}

bool VmPlacement::placed(std::size_t vm, std::size_t pm) const
{
    if (vm >= vms_ || pm >= pms_) throw structural_error("placement index out of range");
    return x_[vm * pms_ + pm] != 0;
}

void VmPlacement::set(std::size_t vm, std::size_t pm, bool on)
{
    if (vm >= vms_ || pm >= pms_) throw structural_error("placement index out of range");
    x_[vm * pms_ + pm] = on ? 1 : 0;
}

bool VmPlacement::pm_active(std::size_t pm) const
{
    if (pm >= pms_) throw structural_error("PM index out of range");
    return active_[pm] != 0;
}

void VmPlacement::set_pm_active(std::size_t pm, bool on)
{
    if (pm >= pms_) throw structural_error("PM index out of range");
    active_[pm] = on ? 1 : 0;
}

std::string_view to_string(PlacementConstraint c)
{
    switch (c) {
    case PlacementConstraint::single_host: return "single_host";
    case PlacementConstraint::vm_count: return "vm_count";
    case PlacementConstraint::compute_capacity: return "compute_capacity";
    case PlacementConstraint::storage_capacity: return "storage_capacity";
    }
    return "?";
}

std::vector<PlacementViolation> check_vm_placement(const VmPlacement& placement,
                                                   std::span<const VirtualMachine> vms,
                                                   std::span<const PhysicalMachine> pms,
                                                   bool require_total)
{
    if (placement.vm_count() != vms.size() || placement.pm_count() != pms.size())
        throw structural_error(fmt::format("placement is {}x{} but inventory has {} VMs and {} PMs",
                                           placement.vm_count(), placement.pm_count(), vms.size(), pms.size()));

    std::vector<PlacementViolation> out;
    for (std::size_t j = 0; j < vms.size(); ++j) {
        int hosts = 0;
        for (std::size_t k = 0; k < pms.size(); ++k) hosts += placement.placed(j, k) ? 1 : 0;
        if (hosts > 1 || (require_total && hosts == 0)) {
            out.push_back({PlacementConstraint::single_host, vms[j].id,
                           fmt::format("VM v{} is placed on {} PMs, expected exactly 1", vms[j].id, hosts)});
        }
    }

    for (std::size_t k = 0; k < pms.size(); ++k) {
        const auto& pm = pms[k];
        int count = 0;
        double compute = 0.0;
        double storage = 0.0;
        for (std::size_t j = 0; j < vms.size(); ++j) {
            if (!placement.placed(j, k)) continue;
            ++count;
            compute += vms[j].compute_cap;
            storage += vms[j].storage_cap;
        }
        const double active = placement.pm_active(k) ? 1.0 : 0.0;
        if (count > pm.max_vm_count)
            out.push_back({PlacementConstraint::vm_count, pm.id,
                           fmt::format("PM p{} hosts {} VMs, limit {}", pm.id, count, pm.max_vm_count)});
        if (compute > pm.compute_cap * active)
            out.push_back({PlacementConstraint::compute_capacity, pm.id,
                           fmt::format("PM p{} compute demand {} exceeds {}", pm.id, compute, pm.compute_cap * active)});
        if (storage > pm.storage_cap * active)
            out.push_back({PlacementConstraint::storage_capacity, pm.id,
                           fmt::format("PM p{} storage demand {} exceeds {}", pm.id, storage, pm.storage_cap * active)});
    }
    return out;
}

void validate(const WastageWeights& w)
{
    if (!(w.compute >= 0.0) || !(w.storage >= 0.0) || std::abs(w.compute + w.storage - 1.0) > 1e-12)
        throw validation_error(fmt::format("wastage weights ({}, {}) must be non-negative and sum to 1",
                                           w.compute, w.storage));
}

namespace {

void check_load(double load, std::string_view what)
{
    if (!std::isfinite(load) || load < 0.0)
        throw validation_error(fmt::format("{} load {} must be a fraction >= 0", what, load));
    if (load >= 1.0)
        throw overload_error(fmt::format("{} load {} reaches 100%", what, load));
}

double ratio(double available, double capacity, std::string_view what)
{
    if (capacity == 0.0) throw structural_error(fmt::format("{} capacity is zero", what));
    if (capacity < 0.0 || available < 0.0 || available > capacity)
        throw validation_error(fmt::format("{} availability {} outside [0, {}]", what, available, capacity));
    return available / capacity;
}

}  // namespace

double vm_workload(double compute_load, double storage_load)
{
    check_load(compute_load, "compute");
    check_load(storage_load, "storage");
    return 1.0 / ((1.0 - compute_load) * (1.0 - storage_load));
}

double slice_workload(double cu_workload, double du_workload)
{
    if (!(cu_workload >= 1.0) || !(du_workload >= 1.0))
        throw validation_error("VM workloads are always >= 1");
    return 3.0 * cu_workload + 5.0 * du_workload;
}

double pm_workload(Resources pm_load, std::span<const Resources> hosted_vm_loads)
{
    double c = pm_load.compute;
    double s = pm_load.storage;
    for (const auto& vm : hosted_vm_loads) {
        if (vm.compute < 0.0 || vm.storage < 0.0) throw validation_error("negative VM load");
        c += vm.compute;
        s += vm.storage;
    }
    check_load(c, "PM compute");
    check_load(s, "PM storage");
    return 1.0 / ((1.0 - c) * (1.0 - s));
}

double pm_wastage(Resources available, Resources capacity, const WastageWeights& w)
{
    validate(w);
    return w.compute * ratio(available.compute, capacity.compute, "compute")
         + w.storage * ratio(available.storage, capacity.storage, "storage");
}

double vm_wastage(Resources available, Resources capacity, const WastageWeights& w,
                  double pm_wastage_term, int vm_index)
{
    if (vm_index < 1) throw validation_error("VM index is 1-based");
    return pm_wastage(available, capacity, w) + pm_wastage_term * vm_index;
}

}  // namespace slicemap::infra
