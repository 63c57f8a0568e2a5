#pragma once

#include "slicemap/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slicemap::infra {

/// Binary VM-to-PM adjacency matrix plus the PM activity vector.
class VmPlacement {
public:
    VmPlacement(std::size_t vm_count, std::size_t pm_count);

    std::size_t vm_count() const noexcept { return vms_; }
    std::size_t pm_count() const noexcept { return pms_; }

    bool placed(std::size_t vm, std::size_t pm) const;
    void set(std::size_t vm, std::size_t pm, bool on = true);

    bool pm_active(std::size_t pm) const;
    void set_pm_active(std::size_t pm, bool on);

    friend bool operator==(const VmPlacement&, const VmPlacement&) = default;

private:
    std::size_t vms_;
    std::size_t pms_;
    std::vector<std::uint8_t> x_;
    std::vector<std::uint8_t> active_;
};

enum class PlacementConstraint {
    single_host,       // every VM sits on exactly one PM
    vm_count,          // a PM hosts at most max_vm_count VMs
    compute_capacity,  // hosted VM compute fits the (active) PM
    storage_capacity,  // hosted VM storage fits the (active) PM
};

std::string_view to_string(PlacementConstraint c);

struct PlacementViolation {
    PlacementConstraint constraint;
    int index;  // VM id for single_host, PM id otherwise
    std::string message;
};

/// Checks the VM-to-PM constraints. With `require_total` unset, an unplaced VM
/// is not a violation (a VM on two PMs still is). Throws structural_error on
/// dimension mismatch.
std::vector<PlacementViolation> check_vm_placement(const VmPlacement& placement,
                                                   std::span<const VirtualMachine> vms,
                                                   std::span<const PhysicalMachine> pms,
                                                   bool require_total = true);

struct WastageWeights {
    double compute = 0.5;
    double storage = 0.5;
};

void validate(const WastageWeights& w);

/// 1 / ((1 - c)(1 - s)). Loads must lie in [0, 1); throws overload_error at >= 1.
double vm_workload(double compute_load, double storage_load);

/// Slice workload from one O-CU VM workload and one O-DU VM workload (3 + 5 VMs).
double slice_workload(double cu_workload, double du_workload);

/// Workload of a PM after hosting VMs. All loads are fractions of the PM capacity.
double pm_workload(Resources pm_load, std::span<const Resources> hosted_vm_loads);

/// Weighted idle fraction of a PM.
double pm_wastage(Resources available, Resources capacity, const WastageWeights& w = {});

/// VM idle fraction plus the host-PM term scaled by the VM index. The index
/// scaling is reproduced as published; it grows with j and is diagnostic only.
double vm_wastage(Resources available, Resources capacity, const WastageWeights& w,
                  double pm_wastage_term, int vm_index);

}  // namespace slicemap::infra
