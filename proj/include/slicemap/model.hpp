#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slicemap {

/// The eight micro-functions of a disaggregated gNB, in processing order.
/// The first three run in the O-CU, the last five in the O-DU.
enum class VnfcKind {
    rrc,
    pdcp,
    sdap,
    rlc_high,
    rlc_low,
    mac_high,
    mac_low,
    phy_high,
};

inline constexpr std::size_t kSliceSize = 8;
inline constexpr std::size_t kCuSize = 3;
inline constexpr std::size_t kDuSize = 5;

std::string_view to_string(VnfcKind kind);
VnfcKind vnfc_kind_from_string(std::string_view name);

/// Kind of the i-th component of a slice (1-based).
VnfcKind kind_for_position(int position);

constexpr bool is_cu(VnfcKind kind) { return kind <= VnfcKind::sdap; }
constexpr bool is_du(VnfcKind kind) { return !is_cu(kind); }

/// A (compute, storage) pair in abstract resource units.
struct Resources {
    double compute = 0.0;
    double storage = 0.0;

    friend bool operator==(const Resources&, const Resources&) = default;
};

struct VnfComponent {
    int id = 0;
    VnfcKind kind = VnfcKind::rrc;
    double compute_req = 0.0;
    double storage_req = 0.0;

    friend bool operator==(const VnfComponent&, const VnfComponent&) = default;
};

/// Throws validation_error on negative or non-finite requirements.
void validate(const VnfComponent& component);

/// The eight VNFCs of one slice. Construction enforces O-CU dominance:
/// the O-CU sums must be at least the O-DU sums in both dimensions.
class SliceSubnet {
public:
    explicit SliceSubnet(std::array<VnfComponent, kSliceSize> components);

    /// Convenience: builds f1..f8 with the canonical kinds from (compute, storage) pairs.
    static SliceSubnet from_requirements(std::span<const Resources> reqs);

    const std::array<VnfComponent, kSliceSize>& components() const noexcept { return components_; }
    const VnfComponent& component(int id) const;

    Resources total_demand() const noexcept { return total_; }

    friend bool operator==(const SliceSubnet& a, const SliceSubnet& b) { return a.components_ == b.components_; }

private:
    std::array<VnfComponent, kSliceSize> components_;
    Resources total_;
};

/// Sum of requirements over all eight components.
Resources total_slice_demand(const SliceSubnet& slice);

struct VirtualMachine {
    int id = 0;
    double compute_cap = 0.0;
    double storage_cap = 0.0;
    std::optional<int> hosted_component;  // component id when occupied

    constexpr bool available() const noexcept { return !hosted_component.has_value(); }

    friend bool operator==(const VirtualMachine&, const VirtualMachine&) = default;
};

void validate(const VirtualMachine& vm);

struct PhysicalMachine {
    int id = 0;
    double compute_cap = 0.0;
    double storage_cap = 0.0;
    int max_vm_count = 1;
    bool active = true;

    friend bool operator==(const PhysicalMachine&, const PhysicalMachine&) = default;
};

void validate(const PhysicalMachine& pm);

/// True when the VM capacity covers the component in both dimensions (equality fits).
constexpr bool capacity_fits(const VnfComponent& c, const VirtualMachine& vm)
{
    return vm.compute_cap >= c.compute_req && vm.storage_cap >= c.storage_req;
}

/// Available and large enough.
constexpr bool can_host(const VnfComponent& c, const VirtualMachine& vm)
{
    return vm.available() && capacity_fits(c, vm);
}

enum class VmLabel {
    occupied,
    available_sufficient,
    available_insufficient,
};

std::string_view to_string(VmLabel label);

struct VmClassification {
    std::vector<VmLabel> labels;  // parallel to the VM list
    int primary = 0;
    std::optional<int> target;
};

/// Labels every VM relative to `component`. `primary` defaults to the first VM.
/// Throws structural_error on an empty list.
VmClassification classify_vms(std::span<const VirtualMachine> vms,
                              const VnfComponent& component,
                              std::optional<int> primary = std::nullopt);

}  // namespace slicemap
