#pragma once

// Reference computations used as test oracles. They re-derive everything from
// the component and VM lists, without calling the environment or the agents.

#include "slicemap/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace reference {

/// Exact optimal action values of the sequential placement for instances with
/// at most two components, where (component index, anchor VM) identifies the
/// full state. Indexed [(i - 1) * m + (anchor - 1)][a - 1].
struct ValueIteration {
    std::vector<std::vector<double>> q;
    int sweeps = 0;
};

inline double step_reward(bool efficiency, const slicemap::VnfComponent& c, const slicemap::VirtualMachine& v)
{
    const double cu = c.compute_req / v.compute_cap;
    const double su = c.storage_req / v.storage_cap;
    return efficiency ? cu + su : (1.0 - cu) + (1.0 - su);
}

inline ValueIteration value_iteration(const std::vector<slicemap::VnfComponent>& comps,
                                      const std::vector<slicemap::VirtualMachine>& vms, bool efficiency,
                                      double gamma)
{
    const std::size_t k = comps.size();
    const std::size_t m = vms.size();
    ValueIteration vi;
    vi.q.assign(k * m, std::vector<double>(m, 0.0));
    auto fits = [&](std::size_t i, std::size_t j) {
        return vms[j].compute_cap >= comps[i].compute_req && vms[j].storage_cap >= comps[i].storage_req;
    };
    for (vi.sweeps = 1; vi.sweeps < 10000; ++vi.sweeps) {
        double delta = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t anchor = 0; anchor < m; ++anchor) {
                for (std::size_t a = 0; a < m; ++a) {
                    // With at most two components the only occupied VM at
                    // stage 2 is the anchor.
                    const bool occupied = i == 1 && a == anchor;
                    double value;
                    if (occupied || !fits(i, a)) {
                        value = -1.0;
                    } else {
                        value = step_reward(efficiency, comps[i], vms[a]);
                        if (i + 1 < k) {
                            const auto& next = vi.q[(i + 1) * m + a];
                            value += gamma * *std::max_element(next.begin(), next.end());
                        }
                    }
                    auto& cell = vi.q[i * m + anchor][a];
                    delta = std::max(delta, std::abs(cell - value));
                    cell = value;
                }
            }
        }
        if (delta == 0.0) break;
    }
    return vi;
}

}  // namespace reference
