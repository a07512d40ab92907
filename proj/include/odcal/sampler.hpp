#pragma once

#include <odcal/assignment.hpp>

#include <cstdint>
#include <vector>

namespace odcal {

/// Expected trips on one stored route.
struct RouteFlow {
    Index od = -1;
    Index route = -1; ///< position in the route set the flows were derived from
    double expected = 0.0;
    std::vector<Index> links;
};

/// A single trip on a fixed route, departing `departure` seconds into the frame.
struct VehiclePlan {
    Index od = -1;
    Index route = -1;
    int departure = 0;
    std::vector<Index> links;
};

/// E_i = x*_m P_i for every route of every OD pair.
std::vector<RouteFlow> route_flows(const VectorXd& od_estimate, const AssignmentMatrix& a, const RouteDb& db);

/// Per-second Bernoulli departures with probability E_i / delta on each route.
///
/// Every route draws from its own generator seeded from (seed, od, route), so
/// the result does not depend on the order of `flows`. Plans are sorted by
/// (departure, od, route). Throws if some E_i exceeds delta.
std::vector<VehiclePlan> sample_plans(const std::vector<RouteFlow>& flows, int delta, std::uint64_t seed);

/// Seed of replicate r: base ^ r.
inline std::uint64_t replicate_seed(std::uint64_t base, int replicate)
{
    return base ^ static_cast<std::uint64_t>(replicate);
}

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

} // namespace odcal
