#include <odcal/sampler.hpp>

#include <algorithm>
#include <random>
#include <tuple>

namespace odcal {

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<RouteFlow> route_flows(const VectorXd& od_estimate, const AssignmentMatrix& a, const RouteDb& db)
{
    if (od_estimate.size() != db.num_od_pairs() || a.route_probs.size() != db.routes.size())
        throw Error("route_flows: dimension mismatch");
    std::vector<RouteFlow> flows;
    for (Index m = 0; m < db.num_od_pairs(); ++m) {
        const auto& probs = a.route_probs[m];
        if (probs.size() != static_cast<Eigen::Index>(db.routes[m].size()))
            throw Error("route_flows: route probabilities out of date for od pair " + std::to_string(m));
        for (Index i = 0; i < static_cast<Index>(probs.size()); ++i)
            flows.push_back({m, i, od_estimate[m] * probs[i], db.routes[m][i].links});
    }
    return flows;
}

std::vector<VehiclePlan> sample_plans(const std::vector<RouteFlow>& flows, int delta, std::uint64_t seed)
{
    if (delta <= 0)
        throw Error("sample_plans: frame length must be positive");
    std::vector<VehiclePlan> plans;
    for (const auto& f : flows) {
        if (f.expected > delta)
            throw Error("sample_plans: expected trips " + std::to_string(f.expected) + " on route " +
                        std::to_string(f.route) + " of od pair " + std::to_string(f.od) +
                        " exceed one departure per second");
        if (f.expected < 0)
            throw Error("sample_plans: negative expected trips");
        const double p = f.expected / delta;
        if (p == 0.0)
            continue;
        const std::uint64_t key = (static_cast<std::uint64_t>(f.od) << 32) ^ static_cast<std::uint32_t>(f.route);
        std::mt19937_64 rng(mix_seed(seed ^ mix_seed(key)));
        if (p >= 1.0) {
            for (int t = 0; t < delta; ++t)
                plans.push_back({f.od, f.route, t, f.links});
            continue;
        }
        // Gaps between successes of a per-second Bernoulli(p) sequence are
        // geometric, so this emits exactly the same process.
        std::geometric_distribution<int> gap(p);
        for (long t = gap(rng); t < delta; t += 1 + static_cast<long>(gap(rng)))
            plans.push_back({f.od, f.route, static_cast<int>(t), f.links});
    }
    std::sort(plans.begin(), plans.end(), [](const VehiclePlan& a, const VehiclePlan& b) {
        return std::tie(a.departure, a.od, a.route) < std::tie(b.departure, b.od, b.route);
    });
    return plans;
}

} // namespace odcal
