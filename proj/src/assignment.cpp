#include <odcal/assignment.hpp>

#include <algorithm>
#include <cmath>

namespace odcal {

VectorXd logit_probs(std::span<const double> thetas, double gamma)
{
    if (thetas.empty())
        throw Error("logit_probs: empty route set");
    const Eigen::Map<const VectorXd> theta(thetas.data(), static_cast<Eigen::Index>(thetas.size()));
    VectorXd u = gamma * theta;
    u = (u.array() - u.maxCoeff()).exp();
    return u / u.sum();
}

std::vector<std::vector<RouteCosts>> all_route_costs(const RouteDb& db, const Network& net, const VectorXd& tau)
{
    std::vector<std::vector<RouteCosts>> out(db.routes.size());
    for (std::size_t m = 0; m < db.routes.size(); ++m) {
        out[m].reserve(db.routes[m].size());
        for (const auto& r : db.routes[m])
            out[m].push_back(route_costs(r, net, tau));
    }
    return out;
}

AssignmentMatrix build_assignment(const RouteDb& db, const std::vector<std::vector<RouteCosts>>& costs,
                                  Index num_sensors, double gamma, double delta)
{
    const Index num_od = db.num_od_pairs();
    AssignmentMatrix a;
    a.route_probs.resize(num_od);
    std::vector<Eigen::Triplet<double>> entries;
    std::vector<double> thetas;
    VectorXd row(num_sensors);
    for (Index m = 0; m < num_od; ++m) {
        const auto& rc = costs[m];
        if (rc.empty())
            throw Error("build_assignment: od pair " + std::to_string(m) + " has no route");
        thetas.clear();
        for (const auto& c : rc)
            thetas.push_back(c.total);
        a.route_probs[m] = logit_probs(thetas, gamma);
        row.setZero();
        for (std::size_t i = 0; i < rc.size(); ++i) {
            const double p = a.route_probs[m][static_cast<Eigen::Index>(i)];
            for (Index k = 0; k < num_sensors; ++k) {
                const double t = rc[i].to_sensor[k];
                if (std::isfinite(t))
                    row[k] += p * crossing_prob(delta, t);
            }
        }
        for (Index k = 0; k < num_sensors; ++k)
            if (row[k] > 0)
                entries.emplace_back(m, k, std::clamp(row[k], 0.0, 1.0));
    }
    a.alpha.resize(num_od, num_sensors);
    a.alpha.setFromTriplets(entries.begin(), entries.end());
    return a;
}

VectorXd expected_counts(const AssignmentMatrix& a, const VectorXd& od)
{
    return a.alpha.transpose() * od;
}

VectorXd seed_od(const VectorXd& nod, const AssignmentMatrix& a, const VectorXd& counts)
{
    const double total = counts.sum();
    if (total == 0.0)
        return VectorXd::Zero(nod.size());
    const double s = expected_counts(a, nod).sum();
    if (!(s > 0))
        throw Error("seed_od: no demand in the normalized distribution can reach any sensor");
    return (total / s) * nod;
}

} // namespace odcal
