#pragma once

#include <odcal/network.hpp>

#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace odcal {

/// A loopless path for one OD pair, stored as link indices.
struct Route {
    Index od = -1;
    std::vector<Index> links;

    friend bool operator==(const Route&, const Route&) = default;
};

/// Route travel time and the time from the origin to the entry of each sensor link.
struct RouteCosts {
    double total = 0.0;
    VectorXd to_sensor; ///< one entry per sensor, +inf when the sensor is not on the route
};

/// Bounded per-OD route sets.
struct RouteDb {
    int rho = 10;
    std::vector<std::vector<Route>> routes;

    Index num_od_pairs() const { return static_cast<Index>(routes.size()); }
    std::size_t total_routes() const;
    bool contains(Index od, const std::vector<Index>& links) const;
};

/// Sum of `tau` over a link sequence.
double path_cost(const std::vector<Index>& links, const VectorXd& tau);

/// Minimum-cost path between two nodes, ties broken by the lexicographically
/// smallest link-index sequence. Banned links and nodes are skipped; an empty
/// `banned_nodes` vector bans nothing. Returns nullopt when unreachable.
std::optional<std::vector<Index>> shortest_path(const Network& net, const VectorXd& tau, Index source,
                                                Index target, const std::vector<char>& banned_links = {},
                                                const std::vector<char>& banned_nodes = {});

/// Lazy Yen enumeration of loopless paths in non-decreasing cost order.
class PathEnumerator {
public:
    PathEnumerator(const Network& net, const VectorXd& tau, Index source, Index target);

    /// Next path, or nullopt once every loopless path has been produced.
    std::optional<std::vector<Index>> next();

private:
    using Candidate = std::pair<double, std::vector<Index>>;

    void expand_last();

    const Network& net_;
    const VectorXd& tau_;
    Index source_;
    Index target_;
    std::vector<std::vector<Index>> accepted_;
    std::set<Candidate> candidates_;
    bool started_ = false;
};

RouteCosts route_costs(const Route& route, const Network& net, const VectorXd& tau);

/// One shortest path per OD pair. Throws if any pair is unreachable.
RouteDb init_shortest_paths(const Network& net, const VectorXd& tau, int rho = 10);

/// Add the cheapest route for OD pair `od` that is not yet stored.
///
/// Candidates are scanned in cost order, at most `scan_limit` of them
/// (default 2 * rho). A full set evicts its most expensive route when the
/// candidate is strictly cheaper. Returns true if the set changed.
bool add_best_new_route(RouteDb& db, const Network& net, const VectorXd& tau, Index od, int scan_limit = -1);

} // namespace odcal
