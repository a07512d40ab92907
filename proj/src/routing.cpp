#include <odcal/routing.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace odcal {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool tight(double from, double weight, double to)
{
    const double lhs = from + weight;
    return std::abs(lhs - to) <= 1e-9 * std::max(1.0, std::abs(to));
}

} // namespace

std::size_t RouteDb::total_routes() const
{
    std::size_t n = 0;
    for (const auto& r : routes)
        n += r.size();
    return n;
}

bool RouteDb::contains(Index od, const std::vector<Index>& links) const
{
    const auto& set = routes[od];
    return std::any_of(set.begin(), set.end(), [&](const Route& r) { return r.links == links; });
}

double path_cost(const std::vector<Index>& links, const VectorXd& tau)
{
    double c = 0.0;
    for (Index l : links)
        c += tau[l];
    return c;
}

std::optional<std::vector<Index>> shortest_path(const Network& net, const VectorXd& tau, Index source,
                                                Index target, const std::vector<char>& banned_links,
                                                const std::vector<char>& banned_nodes)
{
    const Index n = net.num_nodes();
    auto link_ok = [&](Index l) { return banned_links.empty() || !banned_links[l]; };
    auto node_ok = [&](Index v) { return banned_nodes.empty() || !banned_nodes[v]; };
    if (!node_ok(source) || !node_ok(target))
        return std::nullopt;
    if (source == target)
        return std::vector<Index>{};

    std::vector<double> dist(n, inf);
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u])
            continue;
        for (Index l : net.out_links(u)) {
            if (!link_ok(l))
                continue;
            Index v = net.to_node(l);
            if (!node_ok(v))
                continue;
            const double nd = d + tau[l];
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    if (dist[target] == inf)
        return std::nullopt;

    // Nodes that reach the target over tight edges, found by scanning nodes in
    // decreasing distance order.
    std::vector<Index> order;
    for (Index v = 0; v < n; ++v)
        if (dist[v] < inf)
            order.push_back(v);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return dist[a] > dist[b]; });
    std::vector<char> on_tight(n, 0);
    on_tight[target] = 1;
    for (Index u : order) {
        if (u == target || dist[u] > dist[target])
            continue;
        for (Index l : net.out_links(u)) {
            Index v = net.to_node(l);
            if (link_ok(l) && node_ok(v) && on_tight[v] && dist[v] < inf && tight(dist[u], tau[l], dist[v])) {
                on_tight[u] = 1;
                break;
            }
        }
    }

    std::vector<Index> path;
    Index u = source;
    while (u != target) {
        Index best = -1;
        for (Index l : net.out_links(u)) {
            Index v = net.to_node(l);
            if (link_ok(l) && node_ok(v) && on_tight[v] && dist[v] < inf && tight(dist[u], tau[l], dist[v])) {
                if (best < 0 || l < best)
                    best = l;
            }
        }
        if (best < 0 || path.size() > static_cast<std::size_t>(net.num_links()))
            return std::nullopt;
        path.push_back(best);
        u = net.to_node(best);
    }
    return path;
}

PathEnumerator::PathEnumerator(const Network& net, const VectorXd& tau, Index source, Index target)
    : net_(net), tau_(tau), source_(source), target_(target)
{
}

void PathEnumerator::expand_last()
{
    const auto& last = accepted_.back();
    std::vector<char> banned_links(net_.num_links(), 0);
    std::vector<char> banned_nodes(net_.num_nodes(), 0);
    Index spur = source_;
    for (std::size_t i = 0; i < last.size(); ++i) {
        std::fill(banned_links.begin(), banned_links.end(), 0);
        for (const auto& p : accepted_)
            if (p.size() > i && std::equal(p.begin(), p.begin() + i, last.begin()))
                banned_links[p[i]] = 1;
        auto tail = shortest_path(net_, tau_, spur, target_, banned_links, banned_nodes);
        if (tail) {
            std::vector<Index> full(last.begin(), last.begin() + i);
            full.insert(full.end(), tail->begin(), tail->end());
            candidates_.emplace(path_cost(full, tau_), std::move(full));
        }
        banned_nodes[spur] = 1;
        spur = net_.to_node(last[i]);
    }
}

std::optional<std::vector<Index>> PathEnumerator::next()
{
    if (!started_) {
        started_ = true;
        auto first = shortest_path(net_, tau_, source_, target_);
        if (!first)
            return std::nullopt;
        accepted_.push_back(*first);
        return first;
    }
    if (accepted_.empty())
        return std::nullopt;
    expand_last();
    while (!candidates_.empty()) {
        auto node = candidates_.extract(candidates_.begin());
        auto& path = node.value().second;
        if (std::find(accepted_.begin(), accepted_.end(), path) != accepted_.end())
            continue;
        accepted_.push_back(path);
        return path;
    }
    return std::nullopt;
}

RouteCosts route_costs(const Route& route, const Network& net, const VectorXd& tau)
{
    RouteCosts c;
    c.to_sensor = VectorXd::Constant(net.num_sensors(), inf);
    double t = 0.0;
    for (Index l : route.links) {
        const Index k = net.sensor_of_link(l);
        if (k >= 0 && c.to_sensor[k] == inf)
            c.to_sensor[k] = t;
        t += tau[l];
    }
    c.total = t;
    return c;
}

RouteDb init_shortest_paths(const Network& net, const VectorXd& tau, int rho)
{
    if (rho < 1)
        throw Error("init_shortest_paths: rho must be at least 1");
    if ((tau.array() <= 0).any())
        throw Error("init_shortest_paths: travel times must be strictly positive");
    RouteDb db;
    db.rho = rho;
    db.routes.resize(net.num_od_pairs());
    for (Index m = 0; m < net.num_od_pairs(); ++m) {
        auto [o, d] = net.od_nodes(m);
        auto path = shortest_path(net, tau, o, d);
        if (!path)
            throw Error("init_shortest_paths: od pair " + net.od_pairs[m].origin + "->" +
                        net.od_pairs[m].destination + " is unreachable");
        db.routes[m].push_back(Route{m, std::move(*path)});
    }
    return db;
}

bool add_best_new_route(RouteDb& db, const Network& net, const VectorXd& tau, Index od, int scan_limit)
{
    if (scan_limit < 0)
        scan_limit = 2 * db.rho;
    auto [o, d] = net.od_nodes(od);
    PathEnumerator paths(net, tau, o, d);
    for (int scanned = 0; scanned < scan_limit; ++scanned) {
        auto p = paths.next();
        if (!p)
            return false;
        if (db.contains(od, *p))
            continue;
        auto& set = db.routes[od];
        if (static_cast<int>(set.size()) < db.rho) {
            set.push_back(Route{od, std::move(*p)});
            return true;
        }
        auto worst = set.begin();
        double worst_cost = -inf;
        for (auto it = set.begin(); it != set.end(); ++it) {
            const double c = path_cost(it->links, tau);
            if (c > worst_cost) {
                worst_cost = c;
                worst = it;
            }
        }
        if (path_cost(*p, tau) < worst_cost) {
            set.erase(worst);
            set.push_back(Route{od, std::move(*p)});
            return true;
        }
        return false;
    }
    return false;
}

} // namespace odcal
