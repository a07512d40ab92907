#include <odcal/network.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace odcal {

namespace {

std::string od_key(const std::string& origin, const std::string& destination)
{
    return origin + '\x1f' + destination;
}

std::string node_id(int row, int col)
{
    return "n" + std::to_string(row) + "_" + std::to_string(col);
}

} // namespace

bool SignalSpec::is_green(const std::string& link, double time) const
{
    for (const auto& a : approaches) {
        if (a.link != link)
            continue;
        double phase = std::fmod(time, cycle);
        if (phase < 0)
            phase += cycle;
        return phase >= a.green_start && phase < a.green_end;
    }
    return true;
}

void Network::build_index()
{
    node_by_id_.clear();
    link_by_id_.clear();
    od_by_key_.clear();
    for (Index i = 0; i < num_nodes(); ++i)
        node_by_id_.emplace(nodes[i].id, i);
    for (Index i = 0; i < num_links(); ++i)
        link_by_id_.emplace(links[i].id, i);

    link_from_.assign(links.size(), -1);
    link_to_.assign(links.size(), -1);
    out_links_.assign(nodes.size(), {});
    for (Index l = 0; l < num_links(); ++l) {
        auto f = node_index(links[l].from);
        auto t = node_index(links[l].to);
        link_from_[l] = f.value_or(-1);
        link_to_[l] = t.value_or(-1);
        if (f && t)
            out_links_[*f].push_back(l);
    }

    link_sensor_.assign(links.size(), -1);
    sensor_link_index_.assign(sensor_links.size(), -1);
    for (Index k = 0; k < num_sensors(); ++k) {
        if (auto l = link_index(sensor_links[k])) {
            sensor_link_index_[k] = *l;
            if (link_sensor_[*l] < 0)
                link_sensor_[*l] = k;
        }
    }

    od_nodes_.assign(od_pairs.size(), {-1, -1});
    for (Index m = 0; m < num_od_pairs(); ++m) {
        const auto& od = od_pairs[m];
        od_nodes_[m] = {node_index(od.origin).value_or(-1), node_index(od.destination).value_or(-1)};
        od_by_key_.emplace(od_key(od.origin, od.destination), m);
    }
}

std::optional<Index> Network::node_index(const std::string& id) const
{
    auto it = node_by_id_.find(id);
    if (it == node_by_id_.end())
        return std::nullopt;
    return it->second;
}

std::optional<Index> Network::link_index(const std::string& id) const
{
    auto it = link_by_id_.find(id);
    if (it == link_by_id_.end())
        return std::nullopt;
    return it->second;
}

std::optional<Index> Network::od_index(const std::string& origin, const std::string& destination) const
{
    auto it = od_by_key_.find(od_key(origin, destination));
    if (it == od_by_key_.end())
        return std::nullopt;
    return it->second;
}

std::vector<Violation> validate(const Network& net, const ValidateOptions& options)
{
    std::vector<Violation> out;
    auto add = [&](std::string entity, std::string message) {
        out.push_back({std::move(entity), std::move(message)});
    };

    std::set<std::string> node_ids;
    for (const auto& n : net.nodes) {
        if (!node_ids.insert(n.id).second)
            add("node " + n.id, "duplicate node id");
        if (n.signalized != n.signal_spec.has_value())
            add("node " + n.id, "signal_spec must be present iff the node is signalized");
        if (n.signal_spec) {
            const auto& s = *n.signal_spec;
            if (!(s.cycle > 0))
                add("node " + n.id, "signal cycle must be positive");
            for (const auto& a : s.approaches) {
                if (!(a.green_start >= 0 && a.green_start < a.green_end && a.green_end <= s.cycle))
                    add("node " + n.id, "green window of approach " + a.link + " outside the cycle");
                auto l = net.link_index(a.link);
                if (!l || net.links[*l].to != n.id)
                    add("node " + n.id, "approach " + a.link + " is not an incoming link");
            }
        }
    }

    std::set<std::string> link_ids;
    for (const auto& l : net.links) {
        const std::string e = "link " + l.id;
        if (!link_ids.insert(l.id).second)
            add(e, "duplicate link id");
        if (!node_ids.count(l.from))
            add(e, "unknown from-node " + l.from);
        if (!node_ids.count(l.to))
            add(e, "unknown to-node " + l.to);
        if (l.from == l.to && !options.allow_self_loops)
            add(e, "self-loop");
        if (!(l.length > 0))
            add(e, "length must be positive");
        if (l.lanes < 1)
            add(e, "lanes must be at least 1");
        if (!(l.speed_limit > 0))
            add(e, "speed_limit must be positive");
    }

    std::set<std::string> sensors;
    for (const auto& s : net.sensor_links) {
        if (!link_ids.count(s))
            add("sensor " + s, "sensor on unknown link");
        else if (!sensors.insert(s).second)
            add("sensor " + s, "duplicate sensor link");
    }
    for (const auto& l : net.links)
        if (l.has_sensor && !sensors.count(l.id))
            add("link " + l.id, "has_sensor set but link missing from sensor_links");
    for (const auto& s : sensors) {
        auto l = net.link_index(s);
        if (l && !net.links[*l].has_sensor)
            add("sensor " + s, "sensor link without has_sensor flag");
    }

    // Reachability, one BFS per distinct origin.
    std::set<std::string> od_keys;
    std::unordered_map<Index, std::vector<char>> reach;
    for (Index m = 0; m < net.num_od_pairs(); ++m) {
        const auto& od = net.od_pairs[m];
        const std::string e = "od_pair " + od.origin + "->" + od.destination;
        bool ok = true;
        if (!node_ids.count(od.origin)) {
            add(e, "unknown node " + od.origin);
            ok = false;
        }
        if (!node_ids.count(od.destination)) {
            add(e, "unknown node " + od.destination);
            ok = false;
        }
        if (od.origin == od.destination) {
            add(e, "origin equals destination");
            ok = false;
        }
        if (!od_keys.insert(od_key(od.origin, od.destination)).second)
            add(e, "duplicate od pair");
        if (!ok)
            continue;
        auto [o, d] = net.od_nodes(m);
        auto it = reach.find(o);
        if (it == reach.end()) {
            std::vector<char> seen(net.nodes.size(), 0);
            std::deque<Index> queue{o};
            seen[o] = 1;
            while (!queue.empty()) {
                Index u = queue.front();
                queue.pop_front();
                for (Index l : net.out_links(u)) {
                    Index v = net.to_node(l);
                    if (!seen[v]) {
                        seen[v] = 1;
                        queue.push_back(v);
                    }
                }
            }
            it = reach.emplace(o, std::move(seen)).first;
        }
        if (!it->second[d])
            add(e, "destination unreachable from origin");
    }
    return out;
}

void require_valid(const Network& net, const ValidateOptions& options)
{
    auto violations = validate(net, options);
    if (violations.empty())
        return;
    std::ostringstream msg;
    msg << "invalid network:";
    for (const auto& v : violations)
        msg << "\n  " << v.entity << ": " << v.message;
    throw Error(msg.str());
}

std::vector<std::pair<int, int>> ring_pattern_cells(int rows, int cols)
{
    std::vector<std::pair<int, int>> cells;
    for (int off = 0; rows - 2 * off >= 2 && cols - 2 * off >= 2; off += 3) {
        const int r0 = off, r1 = rows - 1 - off, c0 = off, c1 = cols - 1 - off;
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c)
                if (r == r0 || r == r1 || c == c0 || c == c1)
                    cells.emplace_back(r, c);
    }
    std::sort(cells.begin(), cells.end());
    return cells;
}

Network generate_grid(const GridSpec& spec)
{
    if (spec.rows < 2 || spec.cols < 2)
        throw Error("generate_grid: rows and cols must be at least 2");
    if (!(spec.link_length > 0) || spec.lanes < 1 || !(spec.speed_limit > 0) || !(spec.signal_cycle > 0))
        throw Error("generate_grid: link attributes must be positive");

    Network net;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            Node n;
            n.id = node_id(r, c);
            n.x = c * spec.link_length;
            n.y = r * spec.link_length;
            n.signalized = true;
            n.signal_spec = SignalSpec{spec.signal_cycle, {}};
            net.nodes.push_back(std::move(n));
        }
    }

    const double half = spec.signal_cycle / 2.0;
    auto add_link = [&](int r0, int c0, int r1, int c1) {
        Link l;
        l.from = node_id(r0, c0);
        l.to = node_id(r1, c1);
        l.id = l.from + "-" + l.to;
        l.length = spec.link_length;
        l.lanes = spec.lanes;
        l.speed_limit = spec.speed_limit;
        l.has_sensor = spec.sensors_on_all_links;
        const bool vertical = (c0 == c1);
        auto& sig = *net.nodes[r1 * spec.cols + c1].signal_spec;
        sig.approaches.push_back({l.id, vertical ? 0.0 : half, vertical ? half : spec.signal_cycle});
        if (l.has_sensor)
            net.sensor_links.push_back(l.id);
        net.links.push_back(std::move(l));
    };
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            if (c + 1 < spec.cols) {
                add_link(r, c, r, c + 1);
                add_link(r, c + 1, r, c);
            }
            if (r + 1 < spec.rows) {
                add_link(r, c, r + 1, c);
                add_link(r + 1, c, r, c);
            }
        }
    }

    std::vector<std::string> poi;
    if (spec.poi == PoiSelector::all_nodes) {
        for (const auto& n : net.nodes)
            poi.push_back(n.id);
    } else {
        for (auto [r, c] : ring_pattern_cells(spec.rows, spec.cols))
            poi.push_back(node_id(r, c));
    }
    for (const auto& o : poi)
        for (const auto& d : poi)
            if (o != d)
                net.od_pairs.push_back({o, d});

    net.build_index();
    return net;
}

VectorXd free_flow_times(const Network& net)
{
    VectorXd nu(net.num_links());
    for (Index l = 0; l < net.num_links(); ++l)
        nu[l] = net.links[l].length / net.links[l].speed_limit;
    return nu;
}

} // namespace odcal
