#pragma once

#include <odcal/assignment.hpp>
#include <odcal/bvls.hpp>
#include <odcal/calibrator.hpp>
#include <odcal/fixedpoint.hpp>
#include <odcal/metrics.hpp>
#include <odcal/mesosim.hpp>
#include <odcal/network.hpp>
#include <odcal/routing.hpp>
#include <odcal/sampler.hpp>
#include <odcal/scenario.hpp>

#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace support {

struct LinkSpec {
    std::string from;
    std::string to;
    double length = 100;
    int lanes = 1;
    double speed = 10;
    bool sensor = true;
    std::string id = {}; // defaults to "from-to"
};

/// Unsignalized network with every node at the origin of the plane.
inline odcal::Network make_network(const std::vector<std::string>& nodes, const std::vector<LinkSpec>& links,
                                   const std::vector<std::pair<std::string, std::string>>& ods)
{
    odcal::Network net;
    for (const auto& n : nodes)
        net.nodes.push_back({n, 0.0, 0.0, false, std::nullopt});
    for (const auto& l : links) {
        const std::string id = l.id.empty() ? l.from + "-" + l.to : l.id;
        net.links.push_back({id, l.from, l.to, l.length, l.lanes, l.speed, l.sensor});
        if (l.sensor)
            net.sensor_links.push_back(id);
    }
    for (const auto& [o, d] : ods)
        net.od_pairs.push_back({o, d});
    net.build_index();
    return net;
}

/// Diamond a -> {b, c, d} -> e: three two-link routes, link ids a-x and x-e.
inline odcal::Network diamond()
{
    return make_network({"a", "b", "c", "d", "e"},
                        {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "e"}, {"c", "e"}, {"d", "e"}}, {{"a", "e"}});
}

/// Random strongly connected digraph on `n` nodes: a directed ring plus extra arcs.
inline odcal::Network random_graph(std::mt19937_64& rng, int n, int extra)
{
    std::vector<std::string> nodes;
    for (int i = 0; i < n; ++i)
        nodes.push_back("v" + std::to_string(i));
    std::vector<LinkSpec> links;
    std::uniform_real_distribution<double> len(50, 500);
    for (int i = 0; i < n; ++i)
        links.push_back({nodes[i], nodes[(i + 1) % n], len(rng)});
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::set<std::pair<int, int>> used;
    for (int i = 0; i < n; ++i)
        used.insert({i, (i + 1) % n});
    for (int e = 0; e < extra; ++e) {
        const int a = pick(rng), b = pick(rng);
        if (a == b || !used.insert({a, b}).second)
            continue;
        links.push_back({nodes[a], nodes[b], len(rng)});
    }
    std::vector<std::pair<std::string, std::string>> ods;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                ods.push_back({nodes[i], nodes[j]});
    return make_network(nodes, links, ods);
}

/// Every simple path from `s` to `t`, by depth-first search.
inline std::vector<std::vector<odcal::Index>> all_simple_paths(const odcal::Network& net, odcal::Index s,
                                                               odcal::Index t)
{
    std::vector<std::vector<odcal::Index>> out;
    std::vector<odcal::Index> path;
    std::vector<char> seen(static_cast<std::size_t>(net.num_nodes()), 0);
    auto dfs = [&](auto&& self, odcal::Index u) -> void {
        if (u == t) {
            out.push_back(path);
            return;
        }
        seen[u] = 1;
        for (odcal::Index l : net.out_links(u)) {
            const odcal::Index v = net.to_node(l);
            if (seen[v])
                continue;
            path.push_back(l);
            self(self, v);
            path.pop_back();
        }
        seen[u] = 0;
    };
    dfs(dfs, s);
    return out;
}

inline std::filesystem::path temp_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("odcal_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace support
