#pragma once

#include <odcal/types.hpp>

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace odcal {

/// Green window of one incoming link at a signalized node, in seconds within the cycle.
struct Approach {
    std::string link;
    double green_start = 0.0;
    double green_end = 0.0;
};

/// Fixed-cycle signal. Incoming links without an approach entry are never gated.
struct SignalSpec {
    double cycle = 60.0;
    std::vector<Approach> approaches;

    bool is_green(const std::string& link, double time) const;
};

struct Node {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    bool signalized = false;
    std::optional<SignalSpec> signal_spec;
};

struct Link {
    std::string id;
    std::string from;
    std::string to;
    double length = 0.0;      // m
    int lanes = 1;
    double speed_limit = 0.0; // m/s
    bool has_sensor = false;
};

struct OdPair {
    std::string origin;
    std::string destination;
};

struct Violation {
    std::string entity;
    std::string message;
};

struct ValidateOptions {
    bool allow_self_loops = false;
};

/// Directed road network. Node, link, sensor and OD indices follow input order.
///
/// Call `build_index()` after mutating the public vectors; the generator and the
/// file reader do this themselves.
class Network {
public:
    std::vector<Node> nodes;
    std::vector<Link> links;
    std::vector<std::string> sensor_links;
    std::vector<OdPair> od_pairs;

    void build_index();

    Index num_nodes() const { return static_cast<Index>(nodes.size()); }
    Index num_links() const { return static_cast<Index>(links.size()); }
    Index num_sensors() const { return static_cast<Index>(sensor_links.size()); }
    Index num_od_pairs() const { return static_cast<Index>(od_pairs.size()); }

    std::optional<Index> node_index(const std::string& id) const;
    std::optional<Index> link_index(const std::string& id) const;

    // The accessors below assume a valid, indexed network.
    Index from_node(Index link) const { return link_from_[link]; }
    Index to_node(Index link) const { return link_to_[link]; }
    const std::vector<Index>& out_links(Index node) const { return out_links_[node]; }
    /// Sensor index of a link, or -1 if the link is not instrumented.
    Index sensor_of_link(Index link) const { return link_sensor_[link]; }
    Index sensor_link(Index sensor) const { return sensor_link_index_[sensor]; }
    std::pair<Index, Index> od_nodes(Index od) const { return od_nodes_[od]; }
    /// OD index for an (origin, destination) node-id pair.
    std::optional<Index> od_index(const std::string& origin, const std::string& destination) const;

private:
    std::unordered_map<std::string, Index> node_by_id_;
    std::unordered_map<std::string, Index> link_by_id_;
    std::unordered_map<std::string, Index> od_by_key_;
    std::vector<Index> link_from_;
    std::vector<Index> link_to_;
    std::vector<std::vector<Index>> out_links_;
    std::vector<Index> link_sensor_;
    std::vector<Index> sensor_link_index_;
    std::vector<std::pair<Index, Index>> od_nodes_;
};

/// Every invariant violation of `net`; empty iff the network is well formed.
std::vector<Violation> validate(const Network& net, const ValidateOptions& options = {});

/// Throws odcal::Error listing the violations if `net` is not valid.
void require_valid(const Network& net, const ValidateOptions& options = {});

enum class PoiSelector { all_nodes, ring_pattern };

struct GridSpec {
    int rows = 4;
    int cols = 4;
    double link_length = 400.0;
    int lanes = 2;
    double speed_limit = 13.89;
    bool sensors_on_all_links = true;
    PoiSelector poi = PoiSelector::all_nodes;
    double signal_cycle = 60.0;
};

/// Nodes on the concentric rings at offsets 0, 3, 6, ... from the grid border.
std::vector<std::pair<int, int>> ring_pattern_cells(int rows, int cols);

/// Signalized grid with bidirectional links between orthogonal neighbours.
///
/// Node ids are `n<row>_<col>`, link ids `<from>-<to>`. Vertical approaches are
/// green for the first half of the cycle, horizontal ones for the second half.
Network generate_grid(const GridSpec& spec);

/// Free-flow travel time length / speed_limit of every link.
VectorXd free_flow_times(const Network& net);

} // namespace odcal
