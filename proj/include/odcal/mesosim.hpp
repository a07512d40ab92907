#pragma once

#include <odcal/sampler.hpp>

#include <cstdint>
#include <vector>

namespace odcal {

struct SimConfig {
    int step = 1;                 ///< s; all event times are whole multiples of it
    double saturation_flow = 0.5; ///< veh/s per lane
    double jam_density = 0.145;   ///< veh/m per lane
    bool record_events = false;   ///< keep per-link traversal events in the result
};

struct Vehicle {
    std::uint64_t id = 0;
    Index od = -1;
    std::vector<Index> links;
    int pos = -1;        ///< index of the current link; -1 while waiting to enter the first one
    long depart = 0;     ///< global departure time, s
    long entry = 0;      ///< global time of entry into the current link, s

    friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

/// Simulator state at a frame boundary. A default-constructed state is an
/// empty network at time 0 with no travel-time history.
struct FrameState {
    long clock = 0; ///< global time at which the next frame starts; drives the signal phases
    std::uint64_t next_vehicle_id = 0;
    std::vector<std::vector<Vehicle>> link_queues;  ///< per link, FIFO order, head first
    std::vector<std::vector<Vehicle>> entry_queues; ///< per link, vehicles waiting to enter at their origin
    std::vector<double> credits;                    ///< per link discharge credit
    VectorXd tau;                                   ///< last-known link travel times; empty on cold start

    std::size_t vehicle_count() const;
    std::vector<int> occupancy() const;

    friend bool operator==(const FrameState& a, const FrameState& b)
    {
        return a.clock == b.clock && a.next_vehicle_id == b.next_vehicle_id && a.link_queues == b.link_queues &&
               a.entry_queues == b.entry_queues && a.credits == b.credits && a.tau.size() == b.tau.size() &&
               a.tau == b.tau;
    }
};

struct TripRecord {
    std::uint64_t vehicle = 0;
    Index od = -1;
    long depart = 0;
    long arrive = 0;
};

/// One completed link traversal.
struct LinkEvent {
    std::uint64_t vehicle = 0;
    Index link = -1;
    long enter = 0;
    long exit = 0;

    friend bool operator==(const LinkEvent&, const LinkEvent&) = default;
};

struct SimResult {
    VectorXd counts;           ///< sensor hits (link entries) during the frame
    VectorXd carryover_counts; ///< part of `counts` made by vehicles of the initial state
    VectorXd tau;              ///< mean experienced link travel time, s
    std::vector<TripRecord> completed;
    FrameState state;          ///< vehicles still in the network at frame end
    double mean_speed = 0.0;   ///< m/s over all link traversals finished in the frame
    long departures = 0;
    long initial_vehicles = 0;
    std::vector<LinkEvent> events;
};

/// Point-queue simulation of one frame of `delta` seconds.
///
/// A vehicle spends at least its link's free-flow time (rounded up to whole
/// steps) on each link. It then leaves in FIFO order when the downstream signal
/// shows green for its approach, the link has discharge capacity left and the
/// next link is below jam occupancy; otherwise it waits. Arrival at the
/// destination is never gated. A sensor hit is recorded when a vehicle enters
/// an instrumented link.
SimResult simulate_frame(const Network& net, const std::vector<VehiclePlan>& plans, const FrameState& initial,
                         const SimConfig& cfg, int delta);

/// The carryover state to load into the next frame.
inline FrameState save_state(const SimResult& result) { return result.state; }

/// Sensor hits still ahead of the vehicles carried over in `state`.
VectorXd expected_carryover_hits(const FrameState& state, const Network& net);

} // namespace odcal
