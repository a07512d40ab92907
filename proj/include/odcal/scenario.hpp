#pragma once

#include <odcal/mesosim.hpp>

#include <cstdint>
#include <vector>

namespace odcal {

enum class DemandMode {
    count, ///< per-OD trip total drawn uniformly from [min, max] over the whole duration
    rate,  ///< per-OD hourly rate drawn uniformly from [min, max]; trips are Poisson
};

struct DemandSpec {
    DemandMode mode = DemandMode::count;
    double min = 200;
    double max = 350;
    int duration = 4 * 3600; ///< s
    int frame = 3600;        ///< s
};

struct ScenarioSpec {
    GridSpec grid;
    DemandSpec demand;
    std::uint64_t seed = 1;
    int route_replicates = 8; ///< route draws simulated; the lowest mean travel time wins
    int route_choices = 10;   ///< loopless shortest routes per OD pair offered to the truth demand
    double gamma = -0.1;      ///< sharp logit: equal-cost routes share, detours are rare
    SimConfig sim;
};

/// One ground-truth trip. `departure` is in seconds from the start of the period.
struct TruthPlan {
    Index od = -1;
    long departure = 0;
    std::vector<Index> links;
};

struct Scenario {
    Network net;
    std::vector<TruthPlan> plans;    ///< sorted by departure
    std::vector<VectorXd> true_od;   ///< trips per OD pair departing in each frame
    VectorXd nod;                    ///< whole-period OD, normalized
    int frame = 3600;
};

void check_spec(const ScenarioSpec& spec);

/// Grid, random demand, and route assignment by simulation: each replicate draws
/// logit routes for every trip, the whole period is simulated, and the
/// replicate with the smallest mean trip time is kept.
Scenario generate_scenario(const ScenarioSpec& spec);

struct TruthRun {
    std::vector<VectorXd> counts; ///< per frame sensor hits
    FrameState final_state;
    long departures = 0;
    long completed = 0;
    double mean_trip_time = 0.0;  ///< s, with unfinished trips counted up to the period end
};

/// Simulates the plans frame by frame with state handoff.
TruthRun simulate_truth(const Network& net, const std::vector<TruthPlan>& plans, int frame, int frames,
                        const SimConfig& sim = {});

/// Frame-local vehicle plans for frame `t`.
std::vector<VehiclePlan> frame_plans(const std::vector<TruthPlan>& plans, int frame, int t);

} // namespace odcal
