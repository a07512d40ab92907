#pragma once

#include <odcal/bvls.hpp>
#include <odcal/fixedpoint.hpp>
#include <odcal/mesosim.hpp>
#include <odcal/metrics.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace odcal {

struct CalibConfig {
    int delta = 3600;            ///< frame length, s
    double lambda = 1.0;         ///< weight of the seed OD in the stacked system
    double gamma = -0.05;        ///< logit dispersion, 1/s
    int rho = 10;                ///< routes per OD pair
    int replicates = 8;          ///< sampled simulations per round
    int max_iterations = 40;     ///< calibrate-and-simulate rounds per frame
    double epsilon_exit = 10.0;  ///< stop once the iteration error (percent) is at or below this
    FpConfig fp;                 ///< clamp multiplier and Aitken safeguard
    std::uint64_t base_seed = 1;
    BoundsConfig bounds;
    SimConfig sim;
    BvlsOptions bvls{1e-9, -1};  ///< tol is relative to max(1, |counts|_inf)
    int jobs = 0;                ///< replicate threads; 0 uses the hardware concurrency
    int scan_limit = -1;         ///< route candidates scanned per OD pair; default 2 * rho
};

void check_config(const CalibConfig& cfg);

struct FrameOutput {
    int frame = 0;
    VectorXd raw_counts;       ///< observed counts as received
    VectorXd observed;         ///< counts after removing carryover hits
    VectorXd prior;            ///< seed OD of the best iteration
    VectorXd od_estimate;      ///< X* of the best iteration
    VectorXd expected_counts;  ///< A X* of the best iteration
    std::vector<RouteFlow> route_flows;
    SimResult best;            ///< best replicate of the best iteration
    std::vector<ErrorRecord> records;
    int best_iteration = 0;
    bool met_exit = false;
    bool bvls_converged = true;
    long long_trips = 0;       ///< carried-over vehicles that departed before this frame
    double wall_seconds = 0.0;

    /// Sensor hits of trips that started in this frame.
    VectorXd simulated_new() const { return best.counts - best.carryover_counts; }
    const ErrorRecord& best_record() const { return records.at(static_cast<std::size_t>(best_iteration)); }
};

/// Hits made by trips injected during the frame, i.e. excluding carried-over vehicles.
inline VectorXd new_trip_counts(const SimResult& r) { return r.counts - r.carryover_counts; }

/// Replicate whose new-trip counts have the smallest relative error against
/// `observed`; ties go to the lowest index.
int select_best(const std::vector<SimResult>& results, const VectorXd& observed);

/// Observed counts minus the hits expected from carried-over vehicles, floored at zero.
VectorXd correct_counts(const VectorXd& raw_counts_next, const VectorXd& carryover_hits);

struct FrameResult {
    FrameOutput output;
    FrameState next_state;
    VectorXd next_tau;
};

/// Calibrates one frame.
///
/// Rounds run in pairs as the two map evaluations of a Steffensen step on the
/// link travel times. Each round recomputes route costs, builds the assignment
/// matrix, scales the seed, solves the bounded least-squares problem, samples
/// and simulates `replicates` plan sets, keeps the best replicate and grows the
/// route sets. The round with the smallest iteration error is reported and its
/// simulator state is handed to the next frame. `counts` must already be
/// corrected for carryover.
FrameResult run_frame(const Network& net, RouteDb& db, const VectorXd& nod, const VectorXd& counts,
                      const FrameState& prev_state, const VectorXd& prev_tau, const CalibConfig& cfg,
                      int frame = 0);

/// Streaming driver: frames must be pushed in order 0, 1, 2, ...
class SequentialCalibrator {
public:
    SequentialCalibrator(const Network& net, VectorXd nod, CalibConfig cfg);

    /// Corrects `raw_counts` for the previous frame's carryover, calibrates the
    /// frame and returns its final output.
    FrameOutput push(int frame, const VectorXd& raw_counts);

    int next_frame() const { return next_frame_; }
    const FrameState& state() const { return state_; }
    const VectorXd& tau() const { return tau_; }
    const RouteDb& route_db() const { return db_; }

private:
    const Network& net_;
    VectorXd nod_;
    CalibConfig cfg_;
    RouteDb db_;
    FrameState state_;
    VectorXd tau_;
    int next_frame_ = 0;
};

std::vector<FrameOutput> run_sequence(const Network& net, const VectorXd& nod,
                                      const std::vector<VectorXd>& count_stream, const CalibConfig& cfg,
                                      const std::function<void(const FrameOutput&)>& on_frame = {});

} // namespace odcal
