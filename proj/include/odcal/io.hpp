#pragma once

#include <odcal/calibrator.hpp>
#include <odcal/scenario.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace odcal::io {

namespace fs = std::filesystem;

// Network document, format tag "odcal-net-1".
Network read_network(const fs::path& path);
void write_network(const fs::path& path, const Network& net);
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

struct NodFile {
    VectorXd weights;         ///< normalized, indexed by OD pair
    double raw_total = 0.0;   ///< sum before normalization
    bool renormalized = false;
};

/// Rows `origin_node,destination_node,weight`; unlisted pairs get weight 0.
/// Weights not summing to 1 are renormalized with a warning on stderr.
NodFile read_nod(const fs::path& path, const Network& net);
void write_nod(const fs::path& path, const Network& net, const VectorXd& nod);

/// Rows `sensor_link_id,count`; every sensor must be listed.
VectorXd read_counts(const fs::path& path, const Network& net);
void write_counts(const fs::path& path, const Network& net, const VectorXd& counts);
fs::path counts_file(const fs::path& dir, int frame);

/// Line-delimited count stream of `frame,sensor_link_id,count` records.
/// A `frame,END` record closes a frame.
class CountStreamReader {
public:
    CountStreamReader(std::istream& in, const Network& net);
    /// Next complete frame, or false at end of input. Throws on frames out of
    /// order, a frame left open at end of input, or missing sensors.
    bool next(int& frame, VectorXd& counts);

private:
    std::istream& in_;
    const Network& net_;
    int expected_ = 0;
    int line_ = 0;
};

/// Rows `o,d,trips`.
void write_od_table(const fs::path& path, const Network& net, const VectorXd& od);
VectorXd read_od_table(const fs::path& path, const Network& net);

/// Ground-truth plans: `origin,destination,departure,links` with space-separated link ids.
void write_truth_plans(const fs::path& path, const Network& net, const std::vector<TruthPlan>& plans);
std::vector<TruthPlan> read_truth_plans(const fs::path& path, const Network& net);

/// Debug dump of sampled plans: `route_id,departure_second`.
void write_plan_dump(const fs::path& path, const std::vector<VehiclePlan>& plans);

// Simulator state, format tag "odcal-state-1".
std::string state_to_json(const FrameState& state);
FrameState state_from_json(const std::string& text);
void write_state(const fs::path& path, const FrameState& state);
FrameState read_state(const fs::path& path);

/// Route sets as link-id sequences per OD pair.
std::string route_db_to_json(const RouteDb& db, const Network& net);

void write_route_flows(const fs::path& path, const Network& net, const std::vector<RouteFlow>& flows);
/// Rows `iteration,od_cal_err,cal_to_sim_err,iter_err,fp_err,mean_speed`.
void write_error_records(const fs::path& path, const std::vector<ErrorRecord>& records);
std::vector<ErrorRecord> read_error_records(const fs::path& path);
/// Rows `sensor_link_id,observed,corrected,expected,simulated`.
void write_count_comparison(const fs::path& path, const Network& net, const FrameOutput& out);
/// Rows `link_id,tau`.
void write_tau(const fs::path& path, const Network& net, const VectorXd& tau);
/// Rows `iteration,fixed_point_error`.
void write_fp_trace(const fs::path& path, const std::vector<ErrorRecord>& records);

struct SummaryRow {
    int time_frame = 0;
    double real_count = 0;
    double estimated_count = 0;
    double od_eps = 0;
    double od_rmse = 0;
    double od_nrmse = 0;
    double sensor_eps = 0;
    double sensor_rmse = 0;
    double sensor_nrmse = 0;
};

/// Rows `time_frame,real_count,estimated_count,od_eps,od_rmse,od_nrmse,sensor_eps,sensor_rmse,sensor_nrmse`.
void write_summary(const fs::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary(const fs::path& path);

/// Labelled 5 x 5 correlation table; NaN entries are written as `NA`.
void write_correlation(const fs::path& path, const MatrixXd& corr);

/// Flat `key = value` document; `#` starts a comment.
std::map<std::string, std::string> read_key_values(const fs::path& path);
/// Applies known keys to `cfg`; throws on an unknown key or a malformed value.
void apply_config(CalibConfig& cfg, const std::map<std::string, std::string>& kv);

/// Any comma-separated report written by this tool, as text cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    Index column_index(const std::string& name) const;
    /// Numeric column; "NA" cells read as NaN.
    VectorXd column(const std::string& name) const;
};

CsvTable read_csv(const fs::path& path);

std::vector<std::string> split(const std::string& line, char sep);
std::string trim(const std::string& s);

} // namespace odcal::io
