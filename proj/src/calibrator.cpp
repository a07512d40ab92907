#include <odcal/calibrator.hpp>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <chrono>
#include <iostream>
#include <thread>

namespace odcal {

namespace {

struct Round {
    ErrorRecord record;
    VectorXd prior;
    VectorXd od_estimate;
    VectorXd expected;
    std::vector<RouteFlow> flows;
    SimResult best;
    VectorXd tau_out;
    bool bvls_converged = true;
};

std::vector<SimResult> simulate_replicates(const Network& net, const std::vector<RouteFlow>& flows,
                                           const FrameState& initial, const CalibConfig& cfg,
                                           std::uint64_t seed)
{
    const int n = cfg.replicates;
    std::vector<SimResult> out(static_cast<std::size_t>(n));
    auto job = [&](int r) {
        const auto plans = sample_plans(flows, cfg.delta, replicate_seed(seed, r));
        out[static_cast<std::size_t>(r)] = simulate_frame(net, plans, initial, cfg.sim, cfg.delta);
    };
    int jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::clamp(jobs, 1, n);
    if (jobs == 1) {
        for (int r = 0; r < n; ++r)
            job(r);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (int r = next++; r < n; r = next++) {
                try {
                    job(r);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers)
        w.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

} // namespace

void check_config(const CalibConfig& cfg)
{
    if (cfg.delta <= 0 || !(cfg.lambda > 0) || cfg.rho < 1 || cfg.replicates < 1 || cfg.max_iterations < 1 ||
        !(cfg.epsilon_exit >= 0) || !(cfg.fp.d > 1) || !(cfg.bounds.u_factor > 0) || !(cfg.bounds.u_floor > 0))
        throw Error("invalid calibration config: delta, lambda, rho, replicates, max_iterations, u_factor and "
                    "u_floor must be positive, d > 1");
}

int select_best(const std::vector<SimResult>& results, const VectorXd& observed)
{
    if (results.empty())
        throw Error("select_best: no simulation results");
    int best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const double e = rel_error_or_zero(observed, new_trip_counts(results[i]));
        if (e < best_err) {
            best_err = e;
            best = static_cast<int>(i);
        }
    }
    return best;
}

VectorXd correct_counts(const VectorXd& raw_counts_next, const VectorXd& carryover_hits)
{
    if (raw_counts_next.size() != carryover_hits.size())
        throw Error("correct_counts: sensor vectors differ in length");
    return (raw_counts_next - carryover_hits).cwiseMax(0.0);
}

FrameResult run_frame(const Network& net, RouteDb& db, const VectorXd& nod, const VectorXd& counts,
                      const FrameState& prev_state, const VectorXd& prev_tau, const CalibConfig& cfg, int frame)
{
    check_config(cfg);
    if (nod.size() != net.num_od_pairs() || counts.size() != net.num_sensors())
        throw Error("run_frame: NOD or count vector does not match the network");
    if (db.num_od_pairs() != net.num_od_pairs())
        throw Error("run_frame: route database does not match the network");
    const auto started = std::chrono::steady_clock::now();

    const VectorXd nu = free_flow_times(net);
    const VectorXd start_tau = prev_tau.size() == nu.size() ? clamp_map(prev_tau, nu, cfg.fp.d) : nu;
    const double tol = cfg.bvls.tol * std::max(1.0, counts.lpNorm<Eigen::Infinity>());

    std::optional<Round> best;
    std::vector<ErrorRecord> records;
    bool stop = false;
    bool met_exit = false;
    bool all_converged = true;

    auto round = [&](const VectorXd& tau_in) -> VectorXd {
        const int iteration = static_cast<int>(records.size());
        Round r;
        const auto costs = all_route_costs(db, net, tau_in);
        const auto a = build_assignment(db, costs, net.num_sensors(), cfg.gamma, cfg.delta);
        r.prior = seed_od(nod, a, counts);
        const auto sys = make_stacked_system(a.alpha.transpose(), counts, r.prior, cfg.lambda, cfg.bounds);
        auto sol = solve(sys, BvlsOptions{tol, cfg.bvls.max_iter});
        r.bvls_converged = sol.converged;
        all_converged = all_converged && sol.converged;
        r.od_estimate = std::move(sol.x);
        r.expected = expected_counts(a, r.od_estimate);
        r.flows = route_flows(r.od_estimate, a, db);

        const std::uint64_t seed =
            mix_seed(cfg.base_seed ^ mix_seed((static_cast<std::uint64_t>(frame) << 32) | static_cast<std::uint32_t>(iteration)));
        auto sims = simulate_replicates(net, r.flows, prev_state, cfg, seed);
        const int pick = select_best(sims, counts);
        r.best = std::move(sims[static_cast<std::size_t>(pick)]);
        const VectorXd simulated = new_trip_counts(r.best);
        r.tau_out = clamp_map(r.best.tau, nu, cfg.fp.d);

        r.record.iteration = iteration;
        r.record.od_cal_err = rel_error_or_zero(counts, r.expected);
        r.record.cal_to_sim_err = rel_error_or_zero(r.expected, simulated);
        r.record.iter_err = rel_error_or_zero(counts, simulated);
        r.record.fp_err = rel_error(tau_in, r.tau_out);
        r.record.mean_speed = r.best.mean_speed;
        records.push_back(r.record);

        for (Index m = 0; m < net.num_od_pairs(); ++m)
            add_best_new_route(db, net, r.tau_out, m, cfg.scan_limit);

        if (r.record.iter_err <= cfg.epsilon_exit)
            met_exit = true;
        stop = met_exit || static_cast<int>(records.size()) >= cfg.max_iterations;
        VectorXd out = r.tau_out;
        if (!best || r.record.iter_err < best->record.iter_err)
            best = std::move(r);
        return out;
    };

    VectorXd tau0 = start_tau;
    while (!stop) {
        const VectorXd tau1 = round(tau0);
        if (stop)
            break;
        const VectorXd tau2 = round(tau1);
        if (stop)
            break;
        tau0 = steffensen_step<double>(tau0, tau1, tau2, nu, cfg.fp);
    }

    FrameResult out;
    auto& o = out.output;
    o.frame = frame;
    o.observed = counts;
    o.prior = std::move(best->prior);
    o.od_estimate = std::move(best->od_estimate);
    o.expected_counts = std::move(best->expected);
    o.route_flows = std::move(best->flows);
    o.best_iteration = best->record.iteration;
    o.records = std::move(records);
    o.met_exit = met_exit;
    o.bvls_converged = all_converged;
    out.next_tau = best->tau_out;
    out.next_state = save_state(best->best);
    o.best = std::move(best->best);

    const long frame_start = prev_state.clock;
    for (const auto& q : out.next_state.link_queues)
        for (const auto& v : q)
            o.long_trips += v.depart < frame_start ? 1 : 0;
    for (const auto& q : out.next_state.entry_queues)
        for (const auto& v : q)
            o.long_trips += v.depart < frame_start ? 1 : 0;
    if (o.long_trips > 0)
        std::clog << "odcal: frame " << frame << ": " << o.long_trips
                  << " trip(s) span more than two frames; trips are assumed to finish within one frame length\n";
    o.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

SequentialCalibrator::SequentialCalibrator(const Network& net, VectorXd nod, CalibConfig cfg)
    : net_(net), nod_(std::move(nod)), cfg_(std::move(cfg))
{
    check_config(cfg_);
    if (nod_.size() != net_.num_od_pairs())
        throw Error("SequentialCalibrator: NOD vector does not match the network");
    tau_ = free_flow_times(net_);
    db_ = init_shortest_paths(net_, tau_, cfg_.rho);
}

FrameOutput SequentialCalibrator::push(int frame, const VectorXd& raw_counts)
{
    if (frame != next_frame_)
        throw Error("frame " + std::to_string(frame) + " received out of order; expected frame " +
                    std::to_string(next_frame_));
    if (raw_counts.size() != net_.num_sensors())
        throw Error("frame " + std::to_string(frame) + ": count vector does not match the sensor list");
    const VectorXd corrected = correct_counts(raw_counts, expected_carryover_hits(state_, net_));
    auto result = run_frame(net_, db_, nod_, corrected, state_, tau_, cfg_, frame);
    result.output.raw_counts = raw_counts;
    state_ = std::move(result.next_state);
    tau_ = std::move(result.next_tau);
    ++next_frame_;
    return std::move(result.output);
}

std::vector<FrameOutput> run_sequence(const Network& net, const VectorXd& nod,
                                      const std::vector<VectorXd>& count_stream, const CalibConfig& cfg,
                                      const std::function<void(const FrameOutput&)>& on_frame)
{
    SequentialCalibrator calib(net, nod, cfg);
    std::vector<FrameOutput> out;
    for (std::size_t t = 0; t < count_stream.size(); ++t) {
        out.push_back(calib.push(static_cast<int>(t), count_stream[t]));
        if (on_frame)
            on_frame(out.back());
    }
    return out;
}

} // namespace odcal
