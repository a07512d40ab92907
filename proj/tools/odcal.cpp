#include <odcal/io.hpp>
#include <odcal/metrics.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <limits>

namespace fs = std::filesystem;
using namespace odcal;

namespace {

// Config keys that can also be given as --flags (underscores become hyphens).
const std::vector<std::string> kConfigKeys = {
    "delta",     "lambda",          "gamma",           "rho",         "replicates", "max_iter",
    "eps_exit",  "seed",            "d",               "denom_epsilon", "u_factor", "u_floor",
    "step",      "saturation_flow", "jam_density",     "jobs",        "bvls_tol",   "scan_limit"};

std::string flag_name(std::string key)
{
    for (auto& c : key)
        if (c == '_')
            c = '-';
    return "--" + key;
}

fs::path frame_dir(const fs::path& out, int t) { return out / ("frame_" + std::to_string(t)); }

fs::path true_od_file(const fs::path& dir, int t) { return dir / ("true_od_" + std::to_string(t) + ".csv"); }

template <typename F>
double or_nan(F&& f)
{
    try {
        return f();
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

struct GenerateArgs {
    ScenarioSpec spec;
    std::string mode = "count";
    std::string poi = "all";
    fs::path out_dir;
};

void cmd_generate(GenerateArgs a)
{
    a.spec.demand.mode = a.mode == "rate" ? DemandMode::rate : DemandMode::count;
    a.spec.grid.poi = a.poi == "ring" ? PoiSelector::ring_pattern : PoiSelector::all_nodes;
    const Scenario sc = generate_scenario(a.spec);
    io::write_network(a.out_dir / "network.json", sc.net);
    io::write_nod(a.out_dir / "nod.csv", sc.net, sc.nod);
    io::write_truth_plans(a.out_dir / "plans.csv", sc.net, sc.plans);
    double total = 0;
    for (std::size_t t = 0; t < sc.true_od.size(); ++t) {
        io::write_od_table(true_od_file(a.out_dir, static_cast<int>(t)), sc.net, sc.true_od[t]);
        total += sc.true_od[t].sum();
    }
    std::cout << "generated " << sc.net.num_links() << " links, " << sc.net.num_od_pairs() << " od pairs, "
              << total << " trips in " << sc.true_od.size() << " frames\n";
}

struct TruthArgs {
    fs::path network, plans, out_dir;
    int frame_length = 3600;
    int frames = 0;
    SimConfig sim;
};

void cmd_truth(const TruthArgs& a)
{
    const Network net = io::read_network(a.network);
    require_valid(net);
    const auto plans = io::read_truth_plans(a.plans, net);
    int frames = a.frames;
    if (frames <= 0) {
        long last = plans.empty() ? 0 : plans.back().departure;
        frames = static_cast<int>(last / a.frame_length) + 1;
    }
    const TruthRun run = simulate_truth(net, plans, a.frame_length, frames, a.sim);
    for (int t = 0; t < frames; ++t)
        io::write_counts(io::counts_file(a.out_dir, t), net, run.counts[static_cast<std::size_t>(t)]);
    io::write_state(a.out_dir / "truth_state.json", run.final_state);
    std::cout << "simulated " << run.departures << " trips over " << frames << " frames, " << run.completed
              << " completed, mean trip time " << run.mean_trip_time << " s\n";
}

struct CalibrateArgs {
    fs::path network, nod, counts, config, out_dir;
    int frames = 0;
    std::map<std::string, std::string> flags;
};

void write_frame(const fs::path& out, const Network& net, const FrameOutput& o)
{
    const fs::path dir = frame_dir(out, o.frame);
    io::write_od_table(dir / "od_estimate.csv", net, o.od_estimate);
    io::write_od_table(dir / "prior.csv", net, o.prior);
    io::write_count_comparison(dir / "counts.csv", net, o);
    io::write_route_flows(dir / "route_flows.csv", net, o.route_flows);
    io::write_error_records(dir / "errors.csv", o.records);
    io::write_fp_trace(dir / "fp_trace.csv", o.records);
    io::write_tau(dir / "tau.csv", net, o.best.tau);
    io::write_state(dir / "state.json", o.best.state);
}

int cmd_calibrate(const CalibrateArgs& a)
{
    const Network net = io::read_network(a.network);
    require_valid(net);
    const io::NodFile nod = io::read_nod(a.nod, net);
    CalibConfig cfg;
    if (!a.config.empty())
        io::apply_config(cfg, io::read_key_values(a.config));
    io::apply_config(cfg, a.flags);
    check_config(cfg);

    SequentialCalibrator cal(net, nod.weights, cfg);
    std::vector<FrameOutput> outputs;
    auto run = [&](int t, const VectorXd& counts) {
        FrameOutput o = cal.push(t, counts);
        write_frame(a.out_dir, net, o);
        const auto& r = o.best_record();
        std::cout << "frame " << t << ": best iteration " << o.best_iteration << " of " << o.records.size()
                  << ", iter_err " << r.iter_err << "%, estimated trips " << o.od_estimate.sum() << ", "
                  << o.wall_seconds << " s\n";
        outputs.push_back(std::move(o));
    };

    if (a.counts == "-") {
        io::CountStreamReader reader(std::cin, net);
        int t = 0;
        VectorXd c;
        while ((a.frames <= 0 || t < a.frames) && reader.next(t, c))
            run(t++, c);
        if (a.frames > 0 && t < a.frames)
            throw Error("count stream ended before frame " + std::to_string(t));
    } else {
        for (int t = 0; a.frames <= 0 || t < a.frames; ++t) {
            const fs::path f = io::counts_file(a.counts, t);
            if (!fs::exists(f)) {
                if (a.frames > 0 || t == 0)
                    throw Error("missing counts file for frame " + std::to_string(t) + ": " + f.string());
                break;
            }
            run(t, io::read_counts(f, net));
        }
    }

    std::ofstream cal_csv(a.out_dir / "calibration.csv");
    cal_csv << std::setprecision(17)
            << "time_frame,estimated_count,sensor_eps,sensor_rmse,sensor_nrmse,best_iteration,iterations,met_exit,"
               "bvls_converged,wall_seconds\n";
    std::vector<ErrorRecord> pooled;
    bool clean = true;
    for (const auto& o : outputs) {
        const VectorXd& obs = o.raw_counts;
        const VectorXd& sim = o.best.counts;
        cal_csv << o.frame << ',' << o.od_estimate.sum() << ',' << or_nan([&] { return rel_error_or_zero(obs, sim); })
                << ',' << rmse(obs, sim) << ',' << or_nan([&] { return nrmse(obs, sim); }) << ','
                << o.best_iteration << ',' << o.records.size() << ',' << o.met_exit << ',' << o.bvls_converged
                << ',' << o.wall_seconds << '\n';
        clean = clean && o.bvls_converged;
        pooled.insert(pooled.end(), o.records.begin(), o.records.end());
    }
    if (pooled.size() >= 3)
        io::write_correlation(a.out_dir / "correlation.csv", covariance_report(pooled));
    std::ofstream(a.out_dir / "routes.json") << io::route_db_to_json(cal.route_db(), net) << '\n';
    if (!clean) {
        std::clog << "odcal: the bounded least-squares solver hit its iteration cap in at least one frame\n";
        return 3;
    }
    return 0;
}

struct MetricsArgs {
    fs::path network, truth, calib, out_dir;
};

void cmd_metrics(MetricsArgs a)
{
    if (a.out_dir.empty())
        a.out_dir = a.calib;
    const Network net = io::read_network(a.network);
    std::vector<io::SummaryRow> rows;
    std::vector<ErrorRecord> pooled;
    for (int t = 0; fs::exists(frame_dir(a.calib, t)); ++t) {
        const fs::path truth_file = true_od_file(a.truth, t);
        if (!fs::exists(truth_file))
            throw Error("missing true OD file for frame " + std::to_string(t) + ": " + truth_file.string());
        const VectorXd truth = io::read_od_table(truth_file, net);
        const VectorXd est = io::read_od_table(frame_dir(a.calib, t) / "od_estimate.csv", net);
        const io::CsvTable counts = io::read_csv(frame_dir(a.calib, t) / "counts.csv");
        const VectorXd obs = counts.column("observed");
        const VectorXd sim = counts.column("simulated");
        io::SummaryRow r;
        r.time_frame = t;
        r.real_count = truth.sum();
        r.estimated_count = est.sum();
        r.od_eps = or_nan([&] { return rel_error_or_zero(truth, est); });
        r.od_rmse = rmse(truth, est);
        r.od_nrmse = or_nan([&] { return nrmse(truth, est); });
        r.sensor_eps = or_nan([&] { return rel_error_or_zero(obs, sim); });
        r.sensor_rmse = rmse(obs, sim);
        r.sensor_nrmse = or_nan([&] { return nrmse(obs, sim); });
        rows.push_back(r);
        const auto recs = io::read_error_records(frame_dir(a.calib, t) / "errors.csv");
        pooled.insert(pooled.end(), recs.begin(), recs.end());
    }
    if (rows.empty())
        throw Error("no frame_<t> directories in " + a.calib.string());
    io::write_summary(a.out_dir / "summary.csv", rows);
    if (pooled.size() >= 3)
        io::write_correlation(a.out_dir / "correlation.csv", covariance_report(pooled));
    std::cout << "frame  real  estimated  od_eps%  sensor_eps%\n";
    for (const auto& r : rows)
        std::cout << r.time_frame << "  " << r.real_count << "  " << r.estimated_count << "  " << r.od_eps << "  "
                  << r.sensor_eps << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamic OD demand calibration from streaming link counts"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Synthesize a grid network, demand and ground-truth routes");
    g->add_option("--seed", gen.spec.seed, "Random seed");
    g->add_option("--rows", gen.spec.grid.rows, "Grid rows");
    g->add_option("--cols", gen.spec.grid.cols, "Grid columns");
    g->add_option("--link-length", gen.spec.grid.link_length, "Link length, m");
    g->add_option("--lanes", gen.spec.grid.lanes, "Lanes per link");
    g->add_option("--poi", gen.poi, "OD endpoints: all or ring")->check(CLI::IsMember({"all", "ring"}));
    g->add_option("--mode", gen.mode, "Demand mode: count or rate")->check(CLI::IsMember({"count", "rate"}));
    g->add_option("--min", gen.spec.demand.min, "Lower end of the per-OD demand range");
    g->add_option("--max", gen.spec.demand.max, "Upper end of the per-OD demand range");
    g->add_option("--duration", gen.spec.demand.duration, "Demand period, s");
    g->add_option("--frame-length", gen.spec.demand.frame, "Frame length, s");
    g->add_option("--route-replicates", gen.spec.route_replicates, "Route draws for the ground truth");
    g->add_option("--gamma", gen.spec.gamma, "Logit dispersion for ground-truth routes, 1/s");
    g->add_option("--out-dir", gen.out_dir, "Output directory")->required();

    TruthArgs tr;
    auto* t = app.add_subcommand("truth", "Simulate ground-truth plans into per-frame sensor counts");
    t->add_option("--network", tr.network, "Network file")->required()->check(CLI::ExistingFile);
    t->add_option("--plans", tr.plans, "Ground-truth plans file")->required()->check(CLI::ExistingFile);
    t->add_option("--frame-length", tr.frame_length, "Frame length, s");
    t->add_option("--frames", tr.frames, "Number of frames (default: up to the last departure)");
    t->add_option("--out-dir", tr.out_dir, "Output directory")->required();

    CalibrateArgs ca;
    std::map<std::string, std::string> flag_values;
    auto* c = app.add_subcommand("calibrate", "Calibrate OD demand frame by frame");
    c->add_option("--network", ca.network, "Network file")->required()->check(CLI::ExistingFile);
    c->add_option("--nod", ca.nod, "Normalized OD file")->required()->check(CLI::ExistingFile);
    c->add_option("--counts", ca.counts, "Directory of counts_<t>.csv files, or - for a stream on stdin")
        ->required();
    c->add_option("--config", ca.config, "key = value configuration file")->check(CLI::ExistingFile);
    c->add_option("--frames", ca.frames, "Calibrate only the first N frames");
    c->add_option("--out-dir", ca.out_dir, "Output directory")->required();
    for (const auto& key : kConfigKeys)
        c->add_option(flag_name(key), flag_values[key], "Overrides config key " + key);

    MetricsArgs me;
    auto* m = app.add_subcommand("metrics", "Summary table and error correlations against the ground truth");
    m->add_option("--network", me.network, "Network file")->required()->check(CLI::ExistingFile);
    m->add_option("--truth", me.truth, "Directory with true_od_<t>.csv")->required();
    m->add_option("--calib", me.calib, "Calibration output directory")->required();
    m->add_option("--out-dir", me.out_dir, "Output directory (default: the calibration directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*g) {
            cmd_generate(gen);
        } else if (*t) {
            cmd_truth(tr);
        } else if (*c) {
            for (const auto& key : kConfigKeys)
                if (c->count(flag_name(key)) > 0)
                    ca.flags[key] = flag_values[key];
            fs::create_directories(ca.out_dir);
            return cmd_calibrate(ca);
        } else if (*m) {
            cmd_metrics(me);
        }
    } catch (const std::exception& e) {
        std::cerr << "odcal: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
