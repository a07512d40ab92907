#include <odcal/scenario.hpp>

#include <odcal/assignment.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

namespace odcal {

void check_spec(const ScenarioSpec& spec)
{
    const auto& d = spec.demand;
    if (d.min < 0 || d.max < d.min)
        throw Error("scenario: demand range must satisfy 0 <= min <= max");
    if (d.frame <= 0 || d.duration <= 0 || d.duration % d.frame != 0)
        throw Error("scenario: duration must be a positive multiple of the frame length");
    if (spec.route_replicates < 1 || spec.route_choices < 1)
        throw Error("scenario: route replicates and choices must be positive");
}

std::vector<VehiclePlan> frame_plans(const std::vector<TruthPlan>& plans, int frame, int t)
{
    std::vector<VehiclePlan> out;
    const long lo = static_cast<long>(t) * frame;
    const long hi = lo + frame;
    for (const auto& p : plans)
        if (p.departure >= lo && p.departure < hi)
            out.push_back({p.od, -1, static_cast<int>(p.departure - lo), p.links});
    return out;
}

TruthRun simulate_truth(const Network& net, const std::vector<TruthPlan>& plans, int frame, int frames,
                        const SimConfig& sim)
{
    if (frame <= 0 || frames < 1)
        throw Error("simulate_truth: frame length and count must be positive");
    TruthRun run;
    FrameState state;
    double total_time = 0.0;
    for (int t = 0; t < frames; ++t) {
        const auto fp = frame_plans(plans, frame, t);
        auto res = simulate_frame(net, fp, state, sim, frame);
        run.departures += res.departures;
        run.completed += static_cast<long>(res.completed.size());
        for (const auto& trip : res.completed)
            total_time += static_cast<double>(trip.arrive - trip.depart);
        run.counts.push_back(res.counts);
        state = save_state(res);
    }
    for (const auto* queues : {&state.link_queues, &state.entry_queues})
        for (const auto& q : *queues)
            for (const auto& v : q)
                total_time += static_cast<double>(state.clock - v.depart);
    run.mean_trip_time = run.departures > 0 ? total_time / run.departures : 0.0;
    run.final_state = std::move(state);
    return run;
}

Scenario generate_scenario(const ScenarioSpec& spec)
{
    check_spec(spec);
    Scenario sc;
    sc.net = generate_grid(spec.grid);
    sc.frame = spec.demand.frame;
    const Network& net = sc.net;
    const Index num_od = net.num_od_pairs();
    const int frames = spec.demand.duration / spec.demand.frame;

    std::mt19937_64 rng(mix_seed(spec.seed));
    std::vector<std::pair<Index, long>> trips;
    for (Index m = 0; m < num_od; ++m) {
        long n = 0;
        if (spec.demand.mode == DemandMode::count) {
            std::uniform_int_distribution<long> count(static_cast<long>(std::ceil(spec.demand.min)),
                                                      static_cast<long>(std::floor(spec.demand.max)));
            n = count(rng);
        } else {
            std::uniform_real_distribution<double> rate(spec.demand.min, spec.demand.max);
            const double mean = rate(rng) * spec.demand.duration / 3600.0;
            if (mean > 0)
                n = std::poisson_distribution<long>(mean)(rng);
        }
        std::uniform_int_distribution<long> when(0, spec.demand.duration - 1);
        for (long i = 0; i < n; ++i)
            trips.emplace_back(m, when(rng));
    }
    std::sort(trips.begin(), trips.end(),
              [](const auto& a, const auto& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });

    sc.true_od.assign(static_cast<std::size_t>(frames), VectorXd::Zero(num_od));
    VectorXd total = VectorXd::Zero(num_od);
    for (const auto& [m, dep] : trips) {
        sc.true_od[static_cast<std::size_t>(dep / spec.demand.frame)][m] += 1;
        total[m] += 1;
    }
    sc.nod = total.sum() > 0 ? VectorXd(total / total.sum()) : VectorXd::Constant(num_od, 1.0 / num_od);

    // Route choice sets under free flow.
    const VectorXd nu = free_flow_times(net);
    std::vector<std::vector<std::vector<Index>>> choices(static_cast<std::size_t>(num_od));
    std::vector<std::discrete_distribution<int>> pick(static_cast<std::size_t>(num_od));
    for (Index m = 0; m < num_od; ++m) {
        auto [o, d] = net.od_nodes(m);
        PathEnumerator paths(net, nu, o, d);
        std::vector<double> costs;
        for (int k = 0; k < spec.route_choices; ++k) {
            auto p = paths.next();
            if (!p)
                break;
            costs.push_back(path_cost(*p, nu));
            choices[m].push_back(std::move(*p));
        }
        if (choices[m].empty())
            throw Error("scenario: od pair " + std::to_string(m) + " is unreachable");
        const VectorXd probs = logit_probs(costs, spec.gamma);
        pick[m] = std::discrete_distribution<int>(probs.data(), probs.data() + probs.size());
    }

    double best_time = std::numeric_limits<double>::infinity();
    for (int r = 0; r < spec.route_replicates; ++r) {
        std::mt19937_64 route_rng(mix_seed(spec.seed ^ mix_seed(0x5eed0000ULL + static_cast<std::uint64_t>(r))));
        std::vector<TruthPlan> plans;
        plans.reserve(trips.size());
        for (const auto& [m, dep] : trips)
            plans.push_back({m, dep, choices[m][static_cast<std::size_t>(pick[m](route_rng))]});
        const auto run = simulate_truth(net, plans, spec.demand.frame, frames, spec.sim);
        if (run.mean_trip_time < best_time) {
            best_time = run.mean_trip_time;
            sc.plans = std::move(plans);
        }
    }
    return sc;
}

} // namespace odcal
