#include <odcal/mesosim.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace odcal {

namespace {

struct LinkParams {
    long travel = 0;     // free-flow time rounded up to whole steps, s
    double capacity = 0; // vehicles per step
    double credit_cap = 1;
    int jam = 1;
    bool signalized = false;
    double cycle = 0;
    double green_start = 0;
    double green_end = 0;

    bool green(long t) const
    {
        if (!signalized)
            return true;
        const double phase = std::fmod(static_cast<double>(t), cycle);
        return phase >= green_start && phase < green_end;
    }
};

std::vector<LinkParams> link_params(const Network& net, const SimConfig& cfg)
{
    std::vector<LinkParams> out(net.links.size());
    for (Index l = 0; l < net.num_links(); ++l) {
        const auto& link = net.links[l];
        auto& p = out[l];
        const double nu = link.length / link.speed_limit;
        p.travel = static_cast<long>(std::ceil(nu / cfg.step - 1e-9)) * cfg.step;
        p.travel = std::max<long>(p.travel, cfg.step);
        p.capacity = cfg.saturation_flow * link.lanes * cfg.step;
        p.credit_cap = std::max(p.capacity, 1.0);
        p.jam = std::max(1, static_cast<int>(std::floor(cfg.jam_density * link.length * link.lanes)));
        const auto& node = net.nodes[net.to_node(l)];
        if (node.signalized && node.signal_spec) {
            for (const auto& a : node.signal_spec->approaches) {
                if (a.link == link.id) {
                    p.signalized = true;
                    p.cycle = node.signal_spec->cycle;
                    p.green_start = a.green_start;
                    p.green_end = a.green_end;
                    break;
                }
            }
        }
    }
    return out;
}

void check_route(const Network& net, const std::vector<Index>& links)
{
    if (links.empty())
        throw Error("simulate_frame: plan with an empty route");
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i] < 0 || links[i] >= net.num_links())
            throw Error("simulate_frame: plan references unknown link " + std::to_string(links[i]));
        if (i > 0 && net.from_node(links[i]) != net.to_node(links[i - 1]))
            throw Error("simulate_frame: plan route is not connected at link " + net.links[links[i]].id);
    }
}

} // namespace

std::size_t FrameState::vehicle_count() const
{
    std::size_t n = 0;
    for (const auto& q : link_queues)
        n += q.size();
    for (const auto& q : entry_queues)
        n += q.size();
    return n;
}

std::vector<int> FrameState::occupancy() const
{
    std::vector<int> occ;
    occ.reserve(link_queues.size());
    for (const auto& q : link_queues)
        occ.push_back(static_cast<int>(q.size()));
    return occ;
}

SimResult simulate_frame(const Network& net, const std::vector<VehiclePlan>& plans, const FrameState& initial,
                         const SimConfig& cfg, int delta)
{
    if (cfg.step <= 0 || !(cfg.saturation_flow > 0) || !(cfg.jam_density > 0))
        throw Error("simulate_frame: step, saturation flow and jam density must be positive");
    if (delta <= 0 || delta % cfg.step != 0)
        throw Error("simulate_frame: frame length must be a positive multiple of the step");
    const Index num_links = net.num_links();
    const bool fresh = initial.link_queues.empty();
    if (!fresh && (static_cast<Index>(initial.link_queues.size()) != num_links ||
                   static_cast<Index>(initial.entry_queues.size()) != num_links ||
                   static_cast<Index>(initial.credits.size()) != num_links))
        throw Error("simulate_frame: initial state does not match the network");
    for (const auto& p : plans) {
        check_route(net, p.links);
        if (p.departure < 0 || p.departure >= delta)
            throw Error("simulate_frame: departure outside the frame");
    }

    const auto params = link_params(net, cfg);
    const VectorXd nu = free_flow_times(net);

    std::vector<std::deque<Vehicle>> queues(num_links);
    std::vector<std::deque<Vehicle>> waiting(num_links);
    std::vector<double> credits(num_links, 0.0);
    long long initial_count = 0;
    if (!fresh) {
        for (Index l = 0; l < num_links; ++l) {
            for (const auto& v : initial.link_queues[l]) {
                check_route(net, v.links);
                queues[l].push_back(v);
            }
            for (const auto& v : initial.entry_queues[l]) {
                check_route(net, v.links);
                waiting[l].push_back(v);
            }
            initial_count += static_cast<long long>(initial.link_queues[l].size() + initial.entry_queues[l].size());
        }
        credits = initial.credits;
    }
    const long clock = initial.clock;
    const std::uint64_t first_new_id = initial.next_vehicle_id;
    std::uint64_t next_id = first_new_id;

    SimResult res;
    res.counts = VectorXd::Zero(net.num_sensors());
    res.carryover_counts = VectorXd::Zero(net.num_sensors());
    res.initial_vehicles = static_cast<long>(initial_count);
    res.departures = static_cast<long>(plans.size());

    VectorXd tt_sum = VectorXd::Zero(num_links);
    Eigen::VectorXi tt_n = Eigen::VectorXi::Zero(num_links);
    // Network speed is vehicle distance over vehicle time inside the frame,
    // counting vehicles that are still queued at its end.
    const long frame_end = clock + delta;
    double dist_sum = 0.0;
    double time_sum = 0.0;
    auto add_link_time = [&](const Vehicle& v, Index l, long until) {
        const long from = std::max(v.entry, clock);
        const double travel = static_cast<double>(params[l].travel);
        const double covered = std::min<double>(until - v.entry, travel) - std::min<double>(from - v.entry, travel);
        dist_sum += net.links[l].length * covered / travel;
        time_sum += static_cast<double>(until - from);
    };
    auto add_wait_time = [&](const Vehicle& v, long until) {
        time_sum += static_cast<double>(until - std::max(v.depart, clock));
    };

    auto record_entry = [&](const Vehicle& v, Index l) {
        const Index k = net.sensor_of_link(l);
        if (k >= 0) {
            res.counts[k] += 1;
            if (v.id < first_new_id)
                res.carryover_counts[k] += 1;
        }
    };
    auto record_exit = [&](const Vehicle& v, Index l, long now) {
        const long tt = now - v.entry;
        tt_sum[l] += static_cast<double>(tt);
        tt_n[l] += 1;
        add_link_time(v, l, now);
        if (cfg.record_events)
            res.events.push_back({v.id, l, v.entry, now});
    };

    // Departures are quantized up to the next step boundary.
    std::vector<std::size_t> order(plans.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return plans[a].departure < plans[b].departure; });
    std::size_t next_plan = 0;

    const long steps = delta / cfg.step;
    auto inject = [&](long upto_offset) {
        while (next_plan < order.size() && plans[order[next_plan]].departure <= upto_offset) {
            const auto& p = plans[order[next_plan]];
            Vehicle v;
            v.id = next_id++;
            v.od = p.od;
            v.links = p.links;
            v.depart = clock + p.departure;
            waiting[p.links.front()].push_back(std::move(v));
            ++next_plan;
        }
    };

    for (long s = 0; s < steps; ++s) {
        const long now = clock + s * cfg.step;
        inject(s * cfg.step);

        for (Index l = 0; l < num_links; ++l) {
            const auto& p = params[l];
            credits[l] = std::min(credits[l] + p.capacity, p.credit_cap);
            auto& q = queues[l];
            while (!q.empty()) {
                Vehicle& head = q.front();
                if (now < head.entry + p.travel)
                    break;
                if (head.pos + 1 == static_cast<int>(head.links.size())) {
                    record_exit(head, l, now);
                    res.completed.push_back({head.id, head.od, head.depart, now});
                    q.pop_front();
                    continue;
                }
                const Index next = head.links[head.pos + 1];
                if (!p.green(now) || credits[l] < 1.0 ||
                    static_cast<int>(queues[next].size()) >= params[next].jam)
                    break;
                credits[l] -= 1.0;
                record_exit(head, l, now);
                Vehicle v = std::move(head);
                q.pop_front();
                v.pos += 1;
                v.entry = now;
                record_entry(v, next);
                queues[next].push_back(std::move(v));
            }
        }

        for (Index l = 0; l < num_links; ++l) {
            auto& w = waiting[l];
            while (!w.empty() && static_cast<int>(queues[l].size()) < params[l].jam) {
                Vehicle v = std::move(w.front());
                w.pop_front();
                add_wait_time(v, now);
                v.pos = 0;
                v.entry = now;
                record_entry(v, l);
                queues[l].push_back(std::move(v));
            }
        }
    }
    // Departures rounded past the frame end wait for the next frame.
    inject(delta);
    for (Index l = 0; l < num_links; ++l) {
        for (const auto& v : queues[l])
            add_link_time(v, l, frame_end);
        for (const auto& v : waiting[l])
            if (v.depart < frame_end)
                add_wait_time(v, frame_end);
    }

    res.tau.resize(num_links);
    for (Index l = 0; l < num_links; ++l) {
        if (tt_n[l] > 0)
            res.tau[l] = tt_sum[l] / tt_n[l];
        else if (initial.tau.size() == num_links)
            res.tau[l] = initial.tau[l];
        else
            res.tau[l] = nu[l];
        res.tau[l] = std::max(res.tau[l], nu[l]);
    }
    if (time_sum > 0)
        res.mean_speed = dist_sum / time_sum;
    else
        res.mean_speed = std::accumulate(net.links.begin(), net.links.end(), 0.0,
                                         [](double a, const Link& l) { return a + l.length; }) /
                         nu.sum();

    auto& st = res.state;
    st.clock = frame_end;
    st.next_vehicle_id = next_id;
    st.link_queues.resize(num_links);
    st.entry_queues.resize(num_links);
    for (Index l = 0; l < num_links; ++l) {
        st.link_queues[l].assign(std::make_move_iterator(queues[l].begin()), std::make_move_iterator(queues[l].end()));
        st.entry_queues[l].assign(std::make_move_iterator(waiting[l].begin()),
                                  std::make_move_iterator(waiting[l].end()));
    }
    st.credits = std::move(credits);
    st.tau = res.tau;
    return res;
}

VectorXd expected_carryover_hits(const FrameState& state, const Network& net)
{
    VectorXd hits = VectorXd::Zero(net.num_sensors());
    auto add_from = [&](const Vehicle& v, std::size_t first) {
        for (std::size_t i = first; i < v.links.size(); ++i) {
            const Index k = net.sensor_of_link(v.links[i]);
            if (k >= 0)
                hits[k] += 1;
        }
    };
    for (const auto& q : state.link_queues)
        for (const auto& v : q)
            add_from(v, static_cast<std::size_t>(v.pos + 1));
    for (const auto& q : state.entry_queues)
        for (const auto& v : q)
            add_from(v, 0);
    return hits;
}

} // namespace odcal
