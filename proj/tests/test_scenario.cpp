#include "support.hpp"

using namespace odcal;

TEST_CASE("4x4 protocol total lies in the possible range")
{
    ScenarioSpec spec;
    spec.route_replicates = 1;
    const Scenario sc = generate_scenario(spec);
    double total = 0;
    for (const auto& od : sc.true_od)
        total += od.sum();
    CHECK(sc.true_od.size() == 4);
    CHECK(total >= 48000);
    CHECK(total <= 84000);
    CHECK(total == static_cast<double>(sc.plans.size()));
    CHECK(sc.nod.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero demand gives a uniform NOD")
{
    ScenarioSpec spec;
    spec.grid.rows = spec.grid.cols = 2;
    spec.demand.min = spec.demand.max = 0;
    const Scenario sc = generate_scenario(spec);
    CHECK(sc.plans.empty());
    CHECK((sc.nod.array() == 1.0 / 12).all());
}

TEST_CASE("scenario generation is deterministic")
{
    ScenarioSpec spec;
    spec.grid.rows = spec.grid.cols = 3;
    spec.demand.min = 2;
    spec.demand.max = 6;
    spec.route_replicates = 3;
    const Scenario a = generate_scenario(spec);
    const Scenario b = generate_scenario(spec);
    REQUIRE(a.plans.size() == b.plans.size());
    for (std::size_t i = 0; i < a.plans.size(); ++i) {
        CHECK(a.plans[i].departure == b.plans[i].departure);
        CHECK(a.plans[i].links == b.plans[i].links);
    }
    spec.seed = 2;
    const Scenario c = generate_scenario(spec);
    CHECK(c.nod != a.nod);
}

TEST_CASE("rate mode draws Poisson trips at the hourly rate")
{
    ScenarioSpec spec;
    spec.grid.rows = spec.grid.cols = 3;
    spec.grid.poi = PoiSelector::all_nodes;
    spec.demand.mode = DemandMode::rate;
    spec.demand.min = 0;
    spec.demand.max = 15;
    spec.demand.duration = 3600;
    spec.route_replicates = 1;
    const Scenario sc = generate_scenario(spec);
    const double expected = 7.5 * sc.net.num_od_pairs();
    CHECK(std::abs(static_cast<double>(sc.plans.size()) - expected) <= 5 * std::sqrt(expected * 3));
}

TEST_CASE("invalid specs are rejected")
{
    ScenarioSpec spec;
    spec.demand.duration = 5000;
    CHECK_THROWS_AS(generate_scenario(spec), Error);
    spec = {};
    spec.demand.min = -1;
    CHECK_THROWS_AS(generate_scenario(spec), Error);
    spec = {};
    spec.demand.min = 10;
    spec.demand.max = 5;
    CHECK_THROWS_AS(generate_scenario(spec), Error);
}

TEST_CASE("truth counts")
{
    ScenarioSpec spec;
    spec.grid.rows = spec.grid.cols = 3;
    spec.demand.min = 10;
    spec.demand.max = 20;
    spec.demand.duration = 3 * 600;
    spec.demand.frame = 600;
    spec.route_replicates = 2;
    const Scenario sc = generate_scenario(spec);

    SUBCASE("no plans")
    {
        const TruthRun r = simulate_truth(sc.net, {}, 600, 3);
        for (const auto& c : r.counts)
            CHECK(c.isZero());
    }
    SUBCASE("frames add up to the unbroken run")
    {
        const TruthRun split = simulate_truth(sc.net, sc.plans, 600, 3);
        const TruthRun whole = simulate_truth(sc.net, sc.plans, 1800, 1);
        VectorXd sum = VectorXd::Zero(sc.net.num_sensors());
        for (const auto& c : split.counts)
            sum += c;
        CHECK(sum == whole.counts[0]);
        CHECK(split.final_state.vehicle_count() == whole.final_state.vehicle_count());
        CHECK(split.completed == whole.completed);
    }
}

TEST_CASE("single plan crossing three sensors")
{
    GridSpec g;
    g.rows = g.cols = 3;
    const Network net = generate_grid(g);
    TruthPlan p;
    p.od = *net.od_index("n0_0", "n0_1");
    p.departure = 650;
    p.links = {*net.link_index("n0_0-n1_0"), *net.link_index("n1_0-n1_1"), *net.link_index("n1_1-n0_1")};
    const TruthRun r = simulate_truth(net, {p}, 600, 3);
    CHECK(r.counts[0].isZero());
    CHECK(r.counts[2].isZero());
    CHECK(r.counts[1].sum() == 3);
    for (Index l : p.links)
        CHECK(r.counts[1][net.sensor_of_link(l)] == 1);
    const auto f1 = frame_plans({p}, 600, 1);
    REQUIRE(f1.size() == 1);
    CHECK(f1[0].departure == 50);
    CHECK(frame_plans({p}, 600, 0).empty());
}
