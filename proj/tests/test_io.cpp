#include "support.hpp"

#include <odcal/io.hpp>

#include <fstream>
#include <sstream>

using namespace odcal;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

} // namespace

TEST_CASE("network document round trip")
{
    GridSpec g;
    g.rows = 3;
    g.cols = 4;
    g.poi = PoiSelector::ring_pattern;
    const Network net = generate_grid(g);
    const std::string text = io::network_to_json(net);
    const Network back = io::network_from_json(text);
    CHECK(io::network_to_json(back) == text);
    CHECK(back.num_links() == net.num_links());
    CHECK(back.num_od_pairs() == net.num_od_pairs());
    CHECK(validate(back).empty());
    CHECK(free_flow_times(back) == free_flow_times(net));
    CHECK_THROWS_AS(io::network_from_json("{\"format\":\"other\"}"), Error);
    CHECK_THROWS_AS(io::network_from_json("{not json"), Error);
}

TEST_CASE("simulator state round trip is exact and idempotent")
{
    ScenarioSpec spec;
    spec.grid.rows = spec.grid.cols = 3;
    spec.demand.min = 20;
    spec.demand.max = 30;
    spec.demand.duration = 1200;
    spec.demand.frame = 600;
    spec.route_replicates = 1;
    const Scenario sc = generate_scenario(spec);
    const SimResult r = simulate_frame(sc.net, frame_plans(sc.plans, 600, 0), {}, {}, 600);
    REQUIRE(r.state.vehicle_count() > 0);
    const std::string once = io::state_to_json(r.state);
    const FrameState loaded = io::state_from_json(once);
    CHECK(loaded == r.state);
    CHECK(io::state_to_json(loaded) == once);
    CHECK(io::state_to_json(io::state_from_json(io::state_to_json(loaded))) == once);

    // Continuing from the loaded state matches continuing from the original.
    const auto next = frame_plans(sc.plans, 600, 1);
    const SimResult a = simulate_frame(sc.net, next, r.state, {}, 600);
    const SimResult b = simulate_frame(sc.net, next, loaded, {}, 600);
    CHECK(a.counts == b.counts);
    CHECK(a.state == b.state);

    const FrameState empty;
    CHECK(io::state_from_json(io::state_to_json(empty)) == empty);
}

TEST_CASE("counts files")
{
    const Network net = support::diamond();
    const auto dir = support::temp_dir("counts");
    VectorXd c(6);
    c << 1, 2, 3, 0, 5, 6.5;
    io::write_counts(io::counts_file(dir, 3), net, c);
    CHECK(io::counts_file(dir, 3).filename() == "counts_3.csv");
    CHECK(io::read_counts(io::counts_file(dir, 3), net) == c);

    write_text(dir / "bad.csv", "sensor_link_id,count\na-b,1\n");
    CHECK_THROWS_WITH_AS(io::read_counts(dir / "bad.csv", net), doctest::Contains("a-c"), Error);
    write_text(dir / "bad.csv", "sensor_link_id,count\nzz,1\n");
    CHECK_THROWS_AS(io::read_counts(dir / "bad.csv", net), Error);
}

TEST_CASE("NOD files are renormalized with a warning")
{
    const Network net = support::make_network({"a", "b"}, {{"a", "b"}, {"b", "a"}}, {{"a", "b"}, {"b", "a"}});
    const auto dir = support::temp_dir("nod");
    write_text(dir / "nod.csv", "origin_node,destination_node,weight\na,b,3\nb,a,1\n");
    const auto f = io::read_nod(dir / "nod.csv", net);
    CHECK(f.renormalized);
    CHECK(f.raw_total == 4);
    CHECK(f.weights[0] == 0.75);
    io::write_nod(dir / "again.csv", net, f.weights);
    const auto g = io::read_nod(dir / "again.csv", net);
    CHECK_FALSE(g.renormalized);
    CHECK(g.weights == f.weights);
    write_text(dir / "neg.csv", "a,b,-1\n");
    CHECK_THROWS_AS(io::read_nod(dir / "neg.csv", net), Error);
    write_text(dir / "unknown.csv", "a,c,1\n");
    CHECK_THROWS_AS(io::read_nod(dir / "unknown.csv", net), Error);
}

TEST_CASE("count stream")
{
    const Network net = support::make_network({"a", "b"}, {{"a", "b"}, {"b", "a"}}, {});
    SUBCASE("two frames")
    {
        std::istringstream in("frame,sensor_link_id,count\n0,a-b,3\n0,b-a,4\n0,END\n1,b-a,1\n1,a-b,2\n1,END\n");
        io::CountStreamReader r(in, net);
        int t = -1;
        VectorXd c;
        REQUIRE(r.next(t, c));
        CHECK(t == 0);
        CHECK(c == (VectorXd(2) << 3, 4).finished());
        REQUIRE(r.next(t, c));
        CHECK(t == 1);
        CHECK(c == (VectorXd(2) << 2, 1).finished());
        CHECK_FALSE(r.next(t, c));
    }
    SUBCASE("out of order")
    {
        std::istringstream in("1,a-b,3\n");
        io::CountStreamReader r(in, net);
        int t;
        VectorXd c;
        CHECK_THROWS_WITH_AS(r.next(t, c), doctest::Contains("expected frame 0"), Error);
    }
    SUBCASE("incomplete frame")
    {
        std::istringstream in("0,a-b,3\n0,END\n");
        io::CountStreamReader r(in, net);
        int t;
        VectorXd c;
        CHECK_THROWS_WITH_AS(r.next(t, c), doctest::Contains("b-a"), Error);
    }
    SUBCASE("stream ends without the marker")
    {
        std::istringstream in("0,a-b,3\n0,b-a,3\n");
        io::CountStreamReader r(in, net);
        int t;
        VectorXd c;
        CHECK_THROWS_AS(r.next(t, c), Error);
    }
}

TEST_CASE("tables round trip")
{
    GridSpec g;
    g.rows = g.cols = 2;
    const Network net = generate_grid(g);
    const auto dir = support::temp_dir("tables");

    VectorXd od = VectorXd::LinSpaced(net.num_od_pairs(), 0.1, 7.3);
    io::write_od_table(dir / "od.csv", net, od);
    CHECK(io::read_od_table(dir / "od.csv", net) == od);

    ScenarioSpec spec;
    spec.grid = g;
    spec.demand.min = 1;
    spec.demand.max = 3;
    spec.demand.duration = 600;
    spec.demand.frame = 600;
    spec.route_replicates = 1;
    const Scenario sc = generate_scenario(spec);
    io::write_truth_plans(dir / "plans.csv", sc.net, sc.plans);
    const auto plans = io::read_truth_plans(dir / "plans.csv", sc.net);
    REQUIRE(plans.size() == sc.plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
        CHECK(plans[i].od == sc.plans[i].od);
        CHECK(plans[i].departure == sc.plans[i].departure);
        CHECK(plans[i].links == sc.plans[i].links);
    }

    std::vector<ErrorRecord> recs{{0, 1.5, 2.25, 3.125, 4.0, 9.87654321}, {1, 0.1, 0.2, 0.3, 0.4, 0.5}};
    io::write_error_records(dir / "errors.csv", recs);
    const auto back = io::read_error_records(dir / "errors.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].mean_speed == recs[0].mean_speed);
    CHECK(back[1].od_cal_err == recs[1].od_cal_err);
    io::write_fp_trace(dir / "fp.csv", recs);
    const auto fp = io::read_csv(dir / "fp.csv");
    CHECK(fp.header == std::vector<std::string>{"iteration", "fixed_point_error"});
    CHECK(fp.column("fixed_point_error")[0] == 4.0);

    std::vector<io::SummaryRow> rows{{0, 1641, 1797.8, 64.1, 3.2, 12.5, 8.6, 1.1, 9.9}};
    io::write_summary(dir / "summary.csv", rows);
    const auto srows = io::read_summary(dir / "summary.csv");
    REQUIRE(srows.size() == 1);
    CHECK(srows[0].estimated_count == 1797.8);
    CHECK(srows[0].sensor_nrmse == 9.9);

    MatrixXd corr = MatrixXd::Identity(5, 5);
    corr(0, 1) = corr(1, 0) = std::numeric_limits<double>::quiet_NaN();
    io::write_correlation(dir / "corr.csv", corr);
    const auto ct = io::read_csv(dir / "corr.csv");
    CHECK(std::isnan(ct.column("cal_to_sim_err")[0]));
    CHECK(ct.column("mean_speed")[4] == 1.0);

    const VectorXd tau = VectorXd::LinSpaced(net.num_links(), 20, 40);
    io::write_tau(dir / "tau.csv", net, tau);
    CHECK(io::read_csv(dir / "tau.csv").column("tau") == tau);
}

TEST_CASE("config files")
{
    const auto dir = support::temp_dir("config");
    write_text(dir / "run.cfg", "# comment\nlambda = 0.5\nmax_iter=12 # trailing\n\nreplicates = 3\nd = 4\n");
    CalibConfig cfg;
    io::apply_config(cfg, io::read_key_values(dir / "run.cfg"));
    CHECK(cfg.lambda == 0.5);
    CHECK(cfg.max_iterations == 12);
    CHECK(cfg.replicates == 3);
    CHECK(cfg.fp.d == 4);
    CHECK_THROWS_AS(io::apply_config(cfg, {{"lamda", "1"}}), Error);
    CHECK_THROWS_AS(io::apply_config(cfg, {{"lambda", "x"}}), Error);
    write_text(dir / "bad.cfg", "lambda\n");
    CHECK_THROWS_AS(io::read_key_values(dir / "bad.cfg"), Error);
}
