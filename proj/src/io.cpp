#include <odcal/io.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace odcal::io {

using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

std::string slurp(const fs::path& path)
{
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_double(const std::string& s, const std::string& where)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(where + ": not a number: '" + s + "'");
    }
}

long long parse_int(const std::string& s, const std::string& where)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(where + ": not an integer: '" + s + "'");
    }
}

/// Calls `row` with the fields of every non-empty, non-comment line. A first
/// line whose leading field equals `header` is skipped.
void for_each_row(const fs::path& path, const std::string& header,
                  const std::function<void(const std::vector<std::string>&, const std::string&)>& row)
{
    auto in = open_in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        auto fields = split(t, ',');
        for (auto& f : fields)
            f = trim(f);
        if (n == 1 && !fields.empty() && fields[0] == header)
            continue;
        row(fields, path.string() + ":" + std::to_string(n));
    }
}

Index od_of(const Network& net, const std::string& o, const std::string& d, const std::string& where)
{
    auto m = net.od_index(o, d);
    if (!m)
        throw Error(where + ": unknown od pair " + o + "->" + d);
    return *m;
}

} // namespace

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string network_to_json(const Network& net)
{
    json j;
    j["format"] = "odcal-net-1";
    j["nodes"] = json::array();
    for (const auto& n : net.nodes) {
        json node = {{"id", n.id}, {"x", n.x}, {"y", n.y}, {"signalized", n.signalized}};
        if (n.signal_spec) {
            json approaches = json::array();
            for (const auto& a : n.signal_spec->approaches)
                approaches.push_back({{"link", a.link}, {"green_start", a.green_start}, {"green_end", a.green_end}});
            node["signal_spec"] = {{"cycle", n.signal_spec->cycle}, {"approaches", approaches}};
        }
        j["nodes"].push_back(node);
    }
    j["links"] = json::array();
    for (const auto& l : net.links)
        j["links"].push_back({{"id", l.id},
                              {"from", l.from},
                              {"to", l.to},
                              {"length", l.length},
                              {"lanes", l.lanes},
                              {"speed_limit", l.speed_limit},
                              {"has_sensor", l.has_sensor}});
    j["sensor_links"] = net.sensor_links;
    j["od_pairs"] = json::array();
    for (const auto& od : net.od_pairs)
        j["od_pairs"].push_back({{"origin", od.origin}, {"destination", od.destination}});
    return j.dump(1);
}

Network network_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("network: malformed document: ") + e.what());
    }
    if (j.value("format", "") != "odcal-net-1")
        throw Error("network: expected format \"odcal-net-1\"");
    Network net;
    try {
        for (const auto& n : j.at("nodes")) {
            Node node;
            node.id = n.at("id").get<std::string>();
            node.x = n.value("x", 0.0);
            node.y = n.value("y", 0.0);
            node.signalized = n.value("signalized", false);
            if (n.contains("signal_spec") && !n["signal_spec"].is_null()) {
                SignalSpec s;
                s.cycle = n["signal_spec"].value("cycle", 60.0);
                for (const auto& a : n["signal_spec"].value("approaches", json::array()))
                    s.approaches.push_back({a.at("link").get<std::string>(), a.at("green_start").get<double>(),
                                            a.at("green_end").get<double>()});
                node.signal_spec = std::move(s);
            }
            net.nodes.push_back(std::move(node));
        }
        for (const auto& l : j.at("links"))
            net.links.push_back({l.at("id").get<std::string>(), l.at("from").get<std::string>(),
                                 l.at("to").get<std::string>(), l.at("length").get<double>(),
                                 l.at("lanes").get<int>(), l.at("speed_limit").get<double>(),
                                 l.value("has_sensor", false)});
        net.sensor_links = j.at("sensor_links").get<std::vector<std::string>>();
        for (const auto& od : j.at("od_pairs"))
            net.od_pairs.push_back({od.at("origin").get<std::string>(), od.at("destination").get<std::string>()});
    } catch (const json::exception& e) {
        throw Error(std::string("network: ") + e.what());
    }
    net.build_index();
    return net;
}

Network read_network(const fs::path& path)
{
    return network_from_json(slurp(path));
}

void write_network(const fs::path& path, const Network& net)
{
    auto out = open_out(path);
    out << network_to_json(net) << '\n';
}

NodFile read_nod(const fs::path& path, const Network& net)
{
    NodFile f;
    f.weights = VectorXd::Zero(net.num_od_pairs());
    for_each_row(path, "origin_node", [&](const auto& fields, const std::string& where) {
        if (fields.size() != 3)
            throw Error(where + ": expected origin_node,destination_node,weight");
        const double w = parse_double(fields[2], where);
        if (w < 0 || !std::isfinite(w))
            throw Error(where + ": weights must be finite and nonnegative");
        f.weights[od_of(net, fields[0], fields[1], where)] += w;
    });
    f.raw_total = f.weights.sum();
    if (f.raw_total > 0 && std::abs(f.raw_total - 1.0) > 1e-9) {
        std::clog << "odcal: NOD weights in " << path.string() << " sum to " << f.raw_total
                  << "; renormalizing\n";
        f.weights /= f.raw_total;
        f.renormalized = true;
    } else if (f.raw_total == 0) {
        std::clog << "odcal: NOD weights in " << path.string() << " are all zero\n";
    }
    return f;
}

void write_nod(const fs::path& path, const Network& net, const VectorXd& nod)
{
    auto out = open_out(path);
    out << "origin_node,destination_node,weight\n";
    for (Index m = 0; m < net.num_od_pairs(); ++m)
        if (nod[m] != 0)
            out << net.od_pairs[m].origin << ',' << net.od_pairs[m].destination << ',' << nod[m] << '\n';
}

VectorXd read_counts(const fs::path& path, const Network& net)
{
    VectorXd c = VectorXd::Constant(net.num_sensors(), std::numeric_limits<double>::quiet_NaN());
    std::unordered_map<std::string, Index> sensor;
    for (Index k = 0; k < net.num_sensors(); ++k)
        sensor.emplace(net.sensor_links[k], k);
    for_each_row(path, "sensor_link_id", [&](const auto& fields, const std::string& where) {
        if (fields.size() != 2)
            throw Error(where + ": expected sensor_link_id,count");
        auto it = sensor.find(fields[0]);
        if (it == sensor.end())
            throw Error(where + ": unknown sensor link " + fields[0]);
        const double v = parse_double(fields[1], where);
        if (v < 0)
            throw Error(where + ": negative count");
        c[it->second] = v;
    });
    for (Index k = 0; k < net.num_sensors(); ++k)
        if (std::isnan(c[k]))
            throw Error(path.string() + ": no count for sensor " + net.sensor_links[k]);
    return c;
}

void write_counts(const fs::path& path, const Network& net, const VectorXd& counts)
{
    auto out = open_out(path);
    out << "sensor_link_id,count\n";
    for (Index k = 0; k < net.num_sensors(); ++k)
        out << net.sensor_links[k] << ',' << counts[k] << '\n';
}

fs::path counts_file(const fs::path& dir, int frame)
{
    return dir / ("counts_" + std::to_string(frame) + ".csv");
}

CountStreamReader::CountStreamReader(std::istream& in, const Network& net) : in_(in), net_(net) {}

bool CountStreamReader::next(int& frame, VectorXd& counts)
{
    VectorXd c = VectorXd::Constant(net_.num_sensors(), std::numeric_limits<double>::quiet_NaN());
    bool open = false;
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        auto fields = split(t, ',');
        for (auto& f : fields)
            f = trim(f);
        const std::string where = "stdin:" + std::to_string(line_);
        if (fields[0] == "frame")
            continue;
        const long long f = parse_int(fields[0], where);
        if (f != expected_)
            throw Error(where + ": frame " + std::to_string(f) + " out of order; expected frame " +
                        std::to_string(expected_));
        open = true;
        if (fields.size() == 2 && fields[1] == "END") {
            for (Index k = 0; k < net_.num_sensors(); ++k)
                if (std::isnan(c[k]))
                    throw Error(where + ": frame " + std::to_string(f) + " has no count for sensor " +
                                net_.sensor_links[k]);
            frame = expected_++;
            counts = std::move(c);
            return true;
        }
        if (fields.size() != 3)
            throw Error(where + ": expected frame,sensor_link_id,count");
        auto k = net_.link_index(fields[1]);
        if (!k || net_.sensor_of_link(*k) < 0)
            throw Error(where + ": unknown sensor link " + fields[1]);
        c[net_.sensor_of_link(*k)] = parse_double(fields[2], where);
    }
    if (open)
        throw Error("count stream ended inside frame " + std::to_string(expected_));
    return false;
}

void write_od_table(const fs::path& path, const Network& net, const VectorXd& od)
{
    auto out = open_out(path);
    out << "o,d,trips\n";
    for (Index m = 0; m < net.num_od_pairs(); ++m)
        out << net.od_pairs[m].origin << ',' << net.od_pairs[m].destination << ',' << od[m] << '\n';
}

VectorXd read_od_table(const fs::path& path, const Network& net)
{
    VectorXd od = VectorXd::Zero(net.num_od_pairs());
    for_each_row(path, "o", [&](const auto& fields, const std::string& where) {
        if (fields.size() != 3)
            throw Error(where + ": expected o,d,trips");
        od[od_of(net, fields[0], fields[1], where)] = parse_double(fields[2], where);
    });
    return od;
}

void write_truth_plans(const fs::path& path, const Network& net, const std::vector<TruthPlan>& plans)
{
    auto out = open_out(path);
    out << "origin,destination,departure,links\n";
    for (const auto& p : plans) {
        out << net.od_pairs[p.od].origin << ',' << net.od_pairs[p.od].destination << ',' << p.departure << ',';
        for (std::size_t i = 0; i < p.links.size(); ++i)
            out << (i ? " " : "") << net.links[p.links[i]].id;
        out << '\n';
    }
}

std::vector<TruthPlan> read_truth_plans(const fs::path& path, const Network& net)
{
    std::vector<TruthPlan> plans;
    for_each_row(path, "origin", [&](const auto& fields, const std::string& where) {
        if (fields.size() != 4)
            throw Error(where + ": expected origin,destination,departure,links");
        TruthPlan p;
        p.od = od_of(net, fields[0], fields[1], where);
        p.departure = static_cast<long>(parse_int(fields[2], where));
        std::istringstream ls(fields[3]);
        std::string id;
        while (ls >> id) {
            auto l = net.link_index(id);
            if (!l)
                throw Error(where + ": unknown link " + id);
            p.links.push_back(*l);
        }
        if (p.links.empty() || net.from_node(p.links.front()) != net.od_nodes(p.od).first ||
            net.to_node(p.links.back()) != net.od_nodes(p.od).second)
            throw Error(where + ": route does not join the od pair");
        plans.push_back(std::move(p));
    });
    std::stable_sort(plans.begin(), plans.end(),
                     [](const TruthPlan& a, const TruthPlan& b) { return a.departure < b.departure; });
    return plans;
}

void write_plan_dump(const fs::path& path, const std::vector<VehiclePlan>& plans)
{
    auto out = open_out(path);
    out << "route_id,departure_second\n";
    for (const auto& p : plans)
        out << 'm' << p.od << 'r' << p.route << ',' << p.departure << '\n';
}

std::string state_to_json(const FrameState& state)
{
    json j;
    j["format"] = "odcal-state-1";
    j["clock"] = state.clock;
    j["next_vehicle_id"] = state.next_vehicle_id;
    auto queues = [](const std::vector<std::vector<Vehicle>>& qs) {
        json arr = json::array();
        for (const auto& q : qs) {
            json jq = json::array();
            for (const auto& v : q)
                jq.push_back({{"id", v.id}, {"od", v.od}, {"links", v.links}, {"pos", v.pos},
                              {"depart", v.depart}, {"entry", v.entry}});
            arr.push_back(std::move(jq));
        }
        return arr;
    };
    j["link_queues"] = queues(state.link_queues);
    j["entry_queues"] = queues(state.entry_queues);
    j["credits"] = state.credits;
    j["tau"] = std::vector<double>(state.tau.data(), state.tau.data() + state.tau.size());
    return j.dump();
}

FrameState state_from_json(const std::string& text)
{
    FrameState s;
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "odcal-state-1")
            throw Error("state: expected format \"odcal-state-1\"");
        s.clock = j.at("clock").get<long>();
        s.next_vehicle_id = j.at("next_vehicle_id").get<std::uint64_t>();
        auto queues = [](const json& arr) {
            std::vector<std::vector<Vehicle>> qs;
            for (const auto& jq : arr) {
                std::vector<Vehicle> q;
                for (const auto& v : jq)
                    q.push_back({v.at("id").get<std::uint64_t>(), v.at("od").get<Index>(),
                                 v.at("links").get<std::vector<Index>>(), v.at("pos").get<int>(),
                                 v.at("depart").get<long>(), v.at("entry").get<long>()});
                qs.push_back(std::move(q));
            }
            return qs;
        };
        s.link_queues = queues(j.at("link_queues"));
        s.entry_queues = queues(j.at("entry_queues"));
        s.credits = j.at("credits").get<std::vector<double>>();
        const auto tau = j.at("tau").get<std::vector<double>>();
        s.tau = Eigen::Map<const VectorXd>(tau.data(), static_cast<Eigen::Index>(tau.size()));
    } catch (const json::exception& e) {
        throw Error(std::string("state: ") + e.what());
    }
    return s;
}

void write_state(const fs::path& path, const FrameState& state)
{
    auto out = open_out(path);
    out << state_to_json(state) << '\n';
}

FrameState read_state(const fs::path& path)
{
    return state_from_json(slurp(path));
}

std::string route_db_to_json(const RouteDb& db, const Network& net)
{
    json j;
    j["rho"] = db.rho;
    j["od_pairs"] = json::array();
    for (Index m = 0; m < db.num_od_pairs(); ++m) {
        json routes = json::array();
        for (const auto& r : db.routes[m]) {
            json links = json::array();
            for (Index l : r.links)
                links.push_back(net.links[l].id);
            routes.push_back(std::move(links));
        }
        j["od_pairs"].push_back(
            {{"origin", net.od_pairs[m].origin}, {"destination", net.od_pairs[m].destination}, {"routes", routes}});
    }
    return j.dump(1);
}

void write_route_flows(const fs::path& path, const Network& net, const std::vector<RouteFlow>& flows)
{
    auto out = open_out(path);
    out << "o,d,route,expected_trips,links\n";
    for (const auto& f : flows) {
        out << net.od_pairs[f.od].origin << ',' << net.od_pairs[f.od].destination << ',' << f.route << ','
            << f.expected << ',';
        for (std::size_t i = 0; i < f.links.size(); ++i)
            out << (i ? " " : "") << net.links[f.links[i]].id;
        out << '\n';
    }
}

void write_error_records(const fs::path& path, const std::vector<ErrorRecord>& records)
{
    auto out = open_out(path);
    out << "iteration,od_cal_err,cal_to_sim_err,iter_err,fp_err,mean_speed\n";
    for (const auto& r : records)
        out << r.iteration << ',' << r.od_cal_err << ',' << r.cal_to_sim_err << ',' << r.iter_err << ','
            << r.fp_err << ',' << r.mean_speed << '\n';
}

std::vector<ErrorRecord> read_error_records(const fs::path& path)
{
    std::vector<ErrorRecord> out;
    for_each_row(path, "iteration", [&](const auto& f, const std::string& where) {
        if (f.size() != 6)
            throw Error(where + ": expected 6 fields");
        out.push_back({static_cast<int>(parse_int(f[0], where)), parse_double(f[1], where),
                       parse_double(f[2], where), parse_double(f[3], where), parse_double(f[4], where),
                       parse_double(f[5], where)});
    });
    return out;
}

void write_count_comparison(const fs::path& path, const Network& net, const FrameOutput& o)
{
    auto out = open_out(path);
    out << "sensor_link_id,observed,corrected,expected,simulated\n";
    for (Index k = 0; k < net.num_sensors(); ++k)
        out << net.sensor_links[k] << ',' << (o.raw_counts.size() ? o.raw_counts[k] : o.observed[k]) << ','
            << o.observed[k] << ',' << o.expected_counts[k] << ',' << o.best.counts[k] << '\n';
}

void write_tau(const fs::path& path, const Network& net, const VectorXd& tau)
{
    auto out = open_out(path);
    out << "link_id,tau\n";
    for (Index l = 0; l < net.num_links(); ++l)
        out << net.links[l].id << ',' << tau[l] << '\n';
}

void write_fp_trace(const fs::path& path, const std::vector<ErrorRecord>& records)
{
    auto out = open_out(path);
    out << "iteration,fixed_point_error\n";
    for (const auto& r : records)
        out << r.iteration << ',' << r.fp_err << '\n';
}

void write_summary(const fs::path& path, const std::vector<SummaryRow>& rows)
{
    auto out = open_out(path);
    out << "time_frame,real_count,estimated_count,od_eps,od_rmse,od_nrmse,sensor_eps,sensor_rmse,sensor_nrmse\n";
    for (const auto& r : rows)
        out << r.time_frame << ',' << r.real_count << ',' << r.estimated_count << ',' << r.od_eps << ','
            << r.od_rmse << ',' << r.od_nrmse << ',' << r.sensor_eps << ',' << r.sensor_rmse << ','
            << r.sensor_nrmse << '\n';
}

std::vector<SummaryRow> read_summary(const fs::path& path)
{
    std::vector<SummaryRow> rows;
    for_each_row(path, "time_frame", [&](const auto& f, const std::string& where) {
        if (f.size() != 9)
            throw Error(where + ": expected 9 fields");
        rows.push_back({static_cast<int>(parse_int(f[0], where)), parse_double(f[1], where),
                        parse_double(f[2], where), parse_double(f[3], where), parse_double(f[4], where),
                        parse_double(f[5], where), parse_double(f[6], where), parse_double(f[7], where),
                        parse_double(f[8], where)});
    });
    return rows;
}

void write_correlation(const fs::path& path, const MatrixXd& corr)
{
    static const char* names[] = {"od_cal_err", "cal_to_sim_err", "iter_err", "fp_err", "mean_speed"};
    auto out = open_out(path);
    out << "variable";
    for (const char* n : names)
        out << ',' << n;
    out << '\n';
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
        out << names[i];
        for (Eigen::Index j = 0; j < corr.cols(); ++j) {
            out << ',';
            if (std::isnan(corr(i, j)))
                out << "NA";
            else
                out << corr(i, j);
        }
        out << '\n';
    }
}

std::map<std::string, std::string> read_key_values(const fs::path& path)
{
    std::map<std::string, std::string> kv;
    auto in = open_in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(path.string() + ":" + std::to_string(n) + ": expected key = value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

Index CsvTable::column_index(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return static_cast<Index>(i);
    throw Error("no column '" + name + "'");
}

VectorXd CsvTable::column(const std::string& name) const
{
    const auto c = static_cast<std::size_t>(column_index(name));
    VectorXd v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (c >= rows[r].size())
            throw Error("row " + std::to_string(r + 1) + " has no column '" + name + "'");
        v[static_cast<Eigen::Index>(r)] = rows[r][c] == "NA" ? std::numeric_limits<double>::quiet_NaN()
                                                              : parse_double(rows[r][c], name);
    }
    return v;
}

CsvTable read_csv(const fs::path& path)
{
    CsvTable t;
    auto in = open_in(path);
    std::string line;
    while (std::getline(in, line)) {
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#')
            continue;
        auto fields = split(s, ',');
        for (auto& f : fields)
            f = trim(f);
        if (t.header.empty())
            t.header = std::move(fields);
        else
            t.rows.push_back(std::move(fields));
    }
    if (t.header.empty())
        throw Error(path.string() + ": empty table");
    return t;
}

void apply_config(CalibConfig& cfg, const std::map<std::string, std::string>& kv)
{
    for (const auto& [key, value] : kv) {
        const std::string where = "config key " + key;
        auto i = [&] { return static_cast<int>(parse_int(value, where)); };
        auto d = [&] { return parse_double(value, where); };
        if (key == "delta")
            cfg.delta = i();
        else if (key == "lambda")
            cfg.lambda = d();
        else if (key == "gamma")
            cfg.gamma = d();
        else if (key == "rho")
            cfg.rho = i();
        else if (key == "replicates")
            cfg.replicates = i();
        else if (key == "max_iter")
            cfg.max_iterations = i();
        else if (key == "eps_exit")
            cfg.epsilon_exit = d();
        else if (key == "seed")
            cfg.base_seed = static_cast<std::uint64_t>(parse_int(value, where));
        else if (key == "d")
            cfg.fp.d = d();
        else if (key == "denom_epsilon")
            cfg.fp.denom_epsilon = d();
        else if (key == "u_factor")
            cfg.bounds.u_factor = d();
        else if (key == "u_floor")
            cfg.bounds.u_floor = d();
        else if (key == "step")
            cfg.sim.step = i();
        else if (key == "saturation_flow")
            cfg.sim.saturation_flow = d();
        else if (key == "jam_density")
            cfg.sim.jam_density = d();
        else if (key == "jobs")
            cfg.jobs = i();
        else if (key == "bvls_tol")
            cfg.bvls.tol = d();
        else if (key == "scan_limit")
            cfg.scan_limit = i();
        else
            throw Error("unknown config key '" + key + "'");
    }
}

} // namespace odcal::io
