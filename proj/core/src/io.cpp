#include "netaccess/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace netaccess::io {

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
    return j;
}

void require_schema(const json& j, const std::string& path) {
    if (!j.is_object() || j.value("schema", 0) != 1)
        throw ParseError("'" + path + "': missing or unsupported schema field");
}

json vec_to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(round12(v(i)));
    return a;
}

Vec vec_from_json(const json& a, int expected, const std::string& what) {
    if (!a.is_array() || (expected >= 0 && static_cast<int>(a.size()) != expected))
        throw ParseError(what + ": expected array of " + std::to_string(expected) + " numbers");
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw ParseError(what + ": non-numeric entry");
        v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    }
    return v;
}

json curve_to_json(const ConcaveCurve& cv) {
    json j;
    if (cv.is_quadratic()) {
        const auto& q = cv.quadratic();
        j["kind"] = "quadratic";
        j["coeffs"] = {round12(q.quad_coeff), round12(q.lin_coeff), round12(q.const_coeff)};
    } else {
        const auto& p = cv.pwl();
        j["kind"] = "pwl";
        json points = json::array();
        for (size_t i = 0; i < p.points_c.size(); ++i)
            points.push_back({round12(p.points_c[i]), round12(p.points_v[i])});
        j["points"] = std::move(points);
    }
    return j;
}

ConcaveCurve curve_from_json(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("kind")) throw ParseError(what + ": malformed curve");
    const std::string kind = j["kind"].get<std::string>();
    ConcaveCurve cv;
    if (kind == "quadratic") {
        const auto& c = j.at("coeffs");
        if (!c.is_array() || c.size() != 3)
            throw ParseError(what + ": quadratic coeffs must be [quad, lin, const]");
        cv.curve = QuadraticCurve{c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
    } else if (kind == "pwl") {
        PiecewiseLinearCurve p;
        for (const auto& pt : j.at("points")) {
            if (!pt.is_array() || pt.size() != 2)
                throw ParseError(what + ": pwl points must be [c, value] pairs");
            p.points_c.push_back(pt[0].get<double>());
            p.points_v.push_back(pt[1].get<double>());
        }
        if (p.points_c.size() < 2) throw ParseError(what + ": pwl needs >= 2 points");
        cv.curve = std::move(p);
    } else {
        throw ParseError(what + ": unknown curve kind '" + kind + "'");
    }
    return cv;
}

json quad_to_json(const QuadraticCurve& q) {
    return json{round12(q.quad_coeff), round12(q.lin_coeff), round12(q.const_coeff)};
}

QuadraticCurve quad_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError(what + ": expected [quad, lin, const] coefficients");
    return QuadraticCurve{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

double round12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

void write_text_atomic(const std::string& text, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << text;
        if (!out) throw std::runtime_error("short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

void write_json_atomic(const nlohmann::json& j, const std::string& path) {
    write_text_atomic(j.dump(2) + "\n", path);
}

RadialNetwork load_network(const std::string& path) {
    json j = load_json_file(path);
    require_schema(j, path);
    RadialNetwork net;
    net.bus_count = j.at("buses").get<int>();
    const auto& edges = j.at("edges");
    if (!edges.is_array()) throw ParseError("'" + path + "': edges must be an array");
    const auto e_count = static_cast<Eigen::Index>(edges.size());
    net.resistance = Vec(e_count);
    net.reactance = Vec(e_count);
    net.flow_limit = Vec(e_count);
    for (Eigen::Index e = 0; e < e_count; ++e) {
        const auto& je = edges[static_cast<size_t>(e)];
        const int from = je.at("from").get<int>();
        const int to = je.at("to").get<int>();
        if (from < 1 || from > net.bus_count || to < 1 || to > net.bus_count)
            throw ParseError("'" + path + "': edge " + std::to_string(e + 1) +
                             " references a bus outside 1.." + std::to_string(net.bus_count));
        net.edges.emplace_back(from - 1, to - 1);
        net.resistance(e) = je.at("r").get<double>();
        net.reactance(e) = je.at("x").get<double>();
        net.flow_limit(e) = je.at("flow_limit").get<double>();
    }
    net.power_factor_ratio = j.value("alpha", 0.0);
    if (j.contains("voltage_band")) {
        const auto& vb = j["voltage_band"];
        if (!vb.is_array() || vb.size() != 2)
            throw ParseError("'" + path + "': voltage_band must be [lower_sq, upper_sq]");
        net.voltage_lower_sq = vb[0].get<double>();
        net.voltage_upper_sq = vb[1].get<double>();
    }
    net.reference_voltage_sq = j.value("reference_voltage_sq", 1.0);
    net.validate();
    return net;
}

void save_network(const RadialNetwork& net, const std::string& path) {
    json j;
    j["schema"] = 1;
    j["buses"] = net.bus_count;
    json edges = json::array();
    for (size_t e = 0; e < net.edges.size(); ++e) {
        json je;
        je["from"] = net.edges[e].first + 1;
        je["to"] = net.edges[e].second + 1;
        je["r"] = round12(net.resistance(static_cast<Eigen::Index>(e)));
        je["x"] = round12(net.reactance(static_cast<Eigen::Index>(e)));
        je["flow_limit"] = round12(net.flow_limit(static_cast<Eigen::Index>(e)));
        edges.push_back(std::move(je));
    }
    j["edges"] = std::move(edges);
    j["alpha"] = round12(net.power_factor_ratio);
    j["voltage_band"] = {round12(net.voltage_lower_sq), round12(net.voltage_upper_sq)};
    j["reference_voltage_sq"] = round12(net.reference_voltage_sq);
    write_json_atomic(j, path);
}

std::vector<DeraBid> load_bids(const std::string& path) {
    json j = load_json_file(path);
    require_schema(j, path);
    std::vector<DeraBid> bids;
    for (const auto& jb : j.at("bids")) {
        DeraBid bid;
        bid.dera_id = jb.at("dera_id").get<std::string>();
        for (const auto& b : jb.at("buses")) bid.active_buses.push_back(b.get<int>() - 1);
        const auto dim = static_cast<Eigen::Index>(bid.active_buses.size());
        for (const auto& c : jb.at("injection_curve"))
            bid.injection_curves.push_back(curve_from_json(c, "bid '" + bid.dera_id + "'"));
        for (const auto& c : jb.at("withdrawal_curve"))
            bid.withdrawal_curves.push_back(curve_from_json(c, "bid '" + bid.dera_id + "'"));
        bid.c_min_injection = jb.contains("c_min_injection")
                                  ? vec_from_json(jb["c_min_injection"], static_cast<int>(dim),
                                                  "bid '" + bid.dera_id + "' c_min_injection")
                                  : Vec::Zero(dim);
        bid.c_min_withdrawal = jb.contains("c_min_withdrawal")
                                   ? vec_from_json(jb["c_min_withdrawal"], static_cast<int>(dim),
                                                   "bid '" + bid.dera_id + "' c_min_withdrawal")
                                   : Vec::Zero(dim);
        bids.push_back(std::move(bid));
    }
    return bids;
}

void save_bids(const std::vector<DeraBid>& bids, const std::string& path) {
    json j;
    j["schema"] = 1;
    json arr = json::array();
    for (const auto& bid : bids) {
        json jb;
        jb["dera_id"] = bid.dera_id;
        json buses = json::array();
        for (int b : bid.active_buses) buses.push_back(b + 1);
        jb["buses"] = std::move(buses);
        json inj = json::array(), wdr = json::array();
        for (const auto& c : bid.injection_curves) inj.push_back(curve_to_json(c));
        for (const auto& c : bid.withdrawal_curves) wdr.push_back(curve_to_json(c));
        jb["injection_curve"] = std::move(inj);
        jb["withdrawal_curve"] = std::move(wdr);
        jb["c_min_injection"] = vec_to_json(bid.c_min_injection);
        jb["c_min_withdrawal"] = vec_to_json(bid.c_min_withdrawal);
        arr.push_back(std::move(jb));
    }
    j["bids"] = std::move(arr);
    write_json_atomic(j, path);
}

DsoData load_dso(const std::string& path, int bus_count) {
    json j = load_json_file(path);
    require_schema(j, path);
    DsoData data;
    if (j.contains("uniform_cost")) {
        data.cost = DsoCost::uniform(bus_count, quad_from_json(j["uniform_cost"], "uniform_cost"));
    } else {
        for (const auto& c : j.at("injection_cost"))
            data.cost.injection.push_back(quad_from_json(c, "injection_cost"));
        for (const auto& c : j.at("withdrawal_cost"))
            data.cost.withdrawal.push_back(quad_from_json(c, "withdrawal_cost"));
    }
    data.p0_lower = vec_from_json(j.at("p0_lower"), bus_count, "p0_lower");
    data.p0_upper = vec_from_json(j.at("p0_upper"), bus_count, "p0_upper");
    data.p_max_injection = vec_from_json(j.at("p_max_injection"), bus_count, "p_max_injection");
    data.p_max_withdrawal = vec_from_json(j.at("p_max_withdrawal"), bus_count, "p_max_withdrawal");
    data.cost.validate(bus_count);
    return data;
}

void save_dso(const DsoData& data, int bus_count, const std::string& path) {
    json j;
    j["schema"] = 1;
    json inj = json::array(), wdr = json::array();
    for (const auto& c : data.cost.injection) inj.push_back(quad_to_json(c));
    for (const auto& c : data.cost.withdrawal) wdr.push_back(quad_to_json(c));
    j["injection_cost"] = std::move(inj);
    j["withdrawal_cost"] = std::move(wdr);
    j["p0_lower"] = vec_to_json(data.p0_lower);
    j["p0_upper"] = vec_to_json(data.p0_upper);
    j["p_max_injection"] = vec_to_json(data.p_max_injection);
    j["p_max_withdrawal"] = vec_to_json(data.p_max_withdrawal);
    (void)bus_count;
    write_json_atomic(j, path);
}

ScenarioSpec load_scenario_spec(const std::string& path) {
    json j = load_json_file(path);
    require_schema(j, path);
    ScenarioSpec spec;
    for (const auto& jb : j.at("buses")) {
        BusDistribution b;
        b.mean = jb.value("mean", 0.0);
        b.sigma = jb.at("sigma").get<double>();
        b.lower = jb.contains("lower") ? jb["lower"].get<double>() : b.mean - 3.0 * b.sigma;
        b.upper = jb.contains("upper") ? jb["upper"].get<double>() : b.mean + 3.0 * b.sigma;
        spec.buses.push_back(b);
    }
    return spec;
}

void save_scenarios(const ScenarioSet& set, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const int n = set.buses();
    std::ostringstream csv;
    for (int i = 0; i < n; ++i) csv << (i ? "," : "") << "bus_" << (i + 1);
    csv << "\n";
    char buf[40];
    for (int s = 0; s < set.count(); ++s) {
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", set.scenarios(s, i));
            csv << (i ? "," : "") << buf;
        }
        csv << "\n";
    }
    write_text_atomic(csv.str(), (std::filesystem::path(dir) / "scenarios.csv").string());

    json j;
    j["schema"] = 1;
    j["seed"] = set.seed;
    j["count"] = set.count();
    json buses = json::array();
    for (const auto& b : set.spec.buses) {
        json jb;
        jb["mean"] = round12(b.mean);
        jb["sigma"] = round12(b.sigma);
        jb["lower"] = round12(b.lower);
        jb["upper"] = round12(b.upper);
        buses.push_back(std::move(jb));
    }
    j["buses"] = std::move(buses);
    write_json_atomic(j, (std::filesystem::path(dir) / "scenarios.json").string());
}

ScenarioSet load_scenarios(const std::string& dir) {
    const std::string csv_path = (std::filesystem::path(dir) / "scenarios.csv").string();
    const std::string side_path = (std::filesystem::path(dir) / "scenarios.json").string();
    std::ifstream in(csv_path);
    if (!in) throw ParseError("cannot open '" + csv_path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + csv_path + "': empty file");
    int n = line.empty() ? 0 : 1;
    for (char c : line) n += (c == ',');
    std::vector<double> values;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ls, cell, ',')) {
            values.push_back(std::strtod(cell.c_str(), nullptr));
            ++cols;
        }
        if (cols != n)
            throw ParseError("'" + csv_path + "': row " + std::to_string(rows + 1) + " has " +
                             std::to_string(cols) + " columns, expected " + std::to_string(n));
        ++rows;
    }
    if (rows == 0) throw ParseError("'" + csv_path + "': no scenario rows");

    ScenarioSet set;
    set.scenarios = Eigen::MatrixXd(rows, n);
    for (int s = 0; s < rows; ++s)
        for (int i = 0; i < n; ++i)
            set.scenarios(s, i) = values[static_cast<size_t>(s) * static_cast<size_t>(n) +
                                         static_cast<size_t>(i)];

    if (std::filesystem::exists(side_path)) {
        json j = load_json_file(side_path);
        require_schema(j, side_path);
        set.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("buses"))
            for (const auto& jb : j["buses"]) {
                BusDistribution b;
                b.mean = jb.value("mean", 0.0);
                b.sigma = jb.value("sigma", 0.0);
                b.lower = jb.value("lower", 0.0);
                b.upper = jb.value("upper", 0.0);
                set.spec.buses.push_back(b);
            }
    }
    return set;
}

namespace {

json allocations_to_json(const std::vector<DeraBid>& bids, const std::vector<Vec>& c_injection,
                         const std::vector<Vec>& c_withdrawal) {
    json arr = json::array();
    for (size_t k = 0; k < bids.size(); ++k) {
        json jk;
        jk["dera_id"] = bids[k].dera_id;
        jk["c_injection"] = vec_to_json(c_injection[k]);
        jk["c_withdrawal"] = vec_to_json(c_withdrawal[k]);
        arr.push_back(std::move(jk));
    }
    return arr;
}

json surpluses_to_json(const Vec& payments, const Vec& dera_surplus, double dso_surplus,
                       double social_surplus) {
    json j;
    j["payments"] = vec_to_json(payments);
    j["dera_surplus"] = vec_to_json(dera_surplus);
    j["dso_surplus"] = round12(dso_surplus);
    j["social_surplus"] = round12(social_surplus);
    return j;
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        default: return "numerical_failure";
    }
}

}  // namespace

json clearing_to_json(const RobustClearing& clearing, const RobustAuctionInstance& instance) {
    json j;
    j["schema"] = 1;
    j["mode"] = "robust";
    j["status"] = status_name(clearing.outcome.status);
    if (clearing.outcome.status != SolveStatus::Optimal) {
        j["message"] = clearing.outcome.message;
        return j;
    }
    j["allocations"] = allocations_to_json(instance.bids, clearing.c_injection,
                                           clearing.c_withdrawal);
    j["total_injection"] = vec_to_json(clearing.total_injection);
    j["total_withdrawal"] = vec_to_json(clearing.total_withdrawal);
    j["price_injection"] = vec_to_json(clearing.price_injection);
    j["price_withdrawal"] = vec_to_json(clearing.price_withdrawal);
    j["duals"]["mu_upper"] = vec_to_json(clearing.mu_upper);
    j["duals"]["mu_lower"] = vec_to_json(clearing.mu_lower);
    j["duals"]["omega_injection"] = vec_to_json(clearing.omega_injection);
    j["duals"]["omega_withdrawal"] = vec_to_json(clearing.omega_withdrawal);
    j["surpluses"] = surpluses_to_json(clearing.payments, clearing.dera_surplus,
                                       clearing.dso_surplus, clearing.social_surplus);
    j["objective"] = round12(clearing.objective);

    const auto identity = lmap_r_identity_check(clearing, instance);
    j["checks"]["price_identity_residual"] = round12(identity.max_residual());
    return j;
}

json clearing_to_json(const StochasticClearing& clearing,
                      const StochasticAuctionInstance& instance) {
    json j;
    j["schema"] = 1;
    j["mode"] = "stochastic";
    j["delta"] = round12(instance.delta);
    j["scenario_count"] = instance.scenarios.count();
    j["status"] = status_name(clearing.outcome.status);
    if (clearing.outcome.status != SolveStatus::Optimal) {
        j["message"] = clearing.outcome.message;
        return j;
    }
    j["allocations"] = allocations_to_json(instance.bids, clearing.c_injection,
                                           clearing.c_withdrawal);
    j["price_injection"] = vec_to_json(clearing.price_injection);
    j["price_withdrawal"] = vec_to_json(clearing.price_withdrawal);
    j["duals"]["mu_upper"] = vec_to_json(clearing.mu_upper);
    j["duals"]["mu_lower"] = vec_to_json(clearing.mu_lower);
    Vec beta_up_sum = Vec::Zero(clearing.t_upper.size());
    Vec beta_lo_sum = Vec::Zero(clearing.t_lower.size());
    for (const auto& b : clearing.beta_upper) beta_up_sum += b;
    for (const auto& b : clearing.beta_lower) beta_lo_sum += b;
    j["duals"]["beta_upper_sum"] = vec_to_json(beta_up_sum);
    j["duals"]["beta_lower_sum"] = vec_to_json(beta_lo_sum);
    j["tail"]["t_upper"] = vec_to_json(clearing.t_upper);
    j["tail"]["t_lower"] = vec_to_json(clearing.t_lower);
    // Averaged epigraph slack per row; <= 0 at a feasible optimum.
    const int s_count = static_cast<int>(clearing.gamma_upper.size());
    Vec avg_up = clearing.t_upper, avg_lo = clearing.t_lower;
    const double w = 1.0 / ((1.0 - instance.delta) * static_cast<double>(s_count));
    for (int s = 0; s < s_count; ++s) {
        avg_up += w * clearing.gamma_upper[static_cast<size_t>(s)];
        avg_lo += w * clearing.gamma_lower[static_cast<size_t>(s)];
    }
    j["tail"]["avg_row_upper"] = vec_to_json(avg_up);
    j["tail"]["avg_row_lower"] = vec_to_json(avg_lo);
    j["surpluses"] = surpluses_to_json(clearing.payments, clearing.dera_surplus,
                                       clearing.dso_surplus, clearing.social_surplus);
    j["objective"] = round12(clearing.objective);

    const auto identity = lmap_s_identity_check(clearing, instance);
    j["checks"]["price_identity_residual"] = round12(identity.max_residual());
    return j;
}

json report_to_json(const ComparisonReport& report) {
    json j;
    j["schema"] = 1;
    json modes = json::array();
    for (const auto& mr : report.modes) {
        json jm;
        jm["mode"] = mr.mode;
        jm["status"] = status_name(mr.status);
        if (mr.status == SolveStatus::Optimal) {
            if (mr.mode != "robust") jm["delta"] = round12(mr.delta);
            jm["total_c_injection"] = vec_to_json(mr.total_c_injection);
            jm["total_c_withdrawal"] = vec_to_json(mr.total_c_withdrawal);
            jm["price_injection"] = vec_to_json(mr.price_injection);
            jm["price_withdrawal"] = vec_to_json(mr.price_withdrawal);
            jm["dera_surplus"] = vec_to_json(mr.dera_surplus);
            jm["dso_surplus"] = round12(mr.dso_surplus);
            jm["social_surplus"] = round12(mr.social_surplus);
            jm["violation_upper"] = vec_to_json(mr.violations.upper);
            jm["violation_lower"] = vec_to_json(mr.violations.lower);
            jm["max_violation_rate"] = round12(mr.violations.max_rate());
        }
        modes.push_back(std::move(jm));
    }
    j["modes"] = std::move(modes);
    return j;
}

json sweep_to_json(const SweepSummary& summary) {
    json j;
    j["schema"] = 1;
    json rows = json::array();
    for (const auto& row : summary.rows) {
        json jr;
        jr["sigma"] = round12(row.sigma);
        jr["status"] = status_name(row.status);
        jr["total_access"] = round12(row.total_access);
        jr["dera_surplus"] = vec_to_json(row.dera_surplus);
        jr["dso_surplus"] = round12(row.dso_surplus);
        jr["social_surplus"] = round12(row.social_surplus);
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    j["access_non_increasing"] = summary.access_non_increasing;
    j["surplus_non_increasing"] = summary.surplus_non_increasing;
    return j;
}

}  // namespace netaccess::io
