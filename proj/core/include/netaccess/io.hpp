#ifndef NETACCESS_IO_HPP
#define NETACCESS_IO_HPP

#include "netaccess/analysis.hpp"
#include "netaccess/bids.hpp"
#include "netaccess/network.hpp"
#include "netaccess/robust.hpp"
#include "netaccess/scenarios.hpp"
#include "netaccess/stochastic.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace netaccess::io {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Buses are 1-based in files (bus 1 = substation) and 0-based in memory.
RadialNetwork load_network(const std::string& path);
void save_network(const RadialNetwork& net, const std::string& path);

std::vector<DeraBid> load_bids(const std::string& path);
void save_bids(const std::vector<DeraBid>& bids, const std::string& path);

/// DSO-side data: cost curves, baseline customer ranges, per-bus caps.
struct DsoData {
    DsoCost cost;
    Vec p0_lower;
    Vec p0_upper;
    Vec p_max_injection;
    Vec p_max_withdrawal;
};

DsoData load_dso(const std::string& path, int bus_count);
void save_dso(const DsoData& data, int bus_count, const std::string& path);

ScenarioSpec load_scenario_spec(const std::string& path);

/// Writes <dir>/scenarios.csv (header bus_1..bus_N, one row per scenario)
/// and <dir>/scenarios.json (spec + seed sidecar).
void save_scenarios(const ScenarioSet& set, const std::string& dir);
ScenarioSet load_scenarios(const std::string& dir);

nlohmann::json clearing_to_json(const RobustClearing& clearing,
                                const RobustAuctionInstance& instance);
nlohmann::json clearing_to_json(const StochasticClearing& clearing,
                                const StochasticAuctionInstance& instance);
nlohmann::json report_to_json(const ComparisonReport& report);
nlohmann::json sweep_to_json(const SweepSummary& summary);

/// Rounds to 12 significant digits; applied to every number we emit so that
/// identical runs serialize byte-identically.
double round12(double x);

/// Temp-file + rename; the destination never holds a partial write.
void write_text_atomic(const std::string& text, const std::string& path);
void write_json_atomic(const nlohmann::json& j, const std::string& path);

}  // namespace netaccess::io

#endif
