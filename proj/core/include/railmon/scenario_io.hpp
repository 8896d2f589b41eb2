#pragma once

// JSON/CSV (de)serialization for scenarios, simulation reports and radio
// parameter sets.

#include <filesystem>
#include <string>
#include <string_view>

#include "railmon/netsim.hpp"

namespace railmon {

/// Parses a scenario document. Stimulus CSV paths are resolved against the
/// current working directory and loaded eagerly. Throws Error{ScenarioInvalid}.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// Pretty-printed JSON; byte-identical for identical reports.
std::string report_to_json(const SimReport& report);
/// Header `time_s,node_id,rx_timestamp_ms,rssi_dbm`, one row per delivery.
std::string timeline_to_csv(const SimReport& report);

std::string range_sweep_to_json(const RangeSweep& sweep);

/// Effective defaults for radio, path loss, node and gateway constants.
std::string defaults_to_json(const RadioParams& radio, const PathLossModel& path_loss);

}  // namespace railmon
