#pragma once

// JSON and CSV encodings. JSON row streams carry "schema": 1.

#include <string>
#include <vector>

#include <json.hpp>

#include "treecycles/bars.hpp"
#include "treecycles/estimators.hpp"
#include "treecycles/events.hpp"
#include "treecycles/meander.hpp"
#include "treecycles/stirring.hpp"

namespace treecycles {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// [{"edge": child address, "h": height}, ...] ordered by (edge id, height).
nlohmann::json bars_to_json(const BarCollection& bars);
BarCollection bars_from_json(const TreeShape& shape, const nlohmann::json& j);

nlohmann::json trajectory_to_json(const TreeShape& shape, const Trajectory& trajectory);
nlohmann::json cycle_to_json(const TreeShape& shape, const CycleReport& report);
nlohmann::json event_to_json(const TreeShape& shape, const EventRecord& record);
nlohmann::json estimate_to_json(const Estimate& estimate);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& text);
std::string csv_row(const std::vector<std::string>& fields);

/// Stable column order for event rows.
const std::vector<std::string>& event_csv_columns();
std::vector<std::string> event_csv_fields(const TreeShape& shape, const EventRecord& record);

const std::vector<std::string>& scan_csv_columns();
std::vector<std::string> scan_csv_fields(const ScanTable& table, const ScanRow& row);
nlohmann::json scan_row_to_json(const ScanTable& table, const ScanRow& row);

}  // namespace treecycles
