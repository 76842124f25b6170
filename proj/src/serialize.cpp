#include "treecycles/serialize.hpp"

#include <charconv>
#include <stdexcept>

namespace treecycles {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json bars_to_json(const BarCollection& bars) {
  json out = json::array();
  for (const auto& b : bars.materialize()) {
    out.push_back({{"edge", bars.shape().address(b.edge.child)}, {"h", b.height}});
  }
  return out;
}

BarCollection bars_from_json(const TreeShape& shape, const json& j) {
  if (!j.is_array()) throw std::invalid_argument("bars JSON must be an array");
  std::vector<Bar> bars;
  for (const auto& item : j) {
    Vertex child = shape.parse_address(item.at("edge").get<std::string>());
    if (child == kRoot) throw std::invalid_argument("the root is not the child end of an edge");
    bars.push_back({Edge{child}, item.at("h").get<double>()});
  }
  return BarCollection::from_bars(shape, bars);
}

json trajectory_to_json(const TreeShape& shape, const Trajectory& trajectory) {
  json crossings = json::array();
  for (const auto& c : trajectory.crossings) {
    crossings.push_back({{"edge", shape.address(c.bar.edge.child)},
                         {"h", c.bar.height},
                         {"direction", c.direction == Direction::DownToChild ? "down" : "up"},
                         {"time", c.time}});
  }
  return {{"start", {{"vertex", shape.address(trajectory.start.vertex)}, {"h", trajectory.start.height}}},
          {"crossings", crossings},
          {"outcome", to_string(trajectory.outcome)},
          {"elapsed", trajectory.elapsed},
          {"end", {{"vertex", shape.address(trajectory.end.vertex)}, {"h", trajectory.end.height}}}};
}

json cycle_to_json(const TreeShape& shape, const CycleReport& report) {
  json cycle = json::array();
  for (Vertex v : report.cycle) cycle.push_back(shape.address(v));
  return {{"cycle", cycle}, {"length", report.length()}, {"boundary_truncated", report.boundary_truncated}};
}

json event_to_json(const TreeShape& shape, const EventRecord& r) {
  json out = {{"added", {{"edge", shape.address(r.added.edge.child)}, {"h", r.added.height}}},
              {"crossed", r.crossed},
              {"pivot", to_string(r.pivot)},
              {"h_n_B", r.h_n_B},
              {"h_n_BA", r.h_n_BA}};
  out["bottleneck"] = r.bottleneck ? json{{"edge", shape.address(r.bottleneck->edge.child)}, {"h", r.bottleneck->bar.height}}
                                   : json(nullptr);
  out["no_escape"] = r.no_escape ? json(*r.no_escape) : json(nullptr);
  out["fb_cb"] = r.fb_cb ? json(to_string(*r.fb_cb)) : json(nullptr);
  out["cb_prime_index"] = r.cb_prime_index ? json(*r.cb_prime_index) : json(nullptr);
  return out;
}

json estimate_to_json(const Estimate& e) {
  return {{"label", e.label}, {"mean", e.mean}, {"stderr", e.std_error}, {"trials", e.trials}, {"seed", e.seed}};
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\r\n";
}

const std::vector<std::string>& event_csv_columns() {
  static const std::vector<std::string> columns = {
      "added_edge", "added_h", "crossed", "bottleneck_edge", "bottleneck_h", "no_escape",
      "pivot",      "fb_cb",   "cb_prime_index", "h_n_B", "h_n_BA"};
  return columns;
}

namespace {
std::string flag(bool b) { return b ? "1" : "0"; }
}  // namespace

std::vector<std::string> event_csv_fields(const TreeShape& shape, const EventRecord& r) {
  return {shape.address(r.added.edge.child),
          format_double(r.added.height),
          flag(r.crossed),
          r.bottleneck ? shape.address(r.bottleneck->edge.child) : "",
          r.bottleneck ? format_double(r.bottleneck->bar.height) : "",
          r.no_escape ? flag(*r.no_escape) : "",
          to_string(r.pivot),
          r.fb_cb ? to_string(*r.fb_cb) : "",
          r.cb_prime_index ? std::to_string(*r.cb_prime_index) : "",
          flag(r.h_n_B),
          flag(r.h_n_BA)};
}

const std::vector<std::string>& scan_csv_columns() {
  static const std::vector<std::string> columns = {"d", "n", "t", "p_hat", "stderr", "trials", "seed", "bracket_lo",
                                                   "bracket_hi"};
  return columns;
}

std::vector<std::string> scan_csv_fields(const ScanTable& table, const ScanRow& row) {
  return {std::to_string(row.d),
          std::to_string(row.n),
          format_double(row.t),
          format_double(row.estimate.mean),
          format_double(row.estimate.std_error),
          std::to_string(row.estimate.trials),
          std::to_string(row.estimate.seed),
          format_double(table.bracket_lo),
          format_double(table.bracket_hi)};
}

json scan_row_to_json(const ScanTable& table, const ScanRow& row) {
  return {{"schema", kSchemaVersion},
          {"d", row.d},
          {"n", row.n},
          {"t", row.t},
          {"p_hat", row.estimate.mean},
          {"stderr", row.estimate.std_error},
          {"trials", row.estimate.trials},
          {"seed", row.estimate.seed},
          {"bracket_lo", table.bracket_lo},
          {"bracket_hi", table.bracket_hi}};
}

}  // namespace treecycles
