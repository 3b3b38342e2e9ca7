#pragma once

// File formats: scenario/sweep configs and results as JSON, snapshot
// matrices as text or compact binary.
//
// Snapshot text format:
//   M L
//   <case>            I, II, III, IV, or - when unspecified
//   re im             M*L lines, snapshot-major (all antennas of y_1, ...)
// Numbers use the shortest representation that round-trips exactly.
//
// Snapshot binary format (little-endian):
//   "GDOA1" | uint32 M | uint32 L | uint8 case (0 = unspecified, 1..4)
//   | M*L pairs of float64 (re, im), snapshot-major

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "gdoa/inference.hpp"
#include "gdoa/model.hpp"

namespace gdoa {

struct SnapshotFile {
  SnapshotMatrix snapshots;
  std::optional<NoiseCase> noise_case;
};

void write_snapshots_text(std::ostream& out, const SnapshotFile& file);
void write_snapshots_binary(std::ostream& out, const SnapshotFile& file);
// Detects the format from the leading bytes.
SnapshotFile read_snapshots(std::istream& in);

void save_snapshots(const std::filesystem::path& path, const SnapshotFile& file,
                    bool binary = false);
SnapshotFile load_snapshots(const std::filesystem::path& path);

// Throws ParseError naming the offending key.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

nlohmann::json scene_to_json(const ScenarioConfig& config, const SyntheticScene& scene);
struct SceneFile {
  ScenarioConfig config;
  SyntheticScene scene;
};
SceneFile scene_from_json(const nlohmann::json& j);

nlohmann::json result_to_json(const EstimationResult& result);

nlohmann::json load_json(const std::filesystem::path& path);
void save_text(const std::filesystem::path& path, const std::string& text);

// Shortest exactly round-tripping decimal form of a double.
std::string format_double(double x);

} // namespace gdoa
