#pragma once

// CSV export of trajectories, terminal points, references and manifolds,
// and import of target/terminal files. Numbers are written with 17
// significant digits so that a write/read round trip is bit exact.

#include "reach/analysis.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reach {

inline constexpr const char* kTrajectoryHeader =
  "sample_id,stage_index,t,x,y,z,vx,vy,vz,ax_hat,ay_hat,az_hat,mass";
inline constexpr const char* kTerminalHeader = "sample_id,space,c0,c1,c2";

/// Shortest form that still carries 17 significant digits (round-trip safe).
std::string format_double(double v);
void append_double(std::string& out, double v);

/// One row per stage boundary per surviving sample when histories are kept;
/// otherwise only the terminal row (stage_index = N, zero steering).
void write_trajectories(const std::filesystem::path& path, const ReachableSet& set);

/// Two rows per surviving sample: position and velocity.
void write_terminals(const std::filesystem::path& path, const ReachableSet& set);

/// N + 1 rows with sample_id = -1 and zero steering.
void write_reference(const std::filesystem::path& path, const ReferenceTrajectory& ref);

/// Trajectory schema plus `branch` (stable/unstable) and `s` (+1/-1) columns.
/// sample_id is the fixed-point index, t the time since the seed.
void write_manifolds(const std::filesystem::path& path, const ManifoldSet& set, double dt_per_interval);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

/// Reads a comma-separated file, skipping blank lines and lines starting with '#'.
CsvTable read_csv(const std::filesystem::path& path);

struct TargetState
{
  Vec3 r = Vec3::Zero();
  std::optional<Vec3> v;
  std::string label;
};

/// Accepts files with x,y,z columns (optionally vx,vy,vz), including the
/// trajectory schema; for trajectory files only the last row of each
/// sample_id is used. Throws InvalidArgument on schema mismatch.
std::vector<TargetState> read_targets(const std::filesystem::path& path);

struct TerminalClouds
{
  TerminalCloud position;
  TerminalCloud velocity;
};

TerminalClouds read_terminals(const std::filesystem::path& path);

double parse_double(const std::string& text);

}  // namespace reach
