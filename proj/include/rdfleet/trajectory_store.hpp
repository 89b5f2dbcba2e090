#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rdfleet/error.hpp"
#include "rdfleet/model.hpp"
#include "rdfleet/trajectory.hpp"

namespace rdfleet {

/// Reading a trajectory file failed. Each failure kind has its own code.
class TrajectoryFormatError : public Error {
 public:
  enum class Code { BadMagic, VersionMismatch, SizeMismatch, ChecksumFailure };

  TrajectoryFormatError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// A count does not fit the file's 32-bit unsigned count field.
class SerializationOverflow : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t kTrajectoryVersion = 1;

/// File layout (little-endian, see docs/trajectory-format.md):
///   "RFTRAJ01" | u32 version | 32-byte model hash | u64 seed | u32 K | u32 S | u32 T
///   | T x f64 tspan | T x K x S u32 counts | u64 XXH64(seed 0) of all preceding bytes
std::vector<std::uint8_t> encode_trajectory(const Trajectory& traj);
Trajectory decode_trajectory(std::span<const std::uint8_t> bytes);

/// Returns the number of bytes written. Stream failures throw Error.
std::size_t write_trajectory(const Trajectory& traj, std::ostream& sink);
Trajectory read_trajectory(std::istream& source);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

/// Aggregation scope for timeseries().
struct Scope {
  enum class Kind { Voxel, Subdomain, Whole };
  Kind kind = Kind::Whole;
  std::int64_t value = 0;

  static Scope voxel(std::size_t i) { return {Kind::Voxel, static_cast<std::int64_t>(i)}; }
  static Scope subdomain(int label) { return {Kind::Subdomain, label}; }
  static Scope whole() { return {}; }
};

/// Per-output-time sums of one species over a scope. Subdomain scopes need `labels`.
std::vector<std::pair<double, std::int64_t>> timeseries(const Trajectory& traj, std::size_t species, Scope scope,
                                                        const SubdomainMap* labels = nullptr);
std::vector<std::pair<double, std::int64_t>> timeseries(const Trajectory& traj, const ModelSpec& model,
                                                        std::string_view species, Scope scope);

/// CSV with header `t,species,voxel,count`, one row per (time, species, voxel).
void export_csv(const Trajectory& traj, const ModelSpec& model, std::ostream& out);
void export_csv(const Trajectory& traj, const ModelSpec& model, const std::filesystem::path& path);

/// CSV with header `x,y,z,subdomain,<species...>`, one row per voxel at output `t_index`.
void export_mesh_snapshot(const Trajectory& traj, const ModelSpec& model, std::size_t t_index, std::ostream& out);
void export_mesh_snapshot(const Trajectory& traj, const ModelSpec& model, std::size_t t_index,
                          const std::filesystem::path& path);

}  // namespace rdfleet
