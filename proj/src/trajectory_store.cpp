#include "rdfleet/trajectory_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>

#include "rdfleet/hash.hpp"
#include "rdfleet/model_io.hpp"

namespace rdfleet {
namespace {

static_assert(std::endian::native == std::endian::little, "trajectory I/O assumes a little-endian host");

constexpr char kMagic[8] = {'R', 'F', 'T', 'R', 'A', 'J', '0', '1'};
constexpr std::size_t kHeaderSize = 8 + 4 + 32 + 8 + 4 + 4 + 4;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

using Code = TrajectoryFormatError::Code;

}  // namespace

std::vector<std::uint8_t> encode_trajectory(const Trajectory& traj) {
  const std::size_t k = traj.num_voxels;
  const std::size_t s = traj.num_species;
  const std::size_t t = traj.num_times();
  constexpr auto u32_max = std::numeric_limits<std::uint32_t>::max();
  if (k > u32_max || s > u32_max || t > u32_max) throw SerializationOverflow("trajectory dimensions exceed 2^32-1");
  if (traj.counts.size() != k * s * t) throw Error("trajectory count block does not match its dimensions");

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 8 * t + 4 * k * s * t + 8);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kTrajectoryVersion);
  out.insert(out.end(), traj.model_hash.begin(), traj.model_hash.end());
  put<std::uint64_t>(out, traj.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(k));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t));
  for (double time : traj.tspan) put<double>(out, time);
  for (std::size_t idx = 0; idx < traj.counts.size(); ++idx) {
    const auto c = traj.counts[idx];
    if (c < 0 || static_cast<std::uint64_t>(c) > u32_max) {
      const auto cell = idx % (k * s);
      throw SerializationOverflow("count " + std::to_string(c) + " at time index " + std::to_string(idx / (k * s)) +
                                  ", voxel " + std::to_string(cell / s) + ", species " + std::to_string(cell % s) +
                                  " does not fit in 32 bits");
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c));
  }
  put<std::uint64_t>(out, xxh64(out, 0));
  return out;
}

Trajectory decode_trajectory(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw TrajectoryFormatError(Code::BadMagic, "not a trajectory file (bad magic)");
  }
  if (bytes.size() < kHeaderSize) throw TrajectoryFormatError(Code::SizeMismatch, "trajectory header truncated");
  std::size_t pos = 8;
  const auto version = get<std::uint32_t>(bytes, pos);
  if ((version & 0xFFFFu) != kTrajectoryVersion) {
    throw TrajectoryFormatError(Code::VersionMismatch, "unsupported trajectory version " +
                                                           std::to_string(version & 0xFFFFu));
  }
  if (((version >> 16) & 0xFFu) != 0) {
    throw TrajectoryFormatError(Code::VersionMismatch,
                                "unsupported trajectory codec " + std::to_string((version >> 16) & 0xFFu));
  }
  Trajectory traj;
  std::memcpy(traj.model_hash.data(), bytes.data() + pos, 32);
  pos += 32;
  traj.seed = get<std::uint64_t>(bytes, pos);
  traj.num_voxels = get<std::uint32_t>(bytes, pos);
  traj.num_species = get<std::uint32_t>(bytes, pos);
  const std::size_t t = get<std::uint32_t>(bytes, pos);
  const std::size_t cells = traj.num_voxels * traj.num_species * t;
  const std::size_t expected = kHeaderSize + 8 * t + 4 * cells + 8;
  if (bytes.size() != expected) {
    throw TrajectoryFormatError(Code::SizeMismatch, "trajectory is " + std::to_string(bytes.size()) +
                                                        " bytes, header implies " + std::to_string(expected));
  }
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + expected - 8, 8);
  if (xxh64(bytes.first(expected - 8), 0) != stored) {
    throw TrajectoryFormatError(Code::ChecksumFailure, "trajectory checksum mismatch");
  }
  traj.tspan.resize(t);
  for (auto& time : traj.tspan) time = get<double>(bytes, pos);
  traj.counts.resize(cells);
  for (auto& c : traj.counts) c = get<std::uint32_t>(bytes, pos);
  return traj;
}

std::size_t write_trajectory(const Trajectory& traj, std::ostream& sink) {
  const auto bytes = encode_trajectory(traj);
  sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw Error("failed writing trajectory (" + std::to_string(bytes.size()) + " bytes)");
  return bytes.size();
}

Trajectory read_trajectory(std::istream& source) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  if (source.bad()) throw Error("failed reading trajectory stream");
  return decode_trajectory(bytes);
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_trajectory(traj, out);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trajectory " + path.string());
  return read_trajectory(in);
}

std::vector<std::pair<double, std::int64_t>> timeseries(const Trajectory& traj, std::size_t species, Scope scope,
                                                        const SubdomainMap* labels) {
  if (species >= traj.num_species) throw ModelError("species index " + std::to_string(species) + " out of range");
  std::vector<std::uint32_t> voxels;
  switch (scope.kind) {
    case Scope::Kind::Voxel:
      if (scope.value < 0 || static_cast<std::size_t>(scope.value) >= traj.num_voxels) {
        throw ModelError("voxel " + std::to_string(scope.value) + " out of range");
      }
      voxels.push_back(static_cast<std::uint32_t>(scope.value));
      break;
    case Scope::Kind::Subdomain:
      if (labels == nullptr || !labels->has(static_cast<int>(scope.value))) {
        throw ModelError("unknown subdomain label " + std::to_string(scope.value));
      }
      voxels = labels->members(static_cast<int>(scope.value));
      break;
    case Scope::Kind::Whole:
      voxels.resize(traj.num_voxels);
      for (std::size_t i = 0; i < voxels.size(); ++i) voxels[i] = static_cast<std::uint32_t>(i);
      break;
  }
  std::vector<std::pair<double, std::int64_t>> out;
  out.reserve(traj.num_times());
  for (std::size_t t = 0; t < traj.num_times(); ++t) {
    std::int64_t sum = 0;
    for (auto v : voxels) sum += traj.at(t, v, species);
    out.emplace_back(traj.tspan[t], sum);
  }
  return out;
}

std::vector<std::pair<double, std::int64_t>> timeseries(const Trajectory& traj, const ModelSpec& model,
                                                        std::string_view species, Scope scope) {
  const auto idx = model.species_index(species);
  if (!idx) throw ModelError("unknown species '" + std::string(species) + "'");
  return timeseries(traj, *idx, scope, model.subdomains.get());
}

void export_csv(const Trajectory& traj, const ModelSpec& model, std::ostream& out) {
  if (model.species.size() != traj.num_species) throw ModelError("model and trajectory disagree on species count");
  out << "t,species,voxel,count\n";
  for (std::size_t t = 0; t < traj.num_times(); ++t) {
    const auto time = format_double(traj.tspan[t]);
    for (std::size_t s = 0; s < traj.num_species; ++s) {
      for (std::size_t v = 0; v < traj.num_voxels; ++v) {
        out << time << ',' << model.species[s].name << ',' << v << ',' << traj.at(t, v, s) << '\n';
      }
    }
  }
  if (!out) throw Error("failed writing CSV");
}

void export_csv(const Trajectory& traj, const ModelSpec& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  export_csv(traj, model, out);
}

void export_mesh_snapshot(const Trajectory& traj, const ModelSpec& model, std::size_t t_index, std::ostream& out) {
  if (t_index >= traj.num_times()) throw ModelError("time index " + std::to_string(t_index) + " out of range");
  if (!model.mesh || model.mesh->num_voxels() != traj.num_voxels) {
    throw ModelError("model mesh does not match the trajectory");
  }
  out << "x,y,z,subdomain";
  for (const auto& s : model.species) out << ',' << s.name;
  out << '\n';
  const auto& coords = model.mesh->coords();
  for (std::size_t v = 0; v < traj.num_voxels; ++v) {
    out << format_double(coords[v].x) << ',' << format_double(coords[v].y) << ',' << format_double(coords[v].z) << ','
        << model.subdomains->labels[v];
    for (std::size_t s = 0; s < traj.num_species; ++s) out << ',' << traj.at(t_index, v, s);
    out << '\n';
  }
  if (!out) throw Error("failed writing snapshot");
}

void export_mesh_snapshot(const Trajectory& traj, const ModelSpec& model, std::size_t t_index,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  export_mesh_snapshot(traj, model, t_index, out);
}

}  // namespace rdfleet
