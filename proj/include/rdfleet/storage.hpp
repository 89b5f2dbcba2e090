#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdfleet/error.hpp"

namespace rdfleet {

/// Common error taxonomy for every storage tier.
class StorageError : public Error {
 public:
  enum class Code {
    NotFound,          ///< key does not exist
    InvalidKey,        ///< key violates the key rules
    Auth,              ///< credentials rejected (never retried)
    MissingBucket,     ///< object-store bucket does not exist
    RetriesExhausted,  ///< transient failures outlasted the retry budget
    Io,                ///< filesystem or protocol failure
    Integrity,         ///< checksum mismatch that a refetch did not fix
  };

  StorageError(Code code, std::string key, const std::string& what)
      : Error(what), code_(code), key_(std::move(key)) {}

  Code code() const noexcept { return code_; }
  const std::string& key() const noexcept { return key_; }

 private:
  Code code_;
  std::string key_;
};

const char* to_string(StorageError::Code code);

inline constexpr std::size_t kMaxKeyLength = 512;

/// Keys are `namespace/name`: characters [A-Za-z0-9._-/], at most 512 long, at
/// least two non-empty '/'-separated segments, and no segment starting with '.'.
bool valid_key(std::string_view key);
void validate_key(std::string_view key);
std::string make_key(std::string_view ns, std::string_view name);

struct PutReceipt {
  std::string backend;
  std::uint64_t size = 0;
  std::uint64_t checksum = 0;  ///< XXH64, seed 0
};

using Bytes = std::vector<std::uint8_t>;

/// Blob store contract shared by the three tiers. All operations are safe to call
/// concurrently. `remove` is idempotent. `list(ns)` returns every live key under
/// `ns/`, sorted bytewise.
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;
  virtual std::string id() const = 0;
  virtual PutReceipt put(std::string_view key, std::span<const std::uint8_t> value) = 0;
  virtual Bytes get(std::string_view key) = 0;
  virtual void remove(std::string_view key) = 0;
  virtual std::vector<std::string> list(std::string_view ns) = 0;
  virtual bool exists(std::string_view key) = 0;

  PutReceipt put(std::string_view key, std::string_view text) {
    return put(key, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
};

/// Filesystem backend: one file per key under `root`, written to a temporary file
/// and renamed into place so readers never observe partial values.
class FileStorage : public StorageBackend {
 public:
  FileStorage(std::string id, std::filesystem::path root);

  std::string id() const override { return id_; }
  PutReceipt put(std::string_view key, std::span<const std::uint8_t> value) override;
  using StorageBackend::put;
  Bytes get(std::string_view key) override;
  void remove(std::string_view key) override;
  std::vector<std::string> list(std::string_view ns) override;
  bool exists(std::string_view key) override;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::string id_;
  std::filesystem::path root_;
};

/// Per-worker ephemeral cache. Defaults to `<tmp>/rdfleet-local-<pid>`.
class LocalStorage : public FileStorage {
 public:
  LocalStorage();
  explicit LocalStorage(std::filesystem::path root) : FileStorage("local", std::move(root)) {}
};

/// Cluster-lifetime storage in a shared directory; removing the directory loses it.
class SharedStorage : public FileStorage {
 public:
  explicit SharedStorage(std::filesystem::path root) : FileStorage("shared", std::move(root)) {}
};

/// Wraps a backend and counts calls; used to observe cache behaviour.
class CountingStorage : public StorageBackend {
 public:
  explicit CountingStorage(StorageBackend& inner) : inner_(inner) {}

  std::string id() const override { return inner_.id(); }
  PutReceipt put(std::string_view key, std::span<const std::uint8_t> value) override {
    ++puts;
    return inner_.put(key, value);
  }
  using StorageBackend::put;
  Bytes get(std::string_view key) override {
    ++gets;
    return inner_.get(key);
  }
  void remove(std::string_view key) override { inner_.remove(key); }
  std::vector<std::string> list(std::string_view ns) override { return inner_.list(ns); }
  bool exists(std::string_view key) override { return inner_.exists(key); }

  std::atomic<std::uint64_t> gets{0};
  std::atomic<std::uint64_t> puts{0};

 private:
  StorageBackend& inner_;
};

/// Read `key` through a local cache. The first call fetches from `origin` and stores
/// the value plus its checksum locally (checksum under `_meta/`); later calls are
/// served locally after verifying the checksum. A mismatch drops the cached copy and
/// refetches once; a second mismatch raises StorageError::Integrity. NotFound from the
/// origin propagates and leaves no cache entry.
Bytes cache_through(LocalStorage& local, StorageBackend& origin, std::string_view key);

/// Storage settings. Environment variables override the config file.
struct StorageConfig {
  std::string endpoint;  ///< object store URL including the bucket path, e.g. http://127.0.0.1:9000/rdfleet
  std::string access_key;
  std::string secret_key;
  std::string region = "us-east-1";
  std::filesystem::path shared_dir;
  std::filesystem::path local_dir;
  int max_attempts = 3;
  double backoff_seconds = 0.05;  ///< first retry delay; doubles per attempt
  double timeout_seconds = 10.0;

  /// Read the `[storage]` section of an INI file, then apply RF_STORAGE_ENDPOINT,
  /// RF_STORAGE_KEY, RF_STORAGE_SECRET and RF_SHARED_DIR from the environment.
  static StorageConfig load(const std::filesystem::path& ini_path);
  static StorageConfig from_env();
  void apply_env();
};

}  // namespace rdfleet
