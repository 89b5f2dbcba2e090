#pragma once

#include <atomic>
#include <string>

#include "rdfleet/sigv4.hpp"
#include "rdfleet/storage.hpp"

namespace rdfleet {

/// Persistent tier over the S3-compatible REST subset: PUT/GET/DELETE/HEAD object
/// and ListObjectsV2. Requests are signed with SigV4 (docs/storage-signing.md).
/// 5xx responses and connection failures are retried with exponential backoff up
/// to `max_attempts` total attempts; 403 is reported immediately.
class PersistentStorage : public StorageBackend {
 public:
  explicit PersistentStorage(const StorageConfig& config);

  std::string id() const override { return "persistent"; }
  PutReceipt put(std::string_view key, std::span<const std::uint8_t> value) override;
  using StorageBackend::put;
  Bytes get(std::string_view key) override;
  void remove(std::string_view key) override;
  std::vector<std::string> list(std::string_view ns) override;
  bool exists(std::string_view key) override;

  const std::string& bucket() const noexcept { return bucket_; }
  /// Number of HTTP requests sent, retries included.
  std::uint64_t requests_sent() const noexcept { return requests_.load(); }

 private:
  struct Response {
    int status = 0;
    std::string body;
  };
  Response send(const std::string& method, const std::string& object_key,
                const std::vector<std::pair<std::string, std::string>>& query, const std::string& body,
                const std::string& key_for_errors);

  std::string scheme_host_port_;
  std::string host_header_;
  std::string bucket_;
  SigV4Credentials creds_;
  int max_attempts_;
  double backoff_seconds_;
  double timeout_seconds_;
  std::atomic<std::uint64_t> requests_{0};
};

/// `object_store_client(endpoint, credentials)`: convenience constructor.
PersistentStorage object_store_client(const std::string& endpoint, const std::string& access_key,
                                      const std::string& secret_key);

}  // namespace rdfleet
