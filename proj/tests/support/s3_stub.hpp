#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace rdfleet::testing {

/// In-process S3-compatible endpoint for tests: PUT/GET/HEAD/DELETE object and
/// ListObjectsV2 on a single bucket, with SigV4 verification and fault injection.
/// Objects live in memory, outside any directory a test may tear down.
class S3Stub {
 public:
  S3Stub(std::string access_key, std::string secret_key, std::string bucket = "rdfleet");
  ~S3Stub();
  S3Stub(const S3Stub&) = delete;
  S3Stub& operator=(const S3Stub&) = delete;

  void start();
  void stop();

  int port() const noexcept { return port_; }
  /// Endpoint URL including the bucket path.
  std::string endpoint() const;
  std::string endpoint_for_bucket(const std::string& bucket) const;

  /// The next `count` requests get HTTP `status` before being processed.
  void fail_next(int count, int status = 500);
  /// The next `count` requests stall past any reasonable client timeout.
  void stall_next(int count, int milliseconds);

  std::uint64_t requests() const noexcept { return requests_.load(); }
  std::size_t object_count() const;
  void clear();

 private:
  bool authorized(const void* request) const;

  std::string access_key_;
  std::string secret_key_;
  std::string bucket_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::map<std::string, std::string> objects_;
  int fail_count_ = 0;
  int fail_status_ = 500;
  int stall_count_ = 0;
  int stall_ms_ = 0;
  std::atomic<std::uint64_t> requests_{0};
};

}  // namespace rdfleet::testing
