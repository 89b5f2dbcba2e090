#include "rdfleet/object_store.hpp"

#include <httplib.h>

#include <chrono>
#include <regex>
#include <thread>

#include "rdfleet/hash.hpp"

namespace rdfleet {
namespace {

std::string xml_field(const std::string& body, const std::string& tag) {
  const auto open = body.find("<" + tag + ">");
  if (open == std::string::npos) return {};
  const auto start = open + tag.size() + 2;
  const auto close = body.find("</" + tag + ">", start);
  return close == std::string::npos ? std::string{} : body.substr(start, close - start);
}

std::string xml_unescape(std::string s) {
  static const std::pair<const char*, const char*> kEntities[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (const auto& [from, to] : kEntities) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + 1)) {
      s.replace(pos, std::strlen(from), to);
    }
  }
  return s;
}

}  // namespace

PersistentStorage::PersistentStorage(const StorageConfig& config)
    : creds_{config.access_key, config.secret_key, config.region, "s3"},
      max_attempts_(std::max(1, config.max_attempts)),
      backoff_seconds_(config.backoff_seconds),
      timeout_seconds_(config.timeout_seconds) {
  static const std::regex kUrl(R"(^(http)://([^/:]+)(:(\d+))?(/([A-Za-z0-9._-]+))?/?$)");
  std::smatch m;
  if (!std::regex_match(config.endpoint, m, kUrl)) {
    throw StorageError(StorageError::Code::Io, "",
                       "object store endpoint must look like http://host[:port][/bucket], got '" + config.endpoint + "'");
  }
  const std::string port = m[4].matched ? m[4].str() : "80";
  scheme_host_port_ = m[1].str() + "://" + m[2].str() + ":" + port;
  host_header_ = m[4].matched ? m[2].str() + ":" + port : m[2].str();
  bucket_ = m[6].matched ? m[6].str() : "rdfleet";
}

PersistentStorage::Response PersistentStorage::send(const std::string& method, const std::string& object_key,
                                                    const std::vector<std::pair<std::string, std::string>>& query,
                                                    const std::string& body, const std::string& key_for_errors) {
  const std::string path = "/" + bucket_ + (object_key.empty() ? "" : "/" + object_key);
  std::string target = uri_encode(path, true);
  for (std::size_t i = 0; i < query.size(); ++i) {
    target += (i == 0 ? "?" : "&") + uri_encode(query[i].first, false) + "=" + uri_encode(query[i].second, false);
  }
  const std::string payload_hash = to_hex(sha256(body));

  std::string last_error;
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff_seconds_ * (1 << (attempt - 1))));
    }
    SigV4Request req{method, path, query, {}, payload_hash};
    req.headers["host"] = host_header_;
    req.headers["x-amz-content-sha256"] = payload_hash;
    req.headers["x-amz-date"] = amz_timestamp();

    httplib::Headers headers{{"Host", host_header_},
                             {"x-amz-content-sha256", payload_hash},
                             {"x-amz-date", req.headers["x-amz-date"]},
                             {"Authorization", sigv4_authorization(req, creds_, req.headers["x-amz-date"])}};
    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(timeout_seconds_));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    ++requests_;

    httplib::Result res;
    if (method == "GET") {
      res = client.Get(target, headers);
    } else if (method == "PUT") {
      res = client.Put(target, headers, body, "application/octet-stream");
    } else if (method == "DELETE") {
      res = client.Delete(target, headers);
    } else {
      res = client.Head(target, headers);
    }
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status == 403) {
      throw StorageError(StorageError::Code::Auth, key_for_errors,
                         "object store rejected credentials (403 " + xml_field(res->body, "Code") + ")");
    }
    return {res->status, res->body};
  }
  throw StorageError(StorageError::Code::RetriesExhausted, key_for_errors,
                     method + " " + path + " failed after " + std::to_string(max_attempts_) + " attempts: " + last_error);
}

namespace {

[[noreturn]] void raise_for_status(int status, const std::string& body, const std::string& key, const std::string& bucket) {
  const auto code = xml_field(body, "Code");
  if (status == 404 && code == "NoSuchBucket") {
    throw StorageError(StorageError::Code::MissingBucket, key, "bucket '" + bucket + "' does not exist");
  }
  if (status == 404) throw StorageError(StorageError::Code::NotFound, key, "persistent: no such key '" + key + "'");
  throw StorageError(StorageError::Code::Io, key, "object store returned HTTP " + std::to_string(status) + " " + code);
}

}  // namespace

PutReceipt PersistentStorage::put(std::string_view key, std::span<const std::uint8_t> value) {
  validate_key(key);
  const std::string k(key);
  const std::string body(reinterpret_cast<const char*>(value.data()), value.size());
  const auto res = send("PUT", k, {}, body, k);
  if (res.status != 200) raise_for_status(res.status, res.body, k, bucket_);
  return {id(), value.size(), xxh64(value, 0)};
}

Bytes PersistentStorage::get(std::string_view key) {
  validate_key(key);
  const std::string k(key);
  const auto res = send("GET", k, {}, "", k);
  if (res.status != 200) raise_for_status(res.status, res.body, k, bucket_);
  return Bytes(res.body.begin(), res.body.end());
}

void PersistentStorage::remove(std::string_view key) {
  validate_key(key);
  const std::string k(key);
  const auto res = send("DELETE", k, {}, "", k);
  if (res.status != 204 && res.status != 200) raise_for_status(res.status, res.body, k, bucket_);
}

bool PersistentStorage::exists(std::string_view key) {
  validate_key(key);
  const std::string k(key);
  const auto res = send("HEAD", k, {}, "", k);
  if (res.status == 200) return true;
  if (res.status == 404) {
    // HEAD responses carry no body, so confirm the bucket with a listing.
    const auto probe = send("GET", "", {{"list-type", "2"}, {"max-keys", "1"}}, "", k);
    if (probe.status == 404) raise_for_status(404, probe.body, k, bucket_);
    return false;
  }
  raise_for_status(res.status, res.body, k, bucket_);
}

std::vector<std::string> PersistentStorage::list(std::string_view ns) {
  if (!valid_key(std::string(ns) + "/x")) {
    throw StorageError(StorageError::Code::InvalidKey, std::string(ns), "invalid namespace '" + std::string(ns) + "'");
  }
  std::vector<std::string> keys;
  std::string token;
  while (true) {
    std::vector<std::pair<std::string, std::string>> query{{"list-type", "2"}, {"prefix", std::string(ns) + "/"}};
    if (!token.empty()) query.emplace_back("continuation-token", token);
    const auto res = send("GET", "", query, "", std::string(ns));
    if (res.status != 200) raise_for_status(res.status, res.body, std::string(ns), bucket_);
    std::size_t pos = 0;
    while ((pos = res.body.find("<Key>", pos)) != std::string::npos) {
      const auto end = res.body.find("</Key>", pos);
      keys.push_back(xml_unescape(res.body.substr(pos + 5, end - pos - 5)));
      pos = end;
    }
    if (xml_field(res.body, "IsTruncated") != "true") break;
    token = xml_unescape(xml_field(res.body, "NextContinuationToken"));
    if (token.empty()) break;
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

PersistentStorage object_store_client(const std::string& endpoint, const std::string& access_key,
                                      const std::string& secret_key) {
  StorageConfig config;
  config.endpoint = endpoint;
  config.access_key = access_key;
  config.secret_key = secret_key;
  return PersistentStorage(config);
}

}  // namespace rdfleet
