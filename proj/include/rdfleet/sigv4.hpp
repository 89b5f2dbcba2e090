#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rdfleet {

/// AWS Signature Version 4 for the S3 REST subset (header-based signing).
struct SigV4Credentials {
  std::string access_key;
  std::string secret_key;
  std::string region = "us-east-1";
  std::string service = "s3";
};

struct SigV4Request {
  std::string method;
  std::string path;  ///< unencoded absolute path, e.g. "/bucket/ns/r0"
  std::vector<std::pair<std::string, std::string>> query;  ///< unencoded
  std::map<std::string, std::string> headers;  ///< lowercase names; must include host, x-amz-date
  std::string payload_hash;  ///< hex SHA-256 of the body (also sent as x-amz-content-sha256)
};

/// RFC 3986 percent-encoding with AWS rules; '/' is kept when `keep_slash`.
std::string uri_encode(std::string_view s, bool keep_slash);

std::string canonical_request(const SigV4Request& req);
std::string string_to_sign(const SigV4Request& req, const SigV4Credentials& creds, std::string_view amz_date);
std::string sigv4_signature(const SigV4Request& req, const SigV4Credentials& creds, std::string_view amz_date);
/// Full `Authorization` header value.
std::string sigv4_authorization(const SigV4Request& req, const SigV4Credentials& creds, std::string_view amz_date);

/// Current UTC time as YYYYMMDD'T'HHMMSS'Z'.
std::string amz_timestamp();

}  // namespace rdfleet
