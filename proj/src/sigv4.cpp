#include "rdfleet/sigv4.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "rdfleet/hash.hpp"

namespace rdfleet {
namespace {

std::string hex(const Sha256Digest& d) { return to_hex(d); }

std::string digest_string(const Sha256Digest& d) { return std::string(reinterpret_cast<const char*>(d.data()), d.size()); }

std::string signed_header_list(const SigV4Request& req) {
  std::string out;
  for (const auto& [name, value] : req.headers) {
    if (!out.empty()) out += ';';
    out += name;
  }
  return out;
}

std::string trim_value(std::string_view v) {
  while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
  while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
  std::string out;
  bool space = false;
  for (char c : v) {
    if (c == ' ') {
      if (!space) out += c;
      space = true;
    } else {
      out += c;
      space = false;
    }
  }
  return out;
}

}  // namespace

std::string uri_encode(std::string_view s, bool keep_slash) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
        c == '.' || c == '~' || (keep_slash && c == '/')) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

std::string canonical_request(const SigV4Request& req) {
  std::vector<std::pair<std::string, std::string>> query;
  for (const auto& [k, v] : req.query) query.emplace_back(uri_encode(k, false), uri_encode(v, false));
  std::sort(query.begin(), query.end());
  std::string q;
  for (const auto& [k, v] : query) {
    if (!q.empty()) q += '&';
    q += k + "=" + v;
  }
  std::string out = req.method + "\n" + uri_encode(req.path.empty() ? "/" : req.path, true) + "\n" + q + "\n";
  for (const auto& [name, value] : req.headers) out += name + ":" + trim_value(value) + "\n";
  out += "\n" + signed_header_list(req) + "\n" + req.payload_hash;
  return out;
}

std::string string_to_sign(const SigV4Request& req, const SigV4Credentials& creds, std::string_view amz_date) {
  const std::string date(amz_date.substr(0, 8));
  return "AWS4-HMAC-SHA256\n" + std::string(amz_date) + "\n" + date + "/" + creds.region + "/" + creds.service +
         "/aws4_request\n" + hex(sha256(canonical_request(req)));
}

std::string sigv4_signature(const SigV4Request& req, const SigV4Credentials& creds, std::string_view amz_date) {
  const std::string date(amz_date.substr(0, 8));
  const auto k_date = hmac_sha256("AWS4" + creds.secret_key, date);
  const auto k_region = hmac_sha256(digest_string(k_date), creds.region);
  const auto k_service = hmac_sha256(digest_string(k_region), creds.service);
  const auto k_signing = hmac_sha256(digest_string(k_service), "aws4_request");
  return hex(hmac_sha256(digest_string(k_signing), string_to_sign(req, creds, amz_date)));
}

std::string sigv4_authorization(const SigV4Request& req, const SigV4Credentials& creds, std::string_view amz_date) {
  const std::string date(amz_date.substr(0, 8));
  return "AWS4-HMAC-SHA256 Credential=" + creds.access_key + "/" + date + "/" + creds.region + "/" + creds.service +
         "/aws4_request,SignedHeaders=" + signed_header_list(req) +
         ",Signature=" + sigv4_signature(req, creds, amz_date);
}

std::string amz_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

}  // namespace rdfleet
