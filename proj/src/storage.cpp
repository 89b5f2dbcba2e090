#include "rdfleet/storage.hpp"

#include <unistd.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <system_error>
#include <thread>

#include "rdfleet/hash.hpp"

namespace fs = std::filesystem;

namespace rdfleet {

const char* to_string(StorageError::Code code) {
  switch (code) {
    case StorageError::Code::NotFound: return "not-found";
    case StorageError::Code::InvalidKey: return "invalid-key";
    case StorageError::Code::Auth: return "auth";
    case StorageError::Code::MissingBucket: return "missing-bucket";
    case StorageError::Code::RetriesExhausted: return "retries-exhausted";
    case StorageError::Code::Io: return "io";
    case StorageError::Code::Integrity: return "integrity";
  }
  return "unknown";
}

bool valid_key(std::string_view key) {
  if (key.empty() || key.size() > kMaxKeyLength) return false;
  for (char c : key) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '-' || c == '/';
    if (!ok) return false;
  }
  std::size_t segments = 0;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto slash = key.find('/', start);
    const auto seg = key.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    if (seg.empty() || seg.front() == '.') return false;
    ++segments;
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return segments >= 2;
}

void validate_key(std::string_view key) {
  if (!valid_key(key)) {
    throw StorageError(StorageError::Code::InvalidKey, std::string(key), "invalid storage key '" + std::string(key) + "'");
  }
}

std::string make_key(std::string_view ns, std::string_view name) {
  std::string key;
  key.reserve(ns.size() + 1 + name.size());
  key.append(ns).append("/").append(name);
  validate_key(key);
  return key;
}

static void validate_namespace(std::string_view ns) {
  if (!valid_key(std::string(ns) + "/x")) {
    throw StorageError(StorageError::Code::InvalidKey, std::string(ns), "invalid namespace '" + std::string(ns) + "'");
  }
}

FileStorage::FileStorage(std::string id, fs::path root) : id_(std::move(id)), root_(std::move(root)) {}

PutReceipt FileStorage::put(std::string_view key, std::span<const std::uint8_t> value) {
  validate_key(key);
  const fs::path target = root_ / fs::path(std::string(key));
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  fs::create_directories(root_ / ".tmp", ec);
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream name;
  name << getpid() << '-' << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '-' << counter++;
  const fs::path tmp = root_ / ".tmp" / name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(value.data()), static_cast<std::streamsize>(value.size()));
    out.close();
    if (!out) {
      fs::remove(tmp, ec);
      throw StorageError(StorageError::Code::Io, std::string(key), "cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StorageError(StorageError::Code::Io, std::string(key), "cannot publish " + target.string() + ": " + ec.message());
  }
  return {id_, value.size(), xxh64(value, 0)};
}

Bytes FileStorage::get(std::string_view key) {
  validate_key(key);
  const fs::path path = root_ / fs::path(std::string(key));
  std::ifstream in(path, std::ios::binary);
  if (!in || fs::is_directory(path)) {
    throw StorageError(StorageError::Code::NotFound, std::string(key), id_ + ": no such key '" + std::string(key) + "'");
  }
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw StorageError(StorageError::Code::Io, std::string(key), "cannot read " + path.string());
  return bytes;
}

void FileStorage::remove(std::string_view key) {
  validate_key(key);
  std::error_code ec;
  const fs::path path = root_ / fs::path(std::string(key));
  const auto status = fs::status(path, ec);
  if (ec || !fs::is_regular_file(status)) return;  // already gone
  fs::remove(path, ec);
  if (ec) throw StorageError(StorageError::Code::Io, std::string(key), "cannot delete " + path.string());
}

std::vector<std::string> FileStorage::list(std::string_view ns) {
  validate_namespace(ns);
  std::vector<std::string> keys;
  const fs::path dir = root_ / fs::path(std::string(ns));
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return keys;
  for (fs::recursive_directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file(ec)) keys.push_back(fs::relative(it->path(), root_).generic_string());
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

bool FileStorage::exists(std::string_view key) {
  validate_key(key);
  std::error_code ec;
  return fs::is_regular_file(root_ / fs::path(std::string(key)), ec);
}

LocalStorage::LocalStorage() : FileStorage("local", fs::temp_directory_path() / ("rdfleet-local-" + std::to_string(getpid()))) {}

Bytes cache_through(LocalStorage& local, StorageBackend& origin, std::string_view key) {
  validate_key(key);
  const std::string meta = "_meta/" + std::string(key);
  auto read_checksum = [&]() -> std::optional<std::uint64_t> {
    if (!local.exists(meta)) return std::nullopt;
    const auto raw = local.get(meta);
    try {
      return std::stoull(std::string(raw.begin(), raw.end()), nullptr, 16);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  if (local.exists(key)) {
    if (const auto expected = read_checksum()) {
      auto bytes = local.get(key);
      if (xxh64(bytes, 0) == *expected) return bytes;
    }
    local.remove(key);
    local.remove(meta);
  }

  for (int attempt = 0; attempt < 2; ++attempt) {
    auto bytes = origin.get(key);
    const auto checksum = xxh64(bytes, 0);
    local.put(key, bytes);
    std::ostringstream hex;
    hex << std::hex << checksum;
    local.put(meta, hex.str());
    if (xxh64(local.get(key), 0) == checksum) return bytes;
    local.remove(key);
    local.remove(meta);
  }
  throw StorageError(StorageError::Code::Integrity, std::string(key),
                     "cached copy of '" + std::string(key) + "' failed checksum after refetch");
}

void StorageConfig::apply_env() {
  if (const char* v = std::getenv("RF_STORAGE_ENDPOINT")) endpoint = v;
  if (const char* v = std::getenv("RF_STORAGE_KEY")) access_key = v;
  if (const char* v = std::getenv("RF_STORAGE_SECRET")) secret_key = v;
  if (const char* v = std::getenv("RF_SHARED_DIR")) shared_dir = v;
}

StorageConfig StorageConfig::from_env() {
  StorageConfig c;
  c.apply_env();
  return c;
}

StorageConfig StorageConfig::load(const fs::path& ini_path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(ini_path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("cannot read storage config: " + std::string(e.what()));
  }
  StorageConfig c;
  if (const auto section = tree.get_child_optional("storage")) {
    c.endpoint = section->get("endpoint", c.endpoint);
    c.access_key = section->get("key", c.access_key);
    c.secret_key = section->get("secret", c.secret_key);
    c.region = section->get("region", c.region);
    c.shared_dir = section->get("shared_dir", c.shared_dir.string());
    c.local_dir = section->get("local_dir", c.local_dir.string());
    c.max_attempts = section->get("max_attempts", c.max_attempts);
    c.backoff_seconds = section->get("backoff_seconds", c.backoff_seconds);
    c.timeout_seconds = section->get("timeout_seconds", c.timeout_seconds);
  }
  c.apply_env();
  return c;
}

}  // namespace rdfleet
