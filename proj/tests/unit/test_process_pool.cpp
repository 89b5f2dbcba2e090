#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "rdfleet/process_pool.hpp"
#include "rdfleet/rng.hpp"

using namespace rdfleet;
namespace fs = std::filesystem;

namespace {

Bytes encode(std::uint64_t v) {
  Bytes b(8);
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return b;
}

std::vector<std::uint64_t> iota(std::uint64_t n) {
  std::vector<std::uint64_t> v(n);
  for (std::uint64_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

bool no_children_left() {
  errno = 0;
  return ::waitpid(-1, nullptr, WNOHANG) == -1 && errno == ECHILD;
}

}  // namespace

TEST_CASE("results come back in index order for any worker count") {
  const auto fn = [](std::uint64_t i) { return encode(derive_seed(5, i)); };
  const auto indices = iota(40);
  std::vector<TaskOutcome> reference;
  for (std::size_t workers : {0u, 1u, 2u, 8u}) {
    PoolOptions o;
    o.workers = workers;
    auto out = run_tasks(indices, fn, o);
    REQUIRE(out.size() == 40);
    for (std::size_t k = 0; k < out.size(); ++k) {
      CHECK(out[k].index == k);
      CHECK(out[k].ok);
      CHECK(out[k].attempts == 1);
      CHECK(out[k].payload == encode(derive_seed(5, k)));
    }
  }
  CHECK(no_children_left());
}

TEST_CASE("outcomes follow the order of the given indices") {
  PoolOptions o;
  o.workers = 3;
  const std::vector<std::uint64_t> indices{9, 2, 7, 0};
  auto out = run_tasks(indices, [](std::uint64_t i) { return encode(i * 10); }, o);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    CHECK(out[k].index == indices[k]);
    CHECK(out[k].payload == encode(indices[k] * 10));
  }
}

TEST_CASE("empty task list") {
  PoolOptions o;
  o.workers = 4;
  CHECK(run_tasks({}, [](std::uint64_t) { return Bytes{}; }, o).empty());
}

TEST_CASE("a crashed worker is replaced and the task retried") {
  PoolOptions o;
  o.workers = 2;
  o.crash_on_first_attempt = 7;
  auto out = run_tasks(iota(12), [](std::uint64_t i) { return encode(i); }, o);
  for (const auto& t : out) {
    CHECK(t.ok);
    CHECK(t.payload == encode(t.index));
    CHECK(t.attempts == (t.index == 7 ? 2 : 1));
  }
  CHECK(no_children_left());
}

TEST_CASE("a task that throws once succeeds on retry") {
  const auto marker = fs::temp_directory_path() / ("rdfleet-pool-marker-" + std::to_string(::getpid()));
  fs::remove(marker);
  const auto fn = [&](std::uint64_t i) {
    if (i == 3 && !fs::exists(marker)) {
      std::ofstream(marker) << "seen";
      throw std::runtime_error("transient");
    }
    return encode(i);
  };
  for (std::size_t workers : {0u, 2u}) {
    fs::remove(marker);
    PoolOptions o;
    o.workers = workers;
    auto out = run_tasks(iota(5), fn, o);
    CHECK(out[3].ok);
    CHECK(out[3].attempts == 2);
  }
  fs::remove(marker);
}

TEST_CASE("a task that always fails is reported after two attempts") {
  for (std::size_t workers : {0u, 2u}) {
    PoolOptions o;
    o.workers = workers;
    auto out = run_tasks(
        iota(6),
        [](std::uint64_t i) -> Bytes {
          if (i == 4) throw std::runtime_error("boom on 4");
          return encode(i);
        },
        o);
    CHECK_FALSE(out[4].ok);
    CHECK(out[4].attempts == 2);
    CHECK(out[4].error.find("boom on 4") != std::string::npos);
    CHECK(out[5].ok);
  }
}

TEST_CASE("a task that always crashes is reported") {
  PoolOptions o;
  o.workers = 2;
  auto out = run_tasks(
      iota(4),
      [](std::uint64_t i) -> Bytes {
        if (i == 1) ::_exit(3);
        return encode(i);
      },
      o);
  CHECK_FALSE(out[1].ok);
  CHECK(out[1].attempts == 2);
  CHECK(out[0].ok);
  CHECK(out[3].ok);
  CHECK(no_children_left());
}

TEST_CASE("large payloads pass through the pipes intact") {
  PoolOptions o;
  o.workers = 2;
  auto out = run_tasks(
      iota(3),
      [](std::uint64_t i) {
        Bytes b(8 << 20);
        RandomStream rng(i);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng.next_u64());
        return b;
      },
      o);
  for (const auto& t : out) {
    REQUIRE(t.ok);
    RandomStream rng(t.index);
    Bytes expect(8 << 20);
    for (auto& x : expect) x = static_cast<std::uint8_t>(rng.next_u64());
    CHECK(t.payload == expect);
  }
}
