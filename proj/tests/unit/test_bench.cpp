#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <filesystem>
#include <sstream>
#include <thread>

#include "rdfleet/bench.hpp"
#include "rdfleet/error.hpp"
#include "rdfleet/model_io.hpp"

using namespace rdfleet;
namespace fs = std::filesystem;

namespace {

BenchWorkload tiny() {
  BenchWorkload w;
  w.name = "tiny";
  w.model = parse_model(R"(
[mesh]
builtin grid 1 1.0 3
[species]
A 0.2
[reactions]
deg: A -> @ massaction(0.5)
[initial]
scatter A 50 1
[tspan]
linspace 0 1 3
)");
  w.postprocessor = "final_count:A";
  return w;
}

std::vector<std::string> csv_lines(const BenchReport& r) {
  std::ostringstream out;
  write_bench_csv(out, r);
  std::istringstream in(out.str());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("strong report structure") {
  const auto r = bench_strong(tiny(), 6, {1, 2, 3}, StorageMode::None);
  CHECK(r.mode == BenchMode::Strong);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].workers == 1);
  CHECK(r.rows[0].speedup == 1.0);
  CHECK(r.rows[0].efficiency == 1.0);
  CHECK(r.rows[0].serial_fraction == 0.0);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    CHECK(row.jobs == 6);
    CHECK(row.wall_seconds > 0.0);
    CHECK(row.speedup == Catch::Approx(r.rows[0].wall_seconds / row.wall_seconds));
    CHECK(row.efficiency == Catch::Approx(row.speedup / double(row.workers)));
    if (i > 0) {
      CHECK(row.workers > r.rows[i - 1].workers);
      // Karp-Flatt: e = (1/S - 1/p) / (1 - 1/p)
      const double p = double(row.workers);
      CHECK(row.serial_fraction == Catch::Approx((1.0 / row.speedup - 1.0 / p) / (1.0 - 1.0 / p)));
    }
  }
  CHECK(r.serial_fraction == Catch::Approx((r.rows[1].serial_fraction + r.rows[2].serial_fraction) / 2.0));
}

TEST_CASE("weak report grows the job count") {
  const auto r = bench_weak(tiny(), 3, {1, 2, 4}, StorageMode::None);
  CHECK(r.mode == BenchMode::Weak);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].jobs == 3);
  CHECK(r.rows[1].jobs == 6);
  CHECK(r.rows[2].jobs == 12);
  CHECK(r.rows[0].efficiency == 1.0);
  for (const auto& row : r.rows) {
    CHECK(row.efficiency == Catch::Approx(r.rows[0].wall_seconds / row.wall_seconds));
    CHECK(row.speedup == Catch::Approx(double(row.workers) * row.efficiency));
  }
}

TEST_CASE("stored bench cleans up after each row") {
  const auto root = fs::temp_directory_path() / ("rdfleet-bench-" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto storage = std::make_shared<SharedStorage>(root);
  const auto r = bench_strong(tiny(), 4, {1, 2}, StorageMode::Shared, storage);
  CHECK(r.storage == StorageMode::Shared);
  CHECK(storage->list("bench-strong-shared-w1").empty());
  CHECK(storage->list("bench-strong-shared-w2").empty());
  fs::remove_all(root);
  CHECK_THROWS_AS(bench_strong(tiny(), 4, {1}, StorageMode::Shared), Error);
}

TEST_CASE("worker counts must increase strictly") {
  CHECK_THROWS_AS(bench_strong(tiny(), 4, {}, StorageMode::None), Error);
  CHECK_THROWS_AS(bench_strong(tiny(), 4, {2, 2}, StorageMode::None), Error);
  CHECK_THROWS_AS(bench_strong(tiny(), 4, {4, 1}, StorageMode::None), Error);
  CHECK_THROWS_AS(bench_weak(tiny(), 4, {0, 1}, StorageMode::None), Error);
}

TEST_CASE("report schema") {
  const auto r = bench_strong(tiny(), 4, {1, 2}, StorageMode::None);
  const auto lines = csv_lines(r);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "mode,storage,workers,jobs,wall_seconds,speedup,efficiency,serial_fraction");
  CHECK(lines[1].rfind("strong,none,1,4,", 0) == 0);
  CHECK(lines[2].rfind("strong,none,2,4,", 0) == 0);

  const auto j = nlohmann::json::parse(bench_to_json(r));
  CHECK(j["schema_version"] == kBenchSchemaVersion);
  CHECK(j["mode"] == "strong");
  CHECK(j["storage"] == "none");
  CHECK(j["workload"] == "tiny");
  CHECK(j["hardware_threads"].is_number_unsigned());
  REQUIRE(j["rows"].size() == 2);
  for (const char* key : {"workers", "jobs", "wall_seconds", "speedup", "efficiency", "serial_fraction"}) {
    CHECK(j["rows"][1].contains(key));
  }
  CHECK(j["saturation"].contains("serial_fraction"));
  CHECK(j["saturation"].contains("speedup_limit"));
  CHECK(j["warnings"].is_array());

  // the structure does not depend on timings
  const auto again = nlohmann::json::parse(bench_to_json(bench_strong(tiny(), 4, {1, 2}, StorageMode::None)));
  CHECK(again["rows"].size() == j["rows"].size());
  CHECK(again["rows"][1]["jobs"] == j["rows"][1]["jobs"]);
}

TEST_CASE("oversubscription is flagged") {
  const auto many = static_cast<std::size_t>(std::thread::hardware_concurrency()) + 1;
  const auto r = bench_strong(tiny(), 2, std::vector<std::size_t>{1, many}, StorageMode::None);
  REQUIRE_FALSE(r.warnings.empty());
  CHECK(r.warnings[0].find("exceeds") != std::string::npos);
}

TEST_CASE("yeast bench workload validates") {
  const auto w = yeast_bench_workload(100, 1.0, 1);
  CHECK(validate_model(w.model).empty());
  CHECK(w.postprocessor == "polarization_stats:Cdc42_m");
  CHECK(w.name.find("N=100") != std::string::npos);
}
