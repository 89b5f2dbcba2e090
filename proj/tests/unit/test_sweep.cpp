#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "rdfleet/error.hpp"
#include "rdfleet/hash.hpp"
#include "rdfleet/model_io.hpp"
#include "rdfleet/sweep.hpp"

using namespace rdfleet;
namespace fs = std::filesystem;

namespace {

const char* kBirthDeath = R"(
[model]
name bd
[mesh]
builtin grid 1 1.0 2
[species]
A 0.1
[parameters]
kp 5
kd 0.5
c 1
[reactions]
prod: 0 -> A @ massaction(kp)
deg: A -> @ massaction(kd)
extra: 0 -> A @ expr("c")
[tspan]
linspace 0 2 3
)";

EnsembleOptions opts(std::size_t w) {
  EnsembleOptions o;
  o.workers = w;
  return o;
}

SweepSpec spec_2x3() {
  SweepSpec s;
  s.axes = {{"kp", {2.0, 8.0}}, {"kd", {0.25, 0.5, 1.0}}};
  s.ensemble_size = 20;
  s.postprocessor = "final_count:A";
  s.base_seed = 77;
  return s;
}

}  // namespace

TEST_CASE("points enumerate the cartesian product, last axis fastest") {
  const auto pts = sweep_points(spec_2x3());
  REQUIRE(pts.size() == 6);
  CHECK(pts[0] == ParamPoint{{"kp", 2.0}, {"kd", 0.25}});
  CHECK(pts[1] == ParamPoint{{"kp", 2.0}, {"kd", 0.5}});
  CHECK(pts[5] == ParamPoint{{"kp", 8.0}, {"kd", 1.0}});
  SweepSpec empty;
  CHECK_THROWS_AS(sweep_points(empty), Error);
  empty.axes = {{"kp", {}}};
  CHECK_THROWS_AS(sweep_points(empty), Error);
}

TEST_CASE("point seed hashes the canonical point text") {
  const ParamPoint p{{"kp", 2.0}, {"kd", 0.25}};
  const std::string text = "kp=" + format_double(2.0) + ";kd=" + format_double(0.25) + ";";
  CHECK(point_seed(77, p) == derive_seed(77, xxh64(text, 0)));
  CHECK(point_seed(77, p) != point_seed(78, p));
  CHECK(point_seed(77, p) != point_seed(77, ParamPoint{{"kp", 2.0}, {"kd", 0.5}}));
}

TEST_CASE("a one-point sweep equals a single ensemble") {
  const auto model = parse_model(kBirthDeath);
  SweepSpec s;
  s.axes = {{"kp", {3.0}}};
  s.ensemble_size = 30;
  s.postprocessor = "final_count:A";
  s.base_seed = 5;
  const auto rows = run_parameter_sweep(model, s, opts(2), StorageMode::None);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].summary);
  auto m = model;
  m.set_parameter("kp", 3.0);
  const auto direct = run_ensemble_nostorage(m, 30, point_seed(5, rows[0].point), "final_count:A", opts(1));
  CHECK(*rows[0].summary == direct);
}

TEST_CASE("2x3 sweep: rows, order independence, stored modes agree") {
  const auto model = parse_model(kBirthDeath);
  const auto s = spec_2x3();
  const auto rows = run_parameter_sweep(model, s, opts(2), StorageMode::None);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    REQUIRE(r.summary);
    CHECK(r.error.empty());
    CHECK(r.summary->count == 20);
  }

  auto permuted = s;
  permuted.axes = {{"kp", {8.0, 2.0}}, {"kd", {1.0, 0.25, 0.5}}};
  const auto prow = run_parameter_sweep(model, permuted, opts(1), StorageMode::None);
  for (const auto& r : rows) {
    const auto it = std::find_if(prow.begin(), prow.end(), [&](const SweepRow& q) { return q.point == r.point; });
    REQUIRE(it != prow.end());
    CHECK(*it->summary == *r.summary);
  }

  const auto root = fs::temp_directory_path() / ("rdfleet-sweep-" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto storage = std::make_shared<SharedStorage>(root);
  auto stored_spec = s;
  stored_spec.id = "sw";
  const auto srows = run_parameter_sweep(model, stored_spec, opts(2), StorageMode::Shared, storage);
  for (std::size_t p = 0; p < rows.size(); ++p) CHECK(*srows[p].summary == *rows[p].summary);
  CHECK(storage->exists("sw-p3/r19"));
  CHECK(storage->exists("sw/summary.json"));
  const auto persisted = storage->get("sw/summary.json");
  CHECK(std::string(persisted.begin(), persisted.end()) == sweep_to_json(srows));
  fs::remove_all(root);
}

TEST_CASE("sweep table formats") {
  const auto rows = run_parameter_sweep(parse_model(kBirthDeath), spec_2x3(), opts(1), StorageMode::None);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "kp,kd,stat_name,component,mean,variance,ci95_halfwidth,K");
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    CHECK(line.find(",final_count:A,0,") != std::string::npos);
    CHECK(line.substr(line.rfind(',') + 1) == "20");
  }
  CHECK(n == 6);

  const auto j = nlohmann::json::parse(sweep_to_json(rows));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 6);
  CHECK(j[4]["params"]["kd"] == 0.5);
  CHECK(j[4]["summary"]["K"] == 20);
  CHECK(j[4]["summary"]["mean"][0].get<double>() == rows[4].summary->mean[0]);
}

TEST_CASE("failing points are recorded and the sweep continues") {
  const auto model = parse_model(kBirthDeath);
  SweepSpec s;
  s.axes = {{"c", {1.0, -1.0, 2.0}}};  // c < 0 makes the custom propensity negative
  s.ensemble_size = 10;
  s.postprocessor = "final_count:A";
  s.base_seed = 3;
  for (auto mode : {StorageMode::None, StorageMode::Shared}) {
    std::shared_ptr<StorageBackend> storage;
    const auto root = fs::temp_directory_path() / ("rdfleet-sweepfail-" + std::to_string(::getpid()));
    fs::remove_all(root);
    if (mode != StorageMode::None) storage = std::make_shared<SharedStorage>(root);
    const auto rows = run_parameter_sweep(model, s, opts(2), mode, storage);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].summary);
    CHECK_FALSE(rows[1].summary);
    CHECK_FALSE(rows[1].error.empty());
    CHECK(rows[2].summary);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    const auto text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);  // header + two good points
    const auto j = nlohmann::json::parse(sweep_to_json(rows));
    CHECK(j[1]["ok"] == false);
    CHECK_FALSE(j[1]["error"].get<std::string>().empty());
    fs::remove_all(root);
  }

  // a factory that throws fails only its point
  s.axes = {{"c", {1.0, 2.0}}};
  const auto rows = run_parameter_sweep(
      [&](const ParamPoint& p) -> ModelSpec {
        if (p[0].second == 2.0) throw ModelError("no model here");
        auto m = model;
        m.set_parameter("c", p[0].second);
        return m;
      },
      s, opts(1), StorageMode::None);
  CHECK(rows[0].summary);
  CHECK(rows[1].error.find("no model here") != std::string::npos);
}

TEST_CASE("unknown sweep parameter is rejected") {
  auto s = spec_2x3();
  s.axes[1].name = "nope";
  CHECK_THROWS_AS(run_parameter_sweep(parse_model(kBirthDeath), s, opts(1), StorageMode::None), ModelError);
}
