// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion 4   run one
//
// Exit status is nonzero when any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "rdfleet/bench.hpp"
#include "rdfleet/ctmc.hpp"
#include "rdfleet/ensemble.hpp"
#include "rdfleet/model_io.hpp"
#include "rdfleet/object_store.hpp"
#include "rdfleet/polarization.hpp"
#include "rdfleet/solver.hpp"
#include "rdfleet/statistics.hpp"
#include "rdfleet/trajectory_store.hpp"
#include "rdfleet/yeast.hpp"
#include "s3_stub.hpp"

using namespace rdfleet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rdfleet-accept-" + std::to_string(::getpid()) + "-" + name);
  fs::remove_all(p);
  return p;
}

// ---------------------------------------------------------------------------
// 1, 2: two-voxel birth-death

const char* kBirthDeath2 = R"(
[model]
name birth_death_2v
[mesh]
builtin grid 1 1.0 2
[species]
A 0.5
[parameters]
kp 4
kd 1
[reactions]
birth: 0 -> A @ massaction(kp)
death: A -> @ massaction(kd)
[initial]
set A 0 1
[tspan]
0 1
)";

constexpr std::int64_t kCap2 = 30;  // 31^2 = 961 states
constexpr std::size_t kSamples = 100'000;

using Histogram = std::map<std::pair<std::int64_t, std::int64_t>, double>;

Histogram sample_final(const CompiledModel& m, std::uint64_t base, bool nsm) {
  Histogram h;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const auto seed = derive_seed(base, i);
    const auto t = nsm ? run_nsm(m, seed) : run_direct_ssa(m, seed);
    h[{t.at(1, 0, 0), t.at(1, 1, 0)}] += 1.0 / kSamples;
  }
  return h;
}

double tv(const Histogram& a, const Histogram& b) {
  double sum = 0.0;
  for (const auto& [k, p] : a) {
    const auto it = b.find(k);
    sum += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, q] : b) {
    if (!a.count(k)) sum += q;
  }
  return 0.5 * sum;
}

Outcome criterion_1() {
  const auto start = Clock::now();
  const auto spec = parse_model(kBirthDeath2);
  const auto m = compile_validated(spec);
  const std::int64_t caps[] = {kCap2};
  const auto gen = build_ctmc_generator(*m, caps);
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gen.num_states));
  const std::int64_t x0[] = {1, 0};
  p0[static_cast<Eigen::Index>(gen.index_of(x0))] = 1.0;
  const auto p = transient_distribution(gen, p0, 1.0);
  Histogram exact;
  double edge_mass = 0.0;
  for (std::size_t s = 0; s < gen.num_states; ++s) {
    const auto x = gen.state(s);
    const double w = p[static_cast<Eigen::Index>(s)];
    exact[{x[0], x[1]}] = w;
    if (x[0] == kCap2 || x[1] == kCap2) edge_mass += w;
  }
  const auto empirical = sample_final(*m, 101, true);
  const double d = tv(empirical, exact);
  const double secs = seconds_since(start);
  return {d < 0.02 && secs < 120.0 && gen.num_states <= 1000,
          fmt("TV(NSM, exp(Qt)) = %.4f (< 0.02), %zu states, cap mass %.1e, %.1f s (< 120 s)", d, gen.num_states,
              edge_mass, secs)};
}

Outcome criterion_2() {
  const auto start = Clock::now();
  const auto m = compile_validated(parse_model(kBirthDeath2));
  const auto nsm = sample_final(*m, 202, true);
  const auto ssa = sample_final(*m, 303, false);
  const double d = tv(nsm, ssa);
  const double secs = seconds_since(start);
  return {d < 0.02 && secs < 180.0, fmt("TV(NSM, direct SSA) = %.4f (< 0.02), %.1f s (< 180 s)", d, secs)};
}

// ---------------------------------------------------------------------------
// 3: diffusion on a 51-voxel line

Outcome criterion_3() {
  const auto start = Clock::now();
  constexpr int kVoxels = 51;
  constexpr std::int64_t kMolecules = 1000;
  constexpr double kD = 0.01;
  constexpr double kT = 2.0;
  constexpr std::size_t kRealizations = 200;
  const auto spec = parse_model(R"(
[model]
name line_diffusion
[mesh]
builtin grid 1 1.0 51
[species]
A 0.01
[initial]
set A 25 1000
[tspan]
0 2
)");
  const auto m = compile_validated(spec);
  // vertex-centred grid: voxel i covers [(i - 1/2) h, (i + 1/2) h] clipped to [0, 1]
  const double h = 1.0 / (kVoxels - 1);
  const double x0 = 25 * h;

  // Reflected heat kernel on [0, 1] by images, integrated over each voxel.
  std::vector<double> analytic(kVoxels, 0.0);
  const double s = std::sqrt(4.0 * kD * kT);
  auto cdf = [&](double x, double c) { return 0.5 * std::erf((x - c) / s); };
  for (int i = 0; i < kVoxels; ++i) {
    const double a = std::max(0.0, (i - 0.5) * h), b = std::min(1.0, (i + 0.5) * h);
    double mass = 0.0;
    for (int k = -6; k <= 6; ++k) {
      mass += cdf(b, x0 + 2.0 * k) - cdf(a, x0 + 2.0 * k);
      mass += cdf(b, -x0 + 2.0 * k) - cdf(a, -x0 + 2.0 * k);
    }
    analytic[i] = kMolecules * mass;
  }

  // Mean field: dn/dt = n D, integrated with RK4 from the jump rates of the model.
  std::vector<double> n(kVoxels, 0.0);
  n[25] = kMolecules;
  auto deriv = [&](const std::vector<double>& x) {
    std::vector<double> dx(kVoxels, 0.0);
    for (int i = 0; i < kVoxels; ++i) {
      for (const auto& j : m->diffusion.row(0, i)) {
        dx[i] -= j.rate * x[i];
        dx[j.dest] += j.rate * x[i];
      }
    }
    return dx;
  };
  const int steps = 4000;
  const double dt = kT / steps;
  for (int step = 0; step < steps; ++step) {
    auto axpy = [&](const std::vector<double>& k, double f) {
      std::vector<double> y(n);
      for (int i = 0; i < kVoxels; ++i) y[i] += f * k[i];
      return y;
    };
    const auto k1 = deriv(n);
    const auto k2 = deriv(axpy(k1, dt / 2));
    const auto k3 = deriv(axpy(k2, dt / 2));
    const auto k4 = deriv(axpy(k3, dt));
    for (int i = 0; i < kVoxels; ++i) n[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }

  std::vector<std::vector<double>> outputs;
  for (std::size_t r = 0; r < kRealizations; ++r) {
    const auto t = run_nsm(*m, derive_seed(33, r));
    std::vector<double> row(kVoxels);
    for (int i = 0; i < kVoxels; ++i) row[i] = static_cast<double>(t.at(1, i, 0));
    outputs.push_back(std::move(row));
  }
  const auto mc = summarize(outputs, "per-voxel count");

  double l1_mf = 0.0, l1_mc = 0.0;
  int covered = 0;
  for (int i = 0; i < kVoxels; ++i) {
    l1_mf += std::abs(n[i] - analytic[i]);
    l1_mc += std::abs(mc.mean[i] - analytic[i]);
    covered += std::abs(mc.mean[i] - n[i]) <= mc.ci95[i];
  }
  l1_mf /= kMolecules;
  l1_mc /= kMolecules;
  const double secs = seconds_since(start);
  const bool ok = l1_mf < 0.02 && l1_mc < 0.02 && covered >= 46 && secs < 60.0;
  return {ok, fmt("rel L1 mean-field %.4f, ensemble %.4f (< 0.02); CI covers exact mean in %d/51 voxels (>= 46); "
                  "%.1f s (< 60 s)",
                  l1_mf, l1_mc, covered, secs)};
}

// ---------------------------------------------------------------------------
// 4: statistics on hand-chosen outputs

const char* kDeath = R"(
[model]
name pure_death
[mesh]
builtin grid 1 1.0 1
[species]
A 0
[parameters]
k 0.5
[reactions]
death: A -> @ massaction(k)
[initial]
set A 0 100
[tspan]
linspace 0 2 3
)";

Outcome criterion_4() {
  auto storage = std::make_shared<SharedStorage>(scratch("c4"));
  auto h = create_ensemble("hand", parse_model(kDeath), 1, StorageMode::Shared, storage);
  for (std::uint64_t i = 0; i < 4; ++i) {
    Trajectory t(h.model->spec->tspan, 1, 1);
    t.counts.back() = static_cast<std::int64_t>(i + 1);
    storage->put(h.key(i), encode_trajectory(t));
    h.keys.push_back(h.key(i));
  }
  const double want_mean = 2.5, want_var = 5.0 / 3.0, want_ci = 1.96 * std::sqrt(5.0 / 12.0);
  bool ok = true;
  std::string detail;
  StatSummary first;
  for (std::size_t w : {1u, 2u, 8u}) {
    EnsembleOptions o;
    o.workers = w;
    const auto s = map_aggregate(h, "final_count:A", o);
    if (w == 1) first = s;
    const bool exact = s.mean[0] == want_mean && s.variance[0] == want_var && s.ci95[0] == want_ci;
    const bool same = s == first;
    ok = ok && exact && same;
    detail += fmt("w=%zu mean %.17g var %.17g ci %.17g%s; ", w, s.mean[0], s.variance[0], s.ci95[0],
                  exact && same ? "" : " MISMATCH");
  }
  fs::remove_all(storage->root());
  return {ok, detail + "expected 2.5, 5/3, 1.96*sqrt(5/12), bit-identical"};
}

// ---------------------------------------------------------------------------
// 5, 6: determinism and path equivalence on a small yeast model

ModelSpec small_yeast() {
  YeastGeometry g;
  g.mesh_subdiv = 1;
  g.interior_layers = 1;
  g.t_end = 5.0;
  g.n_out = 6;
  return build_yeast_model(650, YeastParams::calibrated(), g);
}

Outcome criterion_5() {
  const auto spec = small_yeast();
  constexpr std::uint64_t kN = 24, kSeed = 4242;
  std::vector<std::vector<Bytes>> files;
  std::vector<StatSummary> fused, stored;
  for (std::size_t w : {1u, 2u, 8u}) {
    EnsembleOptions o;
    o.workers = w;
    auto storage = std::make_shared<SharedStorage>(scratch("c5-w" + std::to_string(w)));
    auto h = create_ensemble("det", spec, kSeed, StorageMode::Shared, storage);
    add_realizations(h, kN, o);
    std::vector<Bytes> bytes;
    for (const auto& k : h.keys) bytes.push_back(storage->get(k));
    files.push_back(std::move(bytes));
    stored.push_back(map_aggregate(h, "polarization_stats:Cdc42_m", o));
    fused.push_back(run_ensemble_nostorage(spec, kN, kSeed, "polarization_stats:Cdc42_m", o));
    fs::remove_all(storage->root());
  }
  const bool bytes_ok = files[0] == files[1] && files[0] == files[2];
  const bool sums_ok = fused[0] == fused[1] && fused[0] == fused[2] && stored[0] == stored[1] && stored[0] == stored[2];
  return {bytes_ok && sums_ok,
          fmt("%llu trajectory files byte-identical across workers 1/2/8: %s; summaries identical: %s",
              static_cast<unsigned long long>(kN), bytes_ok ? "yes" : "no", sums_ok ? "yes" : "no")};
}

Outcome criterion_6() {
  const auto spec = small_yeast();
  constexpr std::uint64_t kN = 24, kSeed = 99;
  EnsembleOptions o;
  o.workers = 2;
  const auto b = run_ensemble_nostorage(spec, kN, kSeed, "polarization_stats:Cdc42_m", o);
  auto storage = std::make_shared<SharedStorage>(scratch("c6"));
  auto h = create_ensemble("cd", spec, kSeed, StorageMode::Shared, storage);
  add_realizations(h, kN, o);
  const auto cd = map_aggregate(h, "polarization_stats:Cdc42_m", o);
  fs::remove_all(storage->root());
  return {b == cd, fmt("workflow B vs C+D over %zu outputs: %s (mean[0] %.17g vs %.17g)", b.mean.size(),
                       b == cd ? "exactly equal" : "DIFFERENT", b.mean[0], cd.mean[0])};
}

// ---------------------------------------------------------------------------
// 7: storage contract

Bytes random_bytes(RandomStream& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(256));
  return b;
}

// Random put/get/delete/list/exists sequence against an in-memory map; empty string on success.
std::string contract(StorageBackend& store, std::uint64_t seed) {
  RandomStream rng(seed);
  std::map<std::string, Bytes> ref;
  const std::vector<std::string> namespaces{"alpha", "beta", "gamma-1"};
  auto random_key = [&] {
    std::string key = namespaces[rng.below(namespaces.size())] + "/";
    if (rng.below(4) == 0) key += "sub/";
    return key + "k" + std::to_string(rng.below(6));
  };
  auto listing = [&](const std::string& ns) {
    std::vector<std::string> out;
    for (const auto& [k, v] : ref) {
      if (k.starts_with(ns + "/")) out.push_back(k);
    }
    return out;
  };
  try {
    for (int op = 0; op < 500; ++op) {
      const auto key = random_key();
      switch (rng.below(5)) {
        case 0:
        case 1: {
          auto value = random_bytes(rng, rng.below(4000));
          const auto r = store.put(key, value);
          if (r.size != value.size() || r.checksum != xxh64(value)) return "bad receipt for " + key;
          ref[key] = std::move(value);
          break;
        }
        case 2:
          if (ref.count(key)) {
            if (store.get(key) != ref[key]) return "get mismatch for " + key;
          } else {
            try {
              store.get(key);
              return "get of absent " + key + " succeeded";
            } catch (const StorageError& e) {
              if (e.code() != StorageError::Code::NotFound) return "absent " + key + " raised " + e.what();
            }
          }
          break;
        case 3:
          store.remove(key);
          ref.erase(key);
          if (store.exists(key)) return "exists after remove: " + key;
          break;
        default: {
          const auto& ns = namespaces[rng.below(namespaces.size())];
          if (store.list(ns) != listing(ns)) return "list mismatch in " + ns;
          if (store.exists(key) != (ref.count(key) == 1)) return "exists mismatch for " + key;
        }
      }
    }
    for (const auto& [k, v] : ref) store.remove(k);
    for (const auto& ns : namespaces) {
      if (!store.list(ns).empty()) return "namespace " + ns + " not empty after cleanup";
    }
  } catch (const std::exception& e) {
    return std::string("unexpected error: ") + e.what();
  }
  return {};
}

Outcome criterion_7() {
  testing::S3Stub stub("AKIDACCEPT", "acceptance-secret");
  stub.start();
  StorageConfig cfg;
  cfg.endpoint = stub.endpoint();
  cfg.access_key = "AKIDACCEPT";
  cfg.secret_key = "acceptance-secret";
  cfg.backoff_seconds = 0.001;

  std::string detail;
  bool ok = true;
  auto run = [&](const char* name, StorageBackend& store, std::uint64_t seed) {
    const auto err = contract(store, seed);
    ok = ok && err.empty();
    detail += std::string(name) + (err.empty() ? " ok" : " FAILED (" + err + ")") + "; ";
  };
  {
    LocalStorage local(scratch("c7-local"));
    run("local", local, 1);
    fs::remove_all(local.root());
  }
  const auto shared_root = scratch("c7-shared");
  {
    SharedStorage shared(shared_root);
    run("shared", shared, 2);
  }
  {
    PersistentStorage persistent(cfg);
    run("persistent", persistent, 3);
  }

  // Teardown: the cluster's disks go away; the object store does not.
  {
    SharedStorage shared(shared_root);
    PersistentStorage persistent(cfg);
    shared.put("run/r0", std::string_view("payload"));
    persistent.put("run/r0", std::string_view("payload"));
  }
  fs::remove_all(shared_root);
  SharedStorage shared_after(shared_root);
  PersistentStorage persistent_after(cfg);
  const bool shared_gone = !shared_after.exists("run/r0");
  const auto kept = persistent_after.get("run/r0");
  const bool persistent_kept = std::string(kept.begin(), kept.end()) == "payload";
  ok = ok && shared_gone && persistent_kept;
  detail += fmt("after teardown shared %s, persistent %s", shared_gone ? "lost data" : "STILL HAS DATA",
                persistent_kept ? "kept data" : "LOST DATA");
  fs::remove_all(shared_root);
  stub.stop();
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 8: CI coverage on pure death

Outcome criterion_8() {
  const auto start = Clock::now();
  const auto spec = parse_model(kDeath);
  const double truth = 100.0 * std::exp(-0.5 * 2.0);
  int covered = 0;
  EnsembleOptions o;
  o.workers = 2;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    auto h = create_ensemble("coverage", spec, 5000 + rep, StorageMode::None);
    h.planned = 200;
    const auto s = map_aggregate(h, "final_count:A", o);
    covered += std::abs(s.mean[0] - truth) <= s.ci95[0];
  }
  const double secs = seconds_since(start);
  return {covered >= 90 && secs < 300.0,
          fmt("CI covered 100*exp(-1) in %d/100 ensembles of K=200 (>= 90), %.1f s (< 300 s)", covered, secs)};
}

// ---------------------------------------------------------------------------
// 9: polarization switch

Outcome criterion_9() {
  const auto start = Clock::now();
  const std::vector<std::uint64_t> ns{300, 400, 450, 600, 800, 1200, 2000, 3000};
  SwitchSweepOptions opt;
  opt.geometry.mesh_subdiv = 2;
  opt.geometry.t_end = 100.0;
  opt.geometry.n_out = 51;
  opt.base_seed = 2015;
  opt.ensemble.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto params = YeastParams::calibrated();
  const auto pts = run_switch_sweep(ns, params, 8, opt);
  for (const auto& p : pts) {
    if (!p.ok) return {false, "point N=" + std::to_string(p.n_total) + " failed: " + p.error};
  }

  // (a) off-state at the lowest N
  const bool off = pts.front().membrane_mean < 1.0;

  // (b) largest jump between neighbouring N values
  double jump = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double d = pts[i + 1].polarization_mean - pts[i].polarization_mean;
    if (d > jump) {
      jump = d;
      at = i;
    }
  }

  // (c) decline past the peak toward the homogeneous level. The homogeneous
  // reference places the same number of membrane molecules at random, area-weighted.
  const auto model = build_yeast_model(ns.back(), params, opt.geometry);
  const auto caps = build_polarization_caps(*model.mesh, *model.subdomains);
  const auto& vol = model.mesh->volumes();
  std::vector<double> cdf;
  double acc = 0.0;
  for (auto v : caps.membrane) cdf.push_back(acc += vol[v]);
  RandomStream rng(77);
  const auto m_high = static_cast<std::int64_t>(std::llround(pts.back().membrane_mean));
  double homogeneous = 0.0;
  const int draws = 200;
  for (int d = 0; d < draws; ++d) {
    std::vector<std::int64_t> per(model.num_voxels(), 0);
    for (std::int64_t i = 0; i < m_high; ++i) {
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform() * acc);
      per[caps.membrane[std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1)]]++;
    }
    double best = 0.0;
    for (const auto& cap : caps.caps) {
      std::int64_t in = 0;
      for (auto v : cap) in += per[v];
      best = std::max(best, 100.0 * double(in) / double(m_high));
    }
    homogeneous += best / draws;
  }
  std::size_t peak = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].polarization_mean > pts[peak].polarization_mean) peak = i;
  }
  bool declining = true;
  for (std::size_t i = peak; i + 1 < pts.size(); ++i) {
    declining = declining && pts[i + 1].polarization_mean <= pts[i].polarization_mean;
  }
  const double high = pts.back().polarization_mean;
  const bool tail = declining && high < 0.5 * pts[peak].polarization_mean && high - homogeneous < 10.0;

  const double secs = seconds_since(start);
  std::string curve;
  for (const auto& p : pts) curve += fmt(" %llu:%.1f", static_cast<unsigned long long>(p.n_total), p.polarization_mean);
  return {off && jump > 30.0 && tail && secs < 1200.0,
          fmt("(a) membrane mean at N=%llu is %.3f (< 1); (b) jump %.1f pp between N=%llu and %llu (> 30); "
              "(c) declining past peak %.1f%%: %s, N=%llu at %.1f%% vs homogeneous %.1f%% (cap area %.1f%%, "
              "within 10 pp, below half the peak); %.0f s (< 1200 s); curve:",
              static_cast<unsigned long long>(pts.front().n_total), pts.front().membrane_mean, jump,
              static_cast<unsigned long long>(pts[at].n_total), static_cast<unsigned long long>(pts[at + 1].n_total),
              pts[peak].polarization_mean, declining ? "yes" : "no",
              static_cast<unsigned long long>(pts.back().n_total), high, homogeneous, 100.0 * caps.mean_cap_fraction(),
              secs) +
              curve};
}

// ---------------------------------------------------------------------------
// 10: scaling shape

Outcome criterion_10() {
  const auto start = Clock::now();
  const auto cpus = std::thread::hardware_concurrency();
  const auto workload = yeast_bench_workload(600, 10.0, 2);
  const std::vector<std::size_t> workers{1, 2, 4, 8};
  auto storage = std::make_shared<SharedStorage>(scratch("c10"));
  const auto strong = bench_strong(workload, 100, workers, StorageMode::None);
  const auto weak_none = bench_weak(workload, 10, workers, StorageMode::None);
  const auto weak_shared = bench_weak(workload, 10, workers, StorageMode::Shared, storage);
  fs::remove_all(storage->root());
  const double speedup8 = strong.rows.back().speedup;
  const double eff_none = weak_none.rows.back().efficiency;
  const double eff_shared = weak_shared.rows.back().efficiency;
  const bool ordering = eff_shared <= eff_none * 1.1;
  const double secs = seconds_since(start);
  const bool ok = eff_none >= 0.6 && speedup8 >= 3.0 && ordering && secs < 900.0;
  return {ok, fmt("%u logical CPUs; strong speedup at 8 workers %.2f (>= 3); weak efficiency at 8 workers "
                  "no-storage %.2f (>= 0.6), shared %.2f (<= no-storage + 10%%); serial fraction %.3f; %.0f s (< 900 s)",
                  cpus, speedup8, eff_none, eff_shared, strong.serial_fraction, secs)};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"RDME oracle equivalence", criterion_1},      {"cross-solver agreement", criterion_2},
    {"diffusion consistency", criterion_3},        {"statistics exactness", criterion_4},
    {"determinism across workers", criterion_5},   {"path equivalence B = C+D", criterion_6},
    {"storage contract and teardown", criterion_7}, {"CI coverage", criterion_8},
    {"polarization switch", criterion_9},          {"scaling shape", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdfleet acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "criterion number (1-10), repeatable; default all")
      ->check(CLI::Range(1, static_cast<int>(kCriteria.size())));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) selected.push_back(i);
  }
  int failures = 0;
  for (int n : selected) {
    const auto& [name, fn] = kCriteria[static_cast<std::size_t>(n - 1)];
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %2d %s  %s: %s\n", n, out.pass ? "PASS" : "FAIL", name, out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
