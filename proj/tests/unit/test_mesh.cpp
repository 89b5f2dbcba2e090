#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rdfleet/diffusion.hpp"
#include "rdfleet/error.hpp"
#include "rdfleet/mesh.hpp"

using namespace rdfleet;
using Catch::Approx;

namespace {

Mesh grid1(double length, int n) {
  const double l[] = {length};
  const int c[] = {n};
  return build_cartesian_grid(1, l, c);
}

LabeledMesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_mesh(in);
}

// Mass of a Neumann heat kernel on [0, L] over the cell [lo, hi], by images.
double reflected_kernel_mass(double x0, double L, double D, double t, double lo, double hi) {
  const double s = std::sqrt(4.0 * D * t);
  double mass = 0.0;
  for (int n = -6; n <= 6; ++n) {
    for (double c : {x0 + 2.0 * n * L, -x0 + 2.0 * n * L}) {
      mass += 0.5 * (std::erf((hi - c) / s) - std::erf((lo - c) / s));
    }
  }
  return mass;
}

}  // namespace

TEST_CASE("1D grid volumes") {
  auto two = grid1(1.0, 2);
  CHECK(two.num_voxels() == 2);
  CHECK(two.volumes() == std::vector<double>{0.5, 0.5});
  CHECK(two.num_edges() == 1);

  auto eleven = grid1(1.0, 11);
  REQUIRE(eleven.num_voxels() == 11);
  CHECK(eleven.volumes()[5] == Approx(0.1));
  CHECK(eleven.volumes()[0] == Approx(0.05));
  CHECK(eleven.volumes()[10] == Approx(0.05));
  CHECK(eleven.total_volume() == Approx(1.0).margin(1e-12));
}

TEST_CASE("3D grid volume partition") {
  const double l[] = {1.0, 1.0, 1.0};
  const int c[] = {5, 5, 5};
  auto m = build_cartesian_grid(3, l, c);
  REQUIRE(m.num_voxels() == 125);
  double sum = 0.0;
  for (double v : m.volumes()) sum += v;
  CHECK(std::abs(sum - 1.0) < 1e-12);
  // axis neighbours only: 3 * 4 * 25 edges
  CHECK(m.num_edges() == 300);
  CHECK(m.adjacent(0, 1));
  CHECK_FALSE(m.adjacent(0, 6));
}

TEST_CASE("grid rejects non-positive sizes") {
  CHECK_THROWS_AS(grid1(0.0, 3), GeometryError);
  CHECK_THROWS_AS(grid1(1.0, 0), GeometryError);
  CHECK_THROWS_AS(grid1(-1.0, 3), GeometryError);
}

TEST_CASE("mesh exchange format") {
  SECTION("two vertices, one edge") {
    auto lm = parse("RFMESH 1 1 2 1\nv 0 0.0 0.5 1\nv 1 1.0 0.5 2\ne 0 1 1.0 1.0\n");
    CHECK(lm.mesh.num_voxels() == 2);
    CHECK(lm.mesh.num_edges() == 1);
    CHECK(lm.subdomains.labels == std::vector<int>{1, 2});
  }
  SECTION("both orientations of an edge collapse to one") {
    auto lm = parse("# comment\nRFMESH 1 1 2 2\nv 0 0 0.5 1\nv 1 1 0.5 1\ne 0 1 1 1\ne 1 0 1 1\n");
    CHECK(lm.mesh.num_edges() == 1);
  }
  SECTION("zero volume is a geometry error") {
    CHECK_THROWS_AS(parse("RFMESH 1 1 2 1\nv 0 0 0 1\nv 1 1 0.5 1\ne 0 1 1 1\n"), GeometryError);
  }
  SECTION("conflicting orientations are asymmetric adjacency") {
    CHECK_THROWS_AS(parse("RFMESH 1 1 2 2\nv 0 0 0.5 1\nv 1 1 0.5 1\ne 0 1 1 1\ne 1 0 2 1\n"), GeometryError);
  }
  SECTION("malformed line reports its number") {
    try {
      parse("RFMESH 1 1 2 1\nv 0 0 0.5 1\nv 1 oops 0.5 1\ne 0 1 1 1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SECTION("write then parse") {
    const double l[] = {1.0, 2.0};
    const int c[] = {3, 4};
    auto m = build_cartesian_grid(2, l, c);
    auto sub = SubdomainMap::uniform(m.num_voxels());
    std::stringstream ss;
    write_mesh(ss, m, sub);
    auto back = parse_mesh(ss);
    CHECK(back.mesh.num_voxels() == m.num_voxels());
    CHECK(back.mesh.num_edges() == m.num_edges());
    for (std::size_t i = 0; i < m.num_voxels(); ++i) CHECK(back.mesh.volumes()[i] == m.volumes()[i]);
  }
}

TEST_CASE("sphere shell mesh") {
  SECTION("icosahedron") {
    auto lm = build_sphere_shell_mesh(1.0, 0);
    CHECK(lm.subdomains.members(kMembraneLabel).size() == 12);
  }
  for (int sub : {1, 2, 3}) {
    auto lm = build_sphere_shell_mesh(1.0, sub, 2);
    const auto membrane = lm.subdomains.members(kMembraneLabel);
    CHECK(membrane.size() == 10u * (1u << (2 * sub)) + 2u);
    for (auto v : membrane) {
      const auto& p = lm.mesh.coords()[v];
      CHECK(std::abs(std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z) - 1.0) < 1e-9);
      bool interior = false;
      for (auto nb : lm.mesh.neighbors(v)) interior |= lm.subdomains.labels[nb.voxel] == kCytosolLabel;
      CHECK(interior);
    }
  }
  auto fine = build_sphere_shell_mesh(1.0, 3, 2);
  CHECK(std::abs(fine.mesh.total_volume() / (4.0 / 3.0 * std::numbers::pi) - 1.0) < 0.05);
}

TEST_CASE("diffusion assembly") {
  auto m = grid1(1.0, 11);
  auto sub = SubdomainMap::uniform(m.num_voxels());
  SECTION("interior rate is D/h^2") {
    std::vector<Species> sp{{"A", 1.0, {}}};
    auto d = assemble_diffusion(m, sub, sp);
    CHECK(d.rate(0, 5, 6) == Approx(100.0));
    CHECK(d.rate(0, 5, 4) == Approx(100.0));
    CHECK(d.rate(0, 5, 7) == 0.0);
  }
  SECTION("D = 0 gives no jumps") {
    std::vector<Species> sp{{"A", 0.0, {}}};
    auto d = assemble_diffusion(m, sub, sp);
    CHECK(d.nonzeros(0) == 0);
    for (std::size_t i = 0; i < 11; ++i) CHECK(d.exit_rate(0, i) == 0.0);
  }
  SECTION("undeclared subdomain") {
    std::vector<Species> sp{{"A", 1.0, {7}}};
    CHECK_THROWS_AS(assemble_diffusion(m, sub, sp), ModelError);
  }
}

TEST_CASE("membrane-restricted species never touches the cytosol") {
  auto lm = build_sphere_shell_mesh(1.0, 2, 2);
  std::vector<Species> sp{{"M", 0.5, {kMembraneLabel}}, {"C", 1.0, {}}};
  auto d = assemble_diffusion(lm.mesh, lm.subdomains, sp);
  for (const auto& e : lm.mesh.edges()) {
    const bool cyt = lm.subdomains.labels[e.a] == kCytosolLabel || lm.subdomains.labels[e.b] == kCytosolLabel;
    if (cyt) {
      CHECK(d.rate(0, e.a, e.b) == 0.0);
      CHECK(d.rate(0, e.b, e.a) == 0.0);
    } else {
      CHECK(d.rate(0, e.a, e.b) > 0.0);
    }
  }
}

TEST_CASE("generator rows sum to zero and jumps follow edges") {
  auto lm = build_sphere_shell_mesh(1.0, 2, 2);
  std::vector<Species> sp{{"M", 0.3, {kMembraneLabel}}, {"C", 1.0, {}}};
  auto d = assemble_diffusion(lm.mesh, lm.subdomains, sp);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t i = 0; i < lm.mesh.num_voxels(); ++i) {
      double sum = 0.0;
      for (const auto& j : d.row(s, i)) {
        CHECK(j.rate > 0.0);
        CHECK(lm.mesh.adjacent(i, j.dest));
        sum += j.rate;
      }
      CHECK(sum == d.exit_rate(s, i));
    }
  }
}

TEST_CASE("mean-field diffusion matches the reflected heat kernel") {
  const int K = 51;
  const double L = 1.0, D = 1.0, h = L / (K - 1);
  auto m = grid1(L, K);
  auto sub = SubdomainMap::uniform(K);
  std::vector<Species> sp{{"A", D, {}}};
  auto d = assemble_diffusion(m, sub, sp);

  // du/dt = G^T u with RK4, starting from a point mass in the middle voxel
  const double t_end = 25.0 * h * h / (2.0 * D);  // sqrt(2 D t) = 5 h
  const int steps = 2000;
  const double dt = t_end / steps;
  std::vector<double> u(K, 0.0);
  const int mid = K / 2;
  u[mid] = 1.0;
  auto rhs = [&](const std::vector<double>& x) {
    std::vector<double> out(K, 0.0);
    for (int i = 0; i < K; ++i) {
      out[i] -= d.exit_rate(0, i) * x[i];
      for (const auto& j : d.row(0, i)) out[j.dest] += j.rate * x[i];
    }
    return out;
  };
  auto axpy = [&](const std::vector<double>& x, const std::vector<double>& k, double a) {
    std::vector<double> out(K);
    for (int i = 0; i < K; ++i) out[i] = x[i] + a * k[i];
    return out;
  };
  for (int s = 0; s < steps; ++s) {
    const auto k1 = rhs(u);
    const auto k2 = rhs(axpy(u, k1, dt / 2));
    const auto k3 = rhs(axpy(u, k2, dt / 2));
    const auto k4 = rhs(axpy(u, k3, dt));
    for (int i = 0; i < K; ++i) u[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }

  double total = 0.0, err = 0.0;
  for (int i = 0; i < K; ++i) {
    total += u[i];
    const double lo = std::max(0.0, (i - 0.5) * h), hi = std::min(L, (i + 0.5) * h);
    err += std::abs(u[i] - reflected_kernel_mass(mid * h, L, D, t_end, lo, hi));
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(err < 0.02);
}
