#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdfleet/diffusion.hpp"
#include "rdfleet/expr.hpp"
#include "rdfleet/hash.hpp"
#include "rdfleet/mesh.hpp"
#include "rdfleet/rng.hpp"
#include "rdfleet/species.hpp"

namespace rdfleet {

struct Parameter {
  std::string name;
  double value = 0.0;
};

/// Mass-action kinetics; `rate` names a parameter or holds a numeric literal.
struct MassAction {
  std::string rate;
};

/// Custom propensity given as an expression over species counts, parameters and `vol`.
struct CustomPropensity {
  std::string source;
};

struct Reaction {
  std::string name;
  std::map<std::string, int> reactants;
  std::map<std::string, int> products;
  std::variant<MassAction, CustomPropensity> propensity;
  std::set<int> restrict_to;  ///< empty = every subdomain
};

/// How the model's mesh was produced; kept so the model can be written back to text.
struct GridSource {
  int dim = 1;
  std::vector<double> lengths;
  std::vector<int> n_per_axis;
};
struct SphereSource {
  double radius = 1.0;
  int n_subdiv = 2;
  int interior_layers = 1;
};
struct FileSource {
  std::string path;
};
using MeshSource = std::variant<GridSource, SphereSource, FileSource>;

LabeledMesh build_mesh(const MeshSource& source);

/// Initial-condition directive. Scatter directives are resolved per realization.
struct ScatterDirective {
  std::string species;
  std::uint64_t count = 0;
  int subdomain = kCytosolLabel;
};
struct SetDirective {
  std::string species;
  std::uint32_t voxel = 0;
  std::uint64_t count = 0;
};
using InitialDirective = std::variant<ScatterDirective, SetDirective>;

struct Linspace {
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t n = 0;
  std::vector<double> values() const;
};

/// Declarative model: species, parameters, reactions, geometry, initial state and output times.
///
/// The mesh is shared and immutable; copies of a ModelSpec share it.
struct ModelSpec {
  std::string name = "model";
  std::vector<Species> species;
  std::vector<Parameter> parameters;
  std::vector<Reaction> reactions;
  MeshSource mesh_source = GridSource{1, {1.0}, {1}};
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const SubdomainMap> subdomains;
  std::vector<InitialDirective> initial;
  std::vector<double> tspan;
  std::optional<Linspace> tspan_linspace;  ///< set when tspan came from `linspace`

  /// Builds the mesh from `mesh_source` and installs it.
  void attach_mesh();
  void attach_mesh(LabeledMesh labeled);

  std::optional<std::size_t> species_index(std::string_view name) const;
  std::optional<double> parameter(std::string_view name) const;
  /// Overwrites an existing parameter; throws ModelError if it is not declared.
  void set_parameter(std::string_view name, double value);

  std::size_t num_voxels() const { return mesh ? mesh->num_voxels() : 0; }
};

/// State matrix, K rows by S columns, row-major: counts[voxel * S + species].
struct StateMatrix {
  std::size_t num_voxels = 0;
  std::size_t num_species = 0;
  std::vector<std::int64_t> counts;

  StateMatrix() = default;
  StateMatrix(std::size_t k, std::size_t s) : num_voxels(k), num_species(s), counts(k * s, 0) {}
  std::int64_t& at(std::size_t voxel, std::size_t species) { return counts[voxel * num_species + species]; }
  std::int64_t at(std::size_t voxel, std::size_t species) const { return counts[voxel * num_species + species]; }
  std::span<const std::int64_t> voxel(std::size_t v) const { return {counts.data() + v * num_species, num_species}; }
};

/// Mass-action propensity for at most two reactant molecules in one voxel.
///   zero-order        k * V
///   A ->              k * x_A
///   A + B ->          (k / V) * x_A * x_B
///   2A ->             (k / V) * x_A * (x_A - 1) / 2
/// `reactants` holds (species index, stoichiometric count) pairs.
double mass_action_propensity(double k, std::span<const std::pair<std::size_t, int>> reactants,
                              std::span<const std::int64_t> voxel_counts, double volume);

/// Place `total_count` molecules independently into voxels of `subdomain`, each voxel
/// chosen with probability proportional to its volume. Throws ModelError when the
/// species may not occupy the subdomain or the subdomain has no voxels.
void scatter_initial(const ModelSpec& model, std::size_t species, std::uint64_t total_count, int subdomain,
                     RandomStream& rng, StateMatrix& state);

/// Apply all initial directives in order, drawing scatter positions from `rng`.
StateMatrix resolve_initial_state(const ModelSpec& model, RandomStream& rng);

struct Diagnostic {
  std::string code;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

/// Empty iff the model is well formed. Codes are stable identifiers, e.g.
/// UNDECLARED_SPECIES, EMPTY_TSPAN (full list in docs/model-format.md).
std::vector<Diagnostic> validate_model(const ModelSpec& model);

/// Reaction prepared for simulation: indices resolved, rate or expression bound.
struct CompiledReaction {
  std::string name;
  std::vector<std::pair<std::size_t, int>> reactants;
  std::vector<std::pair<std::size_t, int>> change;  ///< net stoichiometry, nonzero entries only
  bool custom = false;
  double rate = 0.0;
  std::optional<BoundExpr> expr;
  std::vector<bool> active;  ///< per voxel: allowed subdomain and every species permitted

  double propensity(std::span<const std::int64_t> counts, double volume) const {
    return custom ? expr->evaluate(counts, volume) : mass_action_propensity(rate, reactants, counts, volume);
  }
};

/// Everything the solvers need, derived once from a validated ModelSpec.
/// Immutable and shareable across concurrent realizations.
struct CompiledModel {
  std::shared_ptr<const ModelSpec> spec;
  std::vector<CompiledReaction> reactions;
  std::vector<std::vector<std::uint32_t>> voxel_reactions;  ///< active reactions per voxel
  DiffusionMatrix diffusion;
  Sha256Digest model_hash{};

  static std::shared_ptr<const CompiledModel> compile(const ModelSpec& model);
  /// Use a caller-provided diffusion matrix instead of assembling one.
  static std::shared_ptr<const CompiledModel> compile(const ModelSpec& model, DiffusionMatrix diffusion);

  std::size_t num_voxels() const { return spec->num_voxels(); }
  std::size_t num_species() const { return spec->species.size(); }
};

}  // namespace rdfleet
