#include "rdfleet/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "rdfleet/error.hpp"
#include "rdfleet/model_io.hpp"

namespace rdfleet {

LabeledMesh build_mesh(const MeshSource& source) {
  return std::visit(
      [](const auto& src) -> LabeledMesh {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, GridSource>) {
          Mesh m = build_cartesian_grid(src.dim, src.lengths, src.n_per_axis);
          auto sub = SubdomainMap::uniform(m.num_voxels());
          return {std::move(m), std::move(sub)};
        } else if constexpr (std::is_same_v<T, SphereSource>) {
          return build_sphere_shell_mesh(src.radius, src.n_subdiv, src.interior_layers);
        } else {
          return load_mesh(src.path);
        }
      },
      source);
}

std::vector<double> Linspace::values() const {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? t0 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  if (n > 1) v.back() = t1;
  return v;
}

void ModelSpec::attach_mesh() { attach_mesh(build_mesh(mesh_source)); }

void ModelSpec::attach_mesh(LabeledMesh labeled) {
  mesh = std::make_shared<const Mesh>(std::move(labeled.mesh));
  subdomains = std::make_shared<const SubdomainMap>(std::move(labeled.subdomains));
}

std::optional<std::size_t> ModelSpec::species_index(std::string_view n) const {
  for (std::size_t i = 0; i < species.size(); ++i) {
    if (species[i].name == n) return i;
  }
  return std::nullopt;
}

std::optional<double> ModelSpec::parameter(std::string_view n) const {
  for (const auto& p : parameters) {
    if (p.name == n) return p.value;
  }
  return std::nullopt;
}

void ModelSpec::set_parameter(std::string_view n, double value) {
  for (auto& p : parameters) {
    if (p.name == n) {
      p.value = value;
      return;
    }
  }
  throw ModelError("unknown parameter '" + std::string(n) + "'");
}

double mass_action_propensity(double k, std::span<const std::pair<std::size_t, int>> reactants,
                              std::span<const std::int64_t> voxel_counts, double volume) {
  if (reactants.empty()) return k * volume;
  if (reactants.size() == 1) {
    const auto x = static_cast<double>(voxel_counts[reactants[0].first]);
    if (reactants[0].second == 1) return k * x;
    return k / volume * x * (x - 1.0) / 2.0;  // 2A
  }
  const auto xa = static_cast<double>(voxel_counts[reactants[0].first]);
  const auto xb = static_cast<double>(voxel_counts[reactants[1].first]);
  return k / volume * xa * xb;
}

void scatter_initial(const ModelSpec& model, std::size_t species, std::uint64_t total_count, int subdomain,
                     RandomStream& rng, StateMatrix& state) {
  if (total_count == 0) return;
  if (!model.mesh || !model.subdomains) throw ModelError("model has no mesh");
  if (species >= model.species.size()) throw ModelError("scatter: species index out of range");
  const Species& sp = model.species[species];
  if (!model.subdomains->has(subdomain)) {
    throw ModelError("scatter: undeclared subdomain " + std::to_string(subdomain));
  }
  if (!sp.allowed_in(subdomain)) {
    throw ModelError("scatter: species '" + sp.name + "' is not permitted in subdomain " + std::to_string(subdomain));
  }
  const auto members = model.subdomains->members(subdomain);
  if (members.empty()) throw ModelError("scatter: subdomain " + std::to_string(subdomain) + " has no voxels");
  std::vector<double> cumulative(members.size());
  double acc = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    acc += model.mesh->volumes()[members[m]];
    cumulative[m] = acc;
  }
  for (std::uint64_t n = 0; n < total_count; ++n) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    state.at(members[static_cast<std::size_t>(it - cumulative.begin())], species) += 1;
  }
}

StateMatrix resolve_initial_state(const ModelSpec& model, RandomStream& rng) {
  StateMatrix state(model.num_voxels(), model.species.size());
  for (const auto& d : model.initial) {
    std::visit(
        [&](const auto& dir) {
          auto s = model.species_index(dir.species);
          if (!s) throw ModelError("initial condition names undeclared species '" + dir.species + "'");
          using T = std::decay_t<decltype(dir)>;
          if constexpr (std::is_same_v<T, ScatterDirective>) {
            scatter_initial(model, *s, dir.count, dir.subdomain, rng, state);
          } else {
            if (dir.voxel >= state.num_voxels) throw ModelError("initial condition voxel out of range");
            state.at(dir.voxel, *s) += static_cast<std::int64_t>(dir.count);
          }
        },
        d);
  }
  return state;
}

namespace {

bool parse_number(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<double> resolve_rate(const ModelSpec& model, const std::string& rate) {
  if (auto p = model.parameter(rate)) return p;
  double v = 0.0;
  if (parse_number(rate, v)) return v;
  return std::nullopt;
}

BoundExpr::Resolver make_resolver(const ModelSpec& model) {
  return [&model](std::string_view name) -> std::optional<ExprSlot> {
    if (name == "vol") return ExprSlot{ExprSlot::Kind::Volume, 0, 0.0};
    if (auto s = model.species_index(name)) return ExprSlot{ExprSlot::Kind::SpeciesCount, *s, 0.0};
    if (auto p = model.parameter(name)) return ExprSlot{ExprSlot::Kind::Constant, 0, *p};
    return std::nullopt;
  };
}

}  // namespace

std::vector<Diagnostic> validate_model(const ModelSpec& model) {
  std::vector<Diagnostic> out;
  auto diag = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };

  const bool have_mesh = model.mesh && model.subdomains;
  if (!have_mesh) diag("NO_MESH", "model has no mesh attached");
  auto label_declared = [&](int label) { return !have_mesh || model.subdomains->has(label); };

  std::set<std::string> species_names;
  for (const auto& s : model.species) {
    if (!species_names.insert(s.name).second) diag("DUPLICATE_SPECIES", "species '" + s.name + "' declared twice");
    if (s.name == "vol") diag("NAME_CLASH", "'vol' is reserved for the voxel volume");
    if (!(s.diffusion_constant >= 0.0) || !std::isfinite(s.diffusion_constant)) {
      diag("INVALID_DIFFUSION", "species '" + s.name + "' has a negative or non-finite diffusion constant");
    }
    for (int label : s.allowed_subdomains) {
      if (!label_declared(label)) {
        diag("UNDECLARED_SUBDOMAIN", "species '" + s.name + "' references subdomain " + std::to_string(label));
      }
    }
  }
  std::set<std::string> param_names;
  for (const auto& p : model.parameters) {
    if (!param_names.insert(p.name).second) diag("DUPLICATE_PARAMETER", "parameter '" + p.name + "' declared twice");
    if (species_names.count(p.name) || p.name == "vol") {
      diag("NAME_CLASH", "parameter '" + p.name + "' clashes with a species or reserved name");
    }
    if (!std::isfinite(p.value)) diag("INVALID_PARAMETER", "parameter '" + p.name + "' is not finite");
  }

  for (const auto& r : model.reactions) {
    const std::string where = "reaction '" + r.name + "'";
    int reactant_total = 0;
    std::map<std::string, int> change;
    for (const auto& [name, count] : r.reactants) {
      if (!species_names.count(name)) diag("UNDECLARED_SPECIES", where + " uses undeclared species '" + name + "'");
      if (count <= 0) diag("INVALID_STOICHIOMETRY", where + " has non-positive coefficient for '" + name + "'");
      reactant_total += count;
      change[name] -= count;
    }
    for (const auto& [name, count] : r.products) {
      if (!species_names.count(name)) diag("UNDECLARED_SPECIES", where + " uses undeclared species '" + name + "'");
      if (count <= 0) diag("INVALID_STOICHIOMETRY", where + " has non-positive coefficient for '" + name + "'");
      change[name] += count;
    }
    if (std::all_of(change.begin(), change.end(), [](const auto& kv) { return kv.second == 0; })) {
      diag("ZERO_CHANGE", where + " does not change the state");
    }
    for (int label : r.restrict_to) {
      if (!label_declared(label)) diag("UNDECLARED_SUBDOMAIN", where + " references subdomain " + std::to_string(label));
    }
    if (const auto* ma = std::get_if<MassAction>(&r.propensity)) {
      if (reactant_total > 2) diag("TOO_MANY_REACTANTS", where + " has more than two reactant molecules");
      auto k = resolve_rate(model, ma->rate);
      if (!k) {
        diag("UNDECLARED_PARAMETER", where + " uses undeclared rate '" + ma->rate + "'");
      } else if (!(*k >= 0.0) || !std::isfinite(*k)) {
        diag("INVALID_RATE", where + " has a negative or non-finite rate");
      }
    } else {
      const auto& cp = std::get<CustomPropensity>(r.propensity);
      try {
        BoundExpr::bind(PropensityExpr::parse(cp.source), make_resolver(model));
      } catch (const ParseError& e) {
        diag("BAD_EXPRESSION", where + ": " + e.what());
      }
    }
  }

  if (model.tspan.empty()) {
    diag("EMPTY_TSPAN", "tspan has no output times");
  } else {
    if (!std::all_of(model.tspan.begin(), model.tspan.end(), [](double t) { return std::isfinite(t); })) {
      diag("TSPAN_NOT_FINITE", "tspan contains non-finite values");
    }
    if (model.tspan.front() < 0.0) diag("NEGATIVE_TSPAN_START", "tspan starts before 0");
    for (std::size_t i = 1; i < model.tspan.size(); ++i) {
      if (!(model.tspan[i] > model.tspan[i - 1])) {
        diag("TSPAN_NOT_INCREASING", "tspan is not strictly increasing at index " + std::to_string(i));
        break;
      }
    }
  }

  for (const auto& d : model.initial) {
    std::visit(
        [&](const auto& dir) {
          using T = std::decay_t<decltype(dir)>;
          auto s = model.species_index(dir.species);
          if (!s) {
            diag("UNDECLARED_SPECIES", "initial condition uses undeclared species '" + dir.species + "'");
            return;
          }
          const Species& sp = model.species[*s];
          if constexpr (std::is_same_v<T, ScatterDirective>) {
            if (!label_declared(dir.subdomain)) {
              diag("UNDECLARED_SUBDOMAIN", "scatter targets subdomain " + std::to_string(dir.subdomain));
            } else if (!sp.allowed_in(dir.subdomain)) {
              diag("INITIAL_FORBIDDEN", "scatter places '" + sp.name + "' in forbidden subdomain " + std::to_string(dir.subdomain));
            } else if (have_mesh && dir.count > 0 && model.subdomains->members(dir.subdomain).empty()) {
              diag("EMPTY_SUBDOMAIN", "scatter targets subdomain " + std::to_string(dir.subdomain) + " which has no voxels");
            }
          } else if (have_mesh) {
            if (dir.voxel >= model.num_voxels()) {
              diag("INITIAL_VOXEL_RANGE", "initial condition voxel " + std::to_string(dir.voxel) + " out of range");
            } else if (dir.count > 0 && !sp.allowed_in(model.subdomains->labels[dir.voxel])) {
              diag("INITIAL_FORBIDDEN", "initial condition places '" + sp.name + "' in forbidden voxel " + std::to_string(dir.voxel));
            }
          }
        },
        d);
  }
  return out;
}

std::shared_ptr<const CompiledModel> CompiledModel::compile(const ModelSpec& model) {
  if (!model.mesh || !model.subdomains) throw ModelError("model has no mesh attached");
  return compile(model, assemble_diffusion(*model.mesh, *model.subdomains, model.species));
}

std::shared_ptr<const CompiledModel> CompiledModel::compile(const ModelSpec& model, DiffusionMatrix diffusion) {
  if (auto diags = validate_model(model); !diags.empty()) {
    std::string msg = "model '" + model.name + "' is invalid:";
    for (const auto& d : diags) msg += "\n  " + d.code + ": " + d.message;
    throw ModelError(msg);
  }
  const std::size_t k = model.num_voxels();
  if (diffusion.num_voxels() != k || diffusion.num_species() != model.species.size()) {
    throw ModelError("diffusion matrix shape does not match the model");
  }
  auto cm = std::make_shared<CompiledModel>();
  cm->spec = std::make_shared<const ModelSpec>(model);
  cm->diffusion = std::move(diffusion);
  cm->model_hash = sha256(serialize_model(model));
  cm->voxel_reactions.assign(k, {});
  const auto resolver = make_resolver(*cm->spec);

  for (std::uint32_t r = 0; r < model.reactions.size(); ++r) {
    const Reaction& rx = model.reactions[r];
    CompiledReaction c;
    c.name = rx.name;
    std::map<std::size_t, int> change;
    for (const auto& [name, count] : rx.reactants) {
      const auto s = *model.species_index(name);
      c.reactants.emplace_back(s, count);
      change[s] -= count;
    }
    for (const auto& [name, count] : rx.products) change[*model.species_index(name)] += count;
    for (const auto& [s, d] : change) {
      if (d != 0) c.change.emplace_back(s, d);
    }
    if (const auto* ma = std::get_if<MassAction>(&rx.propensity)) {
      c.rate = *resolve_rate(model, ma->rate);
    } else {
      c.custom = true;
      c.expr = BoundExpr::bind(PropensityExpr::parse(std::get<CustomPropensity>(rx.propensity).source), resolver);
    }
    c.active.assign(k, false);
    for (std::size_t v = 0; v < k; ++v) {
      const int label = model.subdomains->labels[v];
      bool ok = rx.restrict_to.empty() || rx.restrict_to.count(label) != 0;
      for (const auto& [name, count] : rx.reactants) ok = ok && model.species[*model.species_index(name)].allowed_in(label);
      for (const auto& [name, count] : rx.products) ok = ok && model.species[*model.species_index(name)].allowed_in(label);
      c.active[v] = ok;
      if (ok) cm->voxel_reactions[v].push_back(r);
    }
    cm->reactions.push_back(std::move(c));
  }
  return cm;
}

}  // namespace rdfleet
