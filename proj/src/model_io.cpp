#include "rdfleet/model_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rdfleet/error.hpp"

namespace rdfleet {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ParseError("model line " + std::to_string(line) + ": " + msg, line, 0);
}

double to_double(std::size_t line, std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "expected a number, got '" + std::string(s) + "'");
  return v;
}

template <typename Int>
Int to_int(std::size_t line, std::string_view s) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

bool valid_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::set<int> parse_labels(std::size_t line, std::string_view s) {
  std::set<int> out;
  if (s == "*") return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto part = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    out.insert(to_int<int>(line, part));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::map<std::string, int> parse_side(std::size_t line, std::string_view side) {
  std::map<std::string, int> out;
  side = trim(side);
  if (side.empty() || side == "0") return out;
  std::size_t start = 0;
  while (true) {
    const auto plus = side.find('+', start);
    auto term = trim(side.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start));
    if (term.empty()) fail(line, "empty term in reaction");
    std::size_t digits = 0;
    while (digits < term.size() && std::isdigit(static_cast<unsigned char>(term[digits]))) ++digits;
    int coef = 1;
    if (digits > 0) coef = to_int<int>(line, term.substr(0, digits));
    const auto name = trim(term.substr(digits));
    if (!valid_identifier(name)) fail(line, "invalid species name '" + std::string(name) + "'");
    out[std::string(name)] += coef;
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return out;
}

Reaction parse_reaction(std::size_t line, std::string_view text) {
  Reaction r;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) fail(line, "reaction needs 'name: reactants -> products @ propensity'");
  r.name = std::string(trim(text.substr(0, colon)));
  if (!valid_identifier(r.name)) fail(line, "invalid reaction name '" + r.name + "'");
  auto rest = text.substr(colon + 1);
  const auto arrow = rest.find("->");
  const auto at = rest.find('@');
  if (arrow == std::string_view::npos || at == std::string_view::npos || at < arrow) {
    fail(line, "reaction needs 'reactants -> products @ propensity'");
  }
  r.reactants = parse_side(line, rest.substr(0, arrow));
  r.products = parse_side(line, rest.substr(arrow + 2, at - arrow - 2));
  auto prop = trim(rest.substr(at + 1));

  if (prop.starts_with("massaction(")) {
    const auto close = prop.find(')');
    if (close == std::string_view::npos) fail(line, "unterminated massaction(");
    r.propensity = MassAction{std::string(trim(prop.substr(11, close - 11)))};
    prop = trim(prop.substr(close + 1));
  } else if (prop.starts_with("expr(\"")) {
    const auto end_quote = prop.find('"', 6);
    if (end_quote == std::string_view::npos || end_quote + 1 >= prop.size() || prop[end_quote + 1] != ')') {
      fail(line, "unterminated expr(\"...\")");
    }
    r.propensity = CustomPropensity{std::string(prop.substr(6, end_quote - 6))};
    prop = trim(prop.substr(end_quote + 2));
  } else {
    fail(line, "propensity must be massaction(k) or expr(\"...\")");
  }
  if (!prop.empty()) {
    if (!prop.starts_with("in ")) fail(line, "unexpected text after propensity: '" + std::string(prop) + "'");
    r.restrict_to = parse_labels(line, trim(prop.substr(3)));
  }
  return r;
}

void append_side(std::string& out, const std::map<std::string, int>& side) {
  if (side.empty()) {
    out += "0";
    return;
  }
  bool first = true;
  for (const auto& [name, count] : side) {
    if (!first) out += " + ";
    first = false;
    if (count != 1) out += std::to_string(count) + " ";
    out += name;
  }
}

std::string labels_text(const std::set<int>& labels) {
  if (labels.empty()) return "*";
  std::string s;
  for (int l : labels) {
    if (!s.empty()) s += ",";
    s += std::to_string(l);
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ModelSpec parse_model(std::string_view text, const std::filesystem::path& base_dir, bool attach) {
  ModelSpec m;
  m.tspan.clear();
  bool mesh_seen = false;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view sv = raw;
    // '#' starts a comment except inside expr("...")
    bool in_quotes = false;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (sv[i] == '"') in_quotes = !in_quotes;
      if (sv[i] == '#' && !in_quotes) {
        sv = sv.substr(0, i);
        break;
      }
    }
    sv = trim(sv);
    if (sv.empty()) continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') fail(line, "malformed section header");
      section = std::string(trim(sv.substr(1, sv.size() - 2)));
      static const std::set<std::string> known{"model", "mesh", "species", "parameters", "reactions", "initial", "tspan"};
      if (!known.count(section)) fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto toks = split_ws(sv);
    if (section.empty()) fail(line, "content before the first section");

    if (section == "model") {
      if (toks.size() != 2 || toks[0] != "name") fail(line, "expected 'name <identifier>'");
      m.name = toks[1];
    } else if (section == "mesh") {
      if (mesh_seen) fail(line, "[mesh] takes a single line");
      mesh_seen = true;
      if (toks.size() >= 2 && toks[0] == "builtin" && toks[1] == "grid") {
        if (toks.size() < 3) fail(line, "grid needs a dimension");
        GridSource g;
        g.dim = to_int<int>(line, toks[2]);
        if (g.dim < 1 || g.dim > 3 || toks.size() != static_cast<std::size_t>(3 + 2 * g.dim)) {
          fail(line, "expected 'builtin grid <dim> <lengths...> <counts...>'");
        }
        for (int a = 0; a < g.dim; ++a) g.lengths.push_back(to_double(line, toks[3 + a]));
        for (int a = 0; a < g.dim; ++a) g.n_per_axis.push_back(to_int<int>(line, toks[3 + g.dim + a]));
        m.mesh_source = g;
      } else if (toks.size() >= 2 && toks[0] == "builtin" && toks[1] == "sphere") {
        if (toks.size() != 4 && toks.size() != 5) fail(line, "expected 'builtin sphere <radius> <subdivisions> [layers]'");
        SphereSource s;
        s.radius = to_double(line, toks[2]);
        s.n_subdiv = to_int<int>(line, toks[3]);
        if (toks.size() == 5) s.interior_layers = to_int<int>(line, toks[4]);
        m.mesh_source = s;
      } else if (toks.size() == 2 && toks[0] == "file") {
        std::filesystem::path p(toks[1]);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        m.mesh_source = FileSource{p.lexically_normal().string()};
      } else {
        fail(line, "expected 'builtin grid ...', 'builtin sphere ...' or 'file <path>'");
      }
    } else if (section == "species") {
      if (toks.size() != 2 && toks.size() != 3) fail(line, "expected '<name> <D> [subdomains]'");
      if (!valid_identifier(toks[0])) fail(line, "invalid species name '" + toks[0] + "'");
      Species s{toks[0], to_double(line, toks[1]), {}};
      if (toks.size() == 3) s.allowed_subdomains = parse_labels(line, toks[2]);
      m.species.push_back(std::move(s));
    } else if (section == "parameters") {
      if (toks.size() != 2) fail(line, "expected '<name> <value>'");
      if (!valid_identifier(toks[0])) fail(line, "invalid parameter name '" + toks[0] + "'");
      m.parameters.push_back({toks[0], to_double(line, toks[1])});
    } else if (section == "reactions") {
      m.reactions.push_back(parse_reaction(line, sv));
    } else if (section == "initial") {
      if (toks.size() == 4 && toks[0] == "scatter") {
        m.initial.emplace_back(ScatterDirective{toks[1], to_int<std::uint64_t>(line, toks[2]), to_int<int>(line, toks[3])});
      } else if (toks.size() == 4 && toks[0] == "set") {
        m.initial.emplace_back(SetDirective{toks[1], to_int<std::uint32_t>(line, toks[2]), to_int<std::uint64_t>(line, toks[3])});
      } else {
        fail(line, "expected 'scatter <species> <count> <subdomain>' or 'set <species> <voxel> <count>'");
      }
    } else if (section == "tspan") {
      if (toks[0] == "linspace") {
        if (toks.size() != 4 || !m.tspan.empty()) fail(line, "expected a single 'linspace <t0> <t1> <n>'");
        Linspace ls{to_double(line, toks[1]), to_double(line, toks[2]), to_int<std::size_t>(line, toks[3])};
        m.tspan = ls.values();
        m.tspan_linspace = ls;
      } else {
        if (m.tspan_linspace) fail(line, "cannot mix linspace with explicit times");
        for (const auto& t : toks) m.tspan.push_back(to_double(line, t));
      }
    }
  }
  if (!mesh_seen) fail(line, "missing [mesh] section");
  if (attach) m.attach_mesh();
  return m;
}

ModelSpec load_model(const std::filesystem::path& path, bool attach) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path.parent_path(), attach);
}

std::string serialize_model(const ModelSpec& m) {
  std::string out;
  out += "[model]\nname " + m.name + "\n\n[mesh]\n";
  std::visit(
      [&](const auto& src) {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, GridSource>) {
          out += "builtin grid " + std::to_string(src.dim);
          for (double l : src.lengths) out += " " + format_double(l);
          for (int n : src.n_per_axis) out += " " + std::to_string(n);
        } else if constexpr (std::is_same_v<T, SphereSource>) {
          out += "builtin sphere " + format_double(src.radius) + " " + std::to_string(src.n_subdiv) + " " +
                 std::to_string(src.interior_layers);
        } else {
          out += "file " + src.path;
        }
      },
      m.mesh_source);
  out += "\n\n[species]\n";
  for (const auto& s : m.species) {
    out += s.name + " " + format_double(s.diffusion_constant) + " " + labels_text(s.allowed_subdomains) + "\n";
  }
  out += "\n[parameters]\n";
  for (const auto& p : m.parameters) out += p.name + " " + format_double(p.value) + "\n";
  out += "\n[reactions]\n";
  for (const auto& r : m.reactions) {
    out += r.name + ": ";
    append_side(out, r.reactants);
    out += " -> ";
    append_side(out, r.products);
    if (const auto* ma = std::get_if<MassAction>(&r.propensity)) {
      out += " @ massaction(" + ma->rate + ")";
    } else {
      out += " @ expr(\"" + std::get<CustomPropensity>(r.propensity).source + "\")";
    }
    if (!r.restrict_to.empty()) out += " in " + labels_text(r.restrict_to);
    out += "\n";
  }
  out += "\n[initial]\n";
  for (const auto& d : m.initial) {
    if (const auto* s = std::get_if<ScatterDirective>(&d)) {
      out += "scatter " + s->species + " " + std::to_string(s->count) + " " + std::to_string(s->subdomain) + "\n";
    } else {
      const auto& set = std::get<SetDirective>(d);
      out += "set " + set.species + " " + std::to_string(set.voxel) + " " + std::to_string(set.count) + "\n";
    }
  }
  out += "\n[tspan]\n";
  if (m.tspan_linspace && m.tspan_linspace->values() == m.tspan) {
    out += "linspace " + format_double(m.tspan_linspace->t0) + " " + format_double(m.tspan_linspace->t1) + " " +
           std::to_string(m.tspan_linspace->n) + "\n";
  } else {
    for (std::size_t i = 0; i < m.tspan.size(); ++i) {
      out += format_double(m.tspan[i]);
      out += (i + 1) % 8 == 0 || i + 1 == m.tspan.size() ? "\n" : " ";
    }
  }
  return out;
}

}  // namespace rdfleet
