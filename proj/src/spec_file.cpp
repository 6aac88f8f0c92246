#include "gqec/spec_file.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "gqec/exceptions.hpp"

namespace gqec {
namespace {

std::string location(const std::string& name, int line, int col) {
  return name + ":" + std::to_string(line) + ":" + std::to_string(col);
}

[[noreturn]] void fail(const std::string& name, int line, int col,
                       const std::string& what) {
  throw ParseError("[spec] " + location(name, line, col) + ": " + what);
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

// Trims and reports the 1-based column where the kept text starts.
std::string trim(const std::string& text, int* col_out = nullptr) {
  std::size_t begin = 0;
  while (begin < text.size() &&
         std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  std::size_t end = text.size();
  while (end > begin &&
         std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  if (col_out) *col_out = static_cast<int>(begin) + 1;
  return text.substr(begin, end - begin);
}

std::int64_t parse_int(const std::string& text, const std::string& name,
                       int line, int col) {
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    fail(name, line, col, "expected an integer, got '" + text + "'");
  }
  if (used != text.size()) {
    fail(name, line, col, "trailing characters after integer in '" + text + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string current;
  for (const char c : text) {
    if (c == sep) {
      out.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  out.push_back(current);
  return out;
}

// Splits on `sep` at parenthesis depth zero only.
std::vector<std::string> split_top_level(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (const char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  out.push_back(current);
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text,
                                         const std::string& name, int line,
                                         int col) {
  std::vector<std::int64_t> out;
  for (const std::string& part : split(text, ',')) {
    out.push_back(parse_int(trim(part), name, line, col));
  }
  return out;
}

// One key = value assignment with its source location.
struct Assignment {
  std::string value;
  int line = 0;
  int col = 0;  // column where the value starts
};

using KeyMap = std::map<std::string, Assignment>;

KeyMap read_key_values(const std::string& text, const std::string& name) {
  KeyMap keys;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(name, line_no, 1, "expected 'key = value'");
    }
    int key_col = 1;
    const std::string key = trim(line.substr(0, eq), &key_col);
    int value_col = 1;
    const std::string value = trim(line.substr(eq + 1), &value_col);
    value_col += static_cast<int>(eq) + 1;
    if (key.empty()) fail(name, line_no, key_col, "empty key");
    if (keys.count(key)) {
      fail(name, line_no, key_col, "duplicate key '" + key + "'");
    }
    keys[key] = Assignment{value, line_no, value_col};
  }
  return keys;
}

// Pops `key`; empty optional when absent.
std::optional<Assignment> take(KeyMap& keys, const std::string& key) {
  const auto it = keys.find(key);
  if (it == keys.end()) return std::nullopt;
  Assignment out = it->second;
  keys.erase(it);
  return out;
}

Assignment require(KeyMap& keys, const std::string& key,
                   const std::string& name) {
  auto got = take(keys, key);
  if (!got) fail(name, 1, 1, "missing required key '" + key + "'");
  return *got;
}

// Accepts "head(arg,...)" and returns the args; empty optional otherwise.
std::optional<std::vector<std::string>> match_call(const std::string& text,
                                                   const std::string& head) {
  if (text.size() < head.size() + 2) return std::nullopt;
  if (text.compare(0, head.size(), head) != 0) return std::nullopt;
  if (text[head.size()] != '(' || text.back() != ')') return std::nullopt;
  const std::string inner =
      text.substr(head.size() + 1, text.size() - head.size() - 2);
  std::vector<std::string> args;
  for (const std::string& part : split(inner, ',')) args.push_back(trim(part));
  return args;
}

Lattice parse_geometry(KeyMap& keys, const std::string& name) {
  const Assignment geometry = require(keys, "geometry", name);
  if (auto args = match_call(geometry.value, "ring")) {
    if (args->size() != 1) {
      fail(name, geometry.line, geometry.col, "ring takes one argument");
    }
    return Lattice::ring(static_cast<int>(
        parse_int((*args)[0], name, geometry.line, geometry.col)));
  }
  if (auto args = match_call(geometry.value, "torus")) {
    if (args->size() != 2) {
      fail(name, geometry.line, geometry.col, "torus takes two arguments");
    }
    return Lattice::torus(
        static_cast<int>(
            parse_int((*args)[0], name, geometry.line, geometry.col)),
        static_cast<int>(
            parse_int((*args)[1], name, geometry.line, geometry.col)));
  }
  if (geometry.value == "explicit") {
    const Assignment links = require(keys, "links", name);
    std::vector<Link> parsed;
    int max_vertex = -1;
    for (const std::string& part : split(links.value, ',')) {
      std::istringstream pair(part);
      int tail = 0;
      int head = 0;
      if (!(pair >> tail >> head)) {
        fail(name, links.line, links.col,
             "expected 'tail head' pairs, got '" + trim(part) + "'");
      }
      std::string rest;
      if (pair >> rest) {
        fail(name, links.line, links.col,
             "trailing characters in link pair '" + trim(part) + "'");
      }
      parsed.push_back(Link{tail, head});
      max_vertex = std::max({max_vertex, tail, head});
    }
    int num_vertices = max_vertex + 1;
    if (auto vertices = take(keys, "vertices")) {
      num_vertices = static_cast<int>(
          parse_int(vertices->value, name, vertices->line, vertices->col));
    }
    return Lattice(num_vertices, std::move(parsed), name);
  }
  fail(name, geometry.line, geometry.col,
       "unknown geometry '" + geometry.value + "'");
}

CodeFamily parse_family(const Assignment& family, const std::string& name) {
  if (family.value == "pure-gauge") return CodeFamily::PureGaugeGL;
  if (family.value == "bosonic-gl") return CodeFamily::BosonicGL;
  if (family.value == "fermionic-gl") return CodeFamily::FermionicGL;
  if (family.value == "bosonic-vacuum") return CodeFamily::BosonicVacuum;
  if (family.value == "fermionic-vacuum") return CodeFamily::FermionicVacuum;
  fail(name, family.line, family.col,
       "unknown family '" + family.value + "'");
}

Character parse_character(const GroupSpec& group, const Assignment& value,
                          const std::string& name) {
  const std::vector<std::int64_t> exps =
      parse_int_list(value.value, name, value.line, value.col);
  if (exps.size() != static_cast<std::size_t>(group.rank())) {
    fail(name, value.line, value.col,
         "expected " + std::to_string(group.rank()) +
             " character exponent(s), got " + std::to_string(exps.size()));
  }
  return group.character(exps);
}

MatterContent parse_matter(KeyMap& keys, const GroupSpec& group,
                           CodeFamily family, const std::string& name) {
  const bool bosonic = family == CodeFamily::BosonicGL ||
                       family == CodeFamily::BosonicVacuum;
  const bool fermionic = family == CodeFamily::FermionicGL ||
                         family == CodeFamily::FermionicVacuum;
  if (fermionic) {
    const Assignment charge = require(keys, "fermion-charge", name);
    return MatterContent::fermionic(parse_character(group, charge, name));
  }
  if (!bosonic) return MatterContent::none();

  const Assignment count = require(keys, "species", name);
  const std::int64_t n = parse_int(count.value, name, count.line, count.col);
  if (n < 1) fail(name, count.line, count.col, "species count must be >= 1");
  std::vector<BosonSpecies> species;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::string suffix = "." + std::to_string(i);
    const Assignment charge = require(keys, "charge" + suffix, name);
    BosonSpecies s{parse_character(group, charge, name)};
    if (auto kind = take(keys, "kind" + suffix)) {
      if (kind->value == "oscillator") {
        s.oscillator_pair = true;
      } else if (kind->value != "finite") {
        fail(name, kind->line, kind->col,
             "unknown species kind '" + kind->value + "'");
      }
    }
    if (auto cutoff = take(keys, "cutoff" + suffix)) {
      if (!s.oscillator_pair) {
        fail(name, cutoff->line, cutoff->col,
             "cutoff applies to oscillator species only");
      }
      s.cutoff = parse_int(cutoff->value, name, cutoff->line, cutoff->col);
    }
    species.push_back(std::move(s));
  }
  return MatterContent::bosonic(std::move(species));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("[spec] cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Renders character exponents: bare integer for single-factor groups,
// "(a,b)" otherwise (matching Character::to_string).
std::string exponent_field(const Character& chi) { return chi.to_string(); }

Character parse_exponent_field(const GroupSpec& group, const std::string& text,
                               const std::string& name, int line) {
  std::string inner = text;
  if (!inner.empty() && inner.front() == '(') {
    if (inner.back() != ')') {
      fail(name, line, 1, "unbalanced parentheses in '" + text + "'");
    }
    inner = inner.substr(1, inner.size() - 2);
  }
  const std::vector<std::int64_t> exps = parse_int_list(inner, name, line, 1);
  if (exps.size() != static_cast<std::size_t>(group.rank())) {
    fail(name, line, 1,
         "expected " + std::to_string(group.rank()) +
             " exponent(s) per component, got '" + text + "'");
  }
  return group.character(exps);
}

// Splits a parenthesized tuple into its top-level components.
std::vector<std::string> parse_tuple(const std::string& text,
                                     const std::string& name, int line,
                                     const std::string& what) {
  const std::string body = trim(text);
  if (body.size() < 2 || body.front() != '(' || body.back() != ')') {
    fail(name, line, 1, what + " must be a parenthesized tuple, got '" +
                            body + "'");
  }
  std::vector<std::string> out;
  for (const std::string& part :
       split_top_level(body.substr(1, body.size() - 2), ',')) {
    out.push_back(trim(part));
  }
  return out;
}

GaussScope section_scope(CodeFamily family) {
  return family == CodeFamily::BosonicGL || family == CodeFamily::FermionicGL
             ? GaussScope::AllVertices
             : GaussScope::ExcludeRoot;
}

}  // namespace

SpecModel parse_spec_text(const std::string& text, const std::string& name) {
  KeyMap keys = read_key_values(text, name);

  const Assignment group_value = require(keys, "group", name);
  GroupSpec group({2});
  try {
    group = GroupSpec::parse(group_value.value);
  } catch (const ParseError& err) {
    fail(name, group_value.line, group_value.col, err.what());
  }

  Lattice lattice = parse_geometry(keys, name);
  const CodeFamily family = parse_family(require(keys, "family", name), name);
  MatterContent matter = parse_matter(keys, group, family, name);

  int root = 0;
  if (auto value = take(keys, "root")) {
    root = static_cast<int>(
        parse_int(value->value, name, value->line, value->col));
  }

  std::optional<std::vector<int>> tree_links;
  if (auto value = take(keys, "tree")) {
    if (value->value != "bfs") {
      std::vector<int> links;
      for (const std::int64_t l :
           parse_int_list(value->value, name, value->line, value->col)) {
        links.push_back(static_cast<int>(l));
      }
      tree_links = std::move(links);
    }
  }

  std::int64_t dimension_cap = kDefaultDimensionCap;
  if (auto value = take(keys, "dimension-cap")) {
    dimension_cap = parse_int(value->value, name, value->line, value->col);
  }

  if (!keys.empty()) {
    const auto& first = *keys.begin();
    fail(name, first.second.line, 1, "unknown key '" + first.first + "'");
  }

  return SpecModel{std::move(group),  std::move(lattice), root,
                   std::move(tree_links), family,         std::move(matter),
                   dimension_cap};
}

SpecModel load_spec_file(const std::string& path) {
  return parse_spec_text(read_file(path), path);
}

CodeInstance build_from_spec(const SpecModel& model) {
  const SpanningTree tree =
      model.tree_links
          ? SpanningTree::from_links(model.lattice, model.root,
                                     *model.tree_links)
          : SpanningTree::build(model.lattice, model.root);
  return build_code(model.lattice, model.group, tree, model.matter,
                    model.family, model.dimension_cap);
}

std::vector<ErrorOp> parse_error_lines(const std::string& text,
                                       const std::string& name,
                                       const GroupSpec& group) {
  std::vector<ErrorOp> out;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    int col = 1;
    const std::string line = trim(strip_comment(raw), &col);
    if (line.empty()) continue;
    try {
      ErrorOp op = parse_error_literal(group, line);
      if (op.label.empty()) op.label = line;
      out.push_back(std::move(op));
    } catch (const ParseError& err) {
      fail(name, line_no, col, err.what());
    }
  }
  return out;
}

std::vector<ErrorOp> load_error_file(const std::string& path,
                                     const GroupSpec& group) {
  return parse_error_lines(read_file(path), path, group);
}

std::vector<MatterIndex> matter_order(const MatterContent& matter,
                                      int num_vertices) {
  std::vector<MatterIndex> out;
  for (int v = 0; v < num_vertices; ++v) {
    if (matter.kind() == MatterContent::Kind::Fermionic) {
      out.push_back(MatterIndex{v, 0, 0});
      continue;
    }
    for (std::size_t s = 0; s < matter.species().size(); ++s) {
      out.push_back(MatterIndex{v, static_cast<int>(s), 0});
      if (matter.species()[s].oscillator_pair) {
        out.push_back(MatterIndex{v, static_cast<int>(s), 1});
      }
    }
  }
  return out;
}

std::string section_to_text(const Section& sec, const CodeInstance& code) {
  const std::vector<MatterIndex> order =
      code.has_matter() ? matter_order(code.matter(),
                                       code.lattice().num_vertices())
                        : std::vector<MatterIndex>{};
  std::ostringstream out;
  out << "# label: " << sec.label() << '\n';
  if (sec.truncated_base()) out << "# truncated-base\n";
  for (const SectionEntry& entry : sec.entries()) {
    out << '(';
    for (int v = 0; v < entry.syndrome.num_vertices(); ++v) {
      if (v) out << ',';
      out << exponent_field(entry.syndrome.charge(v));
    }
    out << ") -> (";
    for (int l = 0; l < code.lattice().num_links(); ++l) {
      if (l) out << ',';
      out << exponent_field(entry.links.exponent(l));
    }
    out << ')';
    if (!entry.matter_x.empty()) {
      out << " ; (";
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) out << ',';
        const auto it = entry.matter_x.find(order[i]);
        out << (it == entry.matter_x.end() ? 0 : it->second);
      }
      out << ')';
    }
    out << '\n';
  }
  return out.str();
}

Section parse_section_text(const std::string& text, const std::string& name,
                           const CodeInstance& code) {
  const GroupSpec& group = code.group();
  const Lattice& lattice = code.lattice();
  const GaussScope scope = section_scope(code.family());
  const bool matter_allowed = code.family() == CodeFamily::BosonicGL ||
                              code.family() == CodeFamily::FermionicGL;
  const std::vector<MatterIndex> order =
      matter_allowed
          ? matter_order(code.matter(), lattice.num_vertices())
          : std::vector<MatterIndex>{};

  std::string label = name;
  std::vector<SectionEntry> parsed;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string trimmed_raw = trim(raw);
    if (trimmed_raw.rfind("# label:", 0) == 0) {
      label = trim(trimmed_raw.substr(8));
      continue;
    }
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    const auto arrow = line.find("->");
    if (arrow == std::string::npos) {
      fail(name, line_no, 1, "expected 'syndrome -> correction'");
    }
    const std::vector<std::string> lhs =
        parse_tuple(line.substr(0, arrow), name, line_no, "syndrome");
    if (lhs.size() != static_cast<std::size_t>(lattice.num_vertices())) {
      fail(name, line_no, 1,
           "syndrome lists " + std::to_string(lhs.size()) + " vertices, " +
               "lattice has " + std::to_string(lattice.num_vertices()));
    }

    const std::vector<std::string> rhs_parts =
        split_top_level(line.substr(arrow + 2), ';');
    if (rhs_parts.size() > 2 || (rhs_parts.size() == 2 && !matter_allowed)) {
      fail(name, line_no, 1,
           "matter shifts are not accepted for this code family");
    }
    const std::vector<std::string> links =
        parse_tuple(rhs_parts[0], name, line_no, "link exponents");
    if (links.size() != static_cast<std::size_t>(lattice.num_links())) {
      fail(name, line_no, 1,
           "correction lists " + std::to_string(links.size()) + " links, " +
               "lattice has " + std::to_string(lattice.num_links()));
    }

    std::vector<Character> charges;
    for (const std::string& field : lhs) {
      charges.push_back(parse_exponent_field(group, field, name, line_no));
    }
    WilsonLineProduct flux(group);
    for (std::size_t l = 0; l < links.size(); ++l) {
      const Character chi =
          parse_exponent_field(group, links[l], name, line_no);
      if (!chi.is_trivial()) flux.multiply(static_cast<int>(l), chi);
    }
    MatterShift shifts;
    if (rhs_parts.size() == 2) {
      const std::vector<std::string> fields =
          parse_tuple(rhs_parts[1], name, line_no, "matter shifts");
      if (fields.size() != order.size()) {
        fail(name, line_no, 1,
             "matter tuple lists " + std::to_string(fields.size()) +
                 " registers, the code has " + std::to_string(order.size()));
      }
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::int64_t k = parse_int(fields[i], name, line_no, 1);
        if (k) shifts[order[i]] = k;
      }
    }

    SectionEntry entry{Syndrome(group, std::move(charges), scope,
                                code.tree().root()),
                       std::move(flux), std::move(shifts),
                       label + ":" + std::to_string(line_no)};
    parsed.push_back(std::move(entry));
  }

  Section out(label);
  for (SectionEntry& entry : parsed) out.add(std::move(entry));
  return out;
}

Section load_section_file(const std::string& path, const CodeInstance& code) {
  return parse_section_text(read_file(path), path, code);
}

}  // namespace gqec
