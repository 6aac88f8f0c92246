#include "gqec/gauss_map.hpp"

#include <algorithm>
#include <sstream>

#include "gqec/exceptions.hpp"

namespace gqec {

namespace {

constexpr std::int64_t kMaxBaseSize = std::int64_t{1} << 20;

void require_comparable(const Syndrome& a, const Syndrome& b) {
  if (a.group() != b.group()) {
    throw SpecMismatch("[syndrome] comparison across different groups");
  }
  if (a.scope() != b.scope()) {
    throw SpecMismatch("[syndrome] comparison across different scopes");
  }
  if (a.root() != b.root()) {
    throw SpecMismatch("[syndrome] comparison across different roots");
  }
  if (a.num_vertices() != b.num_vertices()) {
    throw SpecMismatch("[syndrome] comparison across different vertex counts");
  }
}

}  // namespace

Syndrome::Syndrome(GroupSpec group, std::vector<Character> charges,
                   GaussScope scope, int root)
    : group_(std::move(group)),
      charges_(std::move(charges)),
      scope_(scope),
      root_(root) {
  if (charges_.empty()) {
    throw SpecMismatch("[syndrome] empty charge profile");
  }
  if (root_ < 0 || root_ >= static_cast<int>(charges_.size())) {
    throw SpecMismatch("[syndrome] root out of range");
  }
  for (const Character& q : charges_) {
    if (q.factors() != group_.factors()) {
      throw SpecMismatch("[syndrome] charge group does not match syndrome group");
    }
  }
}

bool Syndrome::is_trivial() const {
  for (int v = 0; v < num_vertices(); ++v) {
    if (scope_ == GaussScope::ExcludeRoot && v == root_) continue;
    if (!charges_[v].is_trivial()) return false;
  }
  return true;
}

bool Syndrome::operator==(const Syndrome& other) const {
  require_comparable(*this, other);
  for (int v = 0; v < num_vertices(); ++v) {
    if (scope_ == GaussScope::ExcludeRoot && v == root_) continue;
    if (!(charges_[v] == other.charges_[v])) return false;
  }
  return true;
}

std::vector<std::int64_t> Syndrome::key() const {
  std::vector<std::int64_t> out;
  out.reserve(charges_.size());
  for (int v = 0; v < num_vertices(); ++v) {
    if (scope_ == GaussScope::ExcludeRoot && v == root_) continue;
    out.push_back(group_.index_of(charges_[v]));
  }
  return out;
}

std::string Syndrome::to_string() const {
  std::ostringstream out;
  out << '(';
  for (int v = 0; v < num_vertices(); ++v) {
    if (v) out << ',';
    if (scope_ == GaussScope::ExcludeRoot && v == root_) {
      out << '[' << charges_[v].to_string() << ']';
    } else {
      out << charges_[v].to_string();
    }
  }
  out << ')';
  return out.str();
}

Syndrome gauss_map(const WilsonLineProduct& w, const Lattice& lattice,
                   GaussScope scope, int root) {
  const GroupSpec& group = w.group();
  std::vector<Character> charges(lattice.num_vertices(),
                                 group.trivial_character());
  for (const auto& [link, chi] : w.exponents()) {
    const Link& l = lattice.link(link);
    charges[l.tail] = compose(charges[l.tail], chi);
    charges[l.head] = compose(charges[l.head], conjugate(chi));
  }
  return Syndrome(group, std::move(charges), scope, root);
}

Syndrome gauss_map_bosonic(const WilsonLineProduct& w, const MatterShift& x,
                           const MatterContent& matter, const Lattice& lattice,
                           int root) {
  if (matter.kind() != MatterContent::Kind::Bosonic) {
    throw FamilyMismatch("[gauss] bosonic divergence needs bosonic matter");
  }
  Syndrome base = gauss_map(w, lattice, GaussScope::AllVertices, root);
  const GroupSpec& group = w.group();
  std::vector<Character> charges;
  charges.reserve(base.num_vertices());
  for (int v = 0; v < base.num_vertices(); ++v) charges.push_back(base.charge(v));

  for (const auto& [idx, k] : x) {
    if (idx.vertex < 0 || idx.vertex >= lattice.num_vertices()) {
      throw IncompatibleError("[gauss] shift vertex out of range");
    }
    if (idx.species < 0 ||
        idx.species >= static_cast<int>(matter.species().size())) {
      throw IncompatibleError("[gauss] shift species out of range");
    }
    const BosonSpecies& s = matter.species()[idx.species];
    if (!s.oscillator_pair && idx.mode != 0) {
      throw IncompatibleError(
          "[gauss] finite-order species has no antiparticle mode register");
    }
    const int bound =
        s.oscillator_pair ? s.cutoff + 1 : character_order(s.charge);
    if (k < 0 || k >= bound) {
      throw OccupationOutOfRange("[gauss] shift " + std::to_string(k) +
                                 " outside register range [0," +
                                 std::to_string(bound) + ")");
    }
    // Mode 0 creates particles (charge^k), mode 1 antiparticles
    // (conjugate-charge^k).
    const Character contribution =
        idx.mode == 0 ? power(s.charge, k) : power(conjugate(s.charge), k);
    charges[idx.vertex] = compose(charges[idx.vertex], contribution);
  }
  return Syndrome(group, std::move(charges), GaussScope::AllVertices, root);
}

std::vector<Syndrome> enumerate_pure_base(const GroupSpec& group,
                                          const Lattice& lattice, int root) {
  const int nv = lattice.num_vertices();
  std::int64_t count = 1;
  for (int i = 0; i < nv - 1; ++i) {
    if (count > kMaxBaseSize / group.order()) {
      throw BaseNotEnumerable("[gauss] pure base larger than " +
                              std::to_string(kMaxBaseSize) + " syndromes");
    }
    count *= group.order();
  }
  std::vector<Syndrome> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t code = 0; code < count; ++code) {
    std::vector<Character> charges(nv, group.trivial_character());
    std::int64_t rest = code;
    Character total = group.trivial_character();
    for (int v = nv - 1; v >= 0; --v) {
      if (v == root) continue;
      charges[v] = group.character_at(rest % group.order());
      rest /= group.order();
      total = compose(total, charges[v]);
    }
    charges[root] = conjugate(total);  // global neutrality fixes the root
    out.emplace_back(group, std::move(charges), GaussScope::ExcludeRoot, root);
  }
  return out;
}

std::vector<Syndrome> enumerate_bosonic_base(const GroupSpec& group,
                                             const Lattice& lattice,
                                             const MatterContent& matter,
                                             int root) {
  if (matter.kind() != MatterContent::Kind::Bosonic) {
    throw FamilyMismatch("[gauss] bosonic base needs bosonic matter");
  }
  // Reachability: the species must express every charge.
  for (std::int64_t c = 0; c < group.order(); ++c) {
    if (!solve_charge_as_shifts(matter, 0, group.character_at(c))) {
      throw IncompatibleMatter(
          "[gauss] species charges do not generate the dual group; charge " +
          group.character_at(c).to_string() + " is unreachable");
    }
  }
  const int nv = lattice.num_vertices();
  std::int64_t count = 1;
  for (int i = 0; i < nv; ++i) {
    if (count > kMaxBaseSize / group.order()) {
      throw BaseNotEnumerable("[gauss] bosonic base larger than " +
                              std::to_string(kMaxBaseSize) + " syndromes");
    }
    count *= group.order();
  }
  std::vector<Syndrome> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t code = 0; code < count; ++code) {
    std::vector<Character> charges(nv, group.trivial_character());
    std::int64_t rest = code;
    for (int v = nv - 1; v >= 0; --v) {
      charges[v] = group.character_at(rest % group.order());
      rest /= group.order();
    }
    out.emplace_back(group, std::move(charges), GaussScope::AllVertices, root);
  }
  return out;
}

void Section::add(SectionEntry entry) {
  auto key = entry.syndrome.key();
  if (index_.contains(key)) {
    throw NotASection("[section] '" + label_ + "': duplicate syndrome " +
                      entry.syndrome.to_string());
  }
  index_.emplace(std::move(key), entries_.size());
  entries_.push_back(std::move(entry));
}

const SectionEntry* Section::find(const Syndrome& syndrome) const {
  auto it = index_.find(syndrome.key());
  return it == index_.end() ? nullptr : &entries_[it->second];
}

Section tree_frame_section(const Lattice& lattice, const SpanningTree& tree,
                           const GroupSpec& group) {
  Section out("tree-frame");
  for (Syndrome& syndrome : enumerate_pure_base(group, lattice, tree.root())) {
    std::map<int, Character> charges;
    for (int v = 0; v < lattice.num_vertices(); ++v) {
      if (v == tree.root()) continue;
      charges.emplace(v, syndrome.charge(v));
    }
    WilsonLineProduct links = frame_field(lattice, tree, group, charges);
    SectionEntry entry{syndrome, std::move(links), {}, ""};
    entry.label = entry.links.to_string();
    out.add(std::move(entry));
  }
  return out;
}

Section matter_flip_section(const Lattice& lattice, const GroupSpec& group,
                            const MatterContent& matter, int root) {
  Section out("matter-flip");
  for (Syndrome& syndrome :
       enumerate_bosonic_base(group, lattice, matter, root)) {
    MatterShift x;
    for (int v = 0; v < lattice.num_vertices(); ++v) {
      auto solved = solve_charge_as_shifts(matter, v, syndrome.charge(v));
      if (!solved) {
        throw IncompatibleMatter(
            "[section] charge " + syndrome.charge(v).to_string() +
            " not expressible by the species (checked at enumeration; "
            "this indicates an internal inconsistency)");
      }
      for (const auto& [idx, k] : *solved) {
        if (k != 0) x.emplace(idx, k);
      }
    }
    SectionEntry entry{syndrome, WilsonLineProduct(group), std::move(x), ""};
    entry.label = to_string(entry.matter_x);
    out.add(std::move(entry));
  }
  return out;
}

std::optional<MatterShift> solve_charge_as_shifts(const MatterContent& matter,
                                                  int vertex,
                                                  const Character& target) {
  if (matter.kind() != MatterContent::Kind::Bosonic) {
    throw FamilyMismatch("[gauss] shift solving needs bosonic matter");
  }
  const auto& species = matter.species();
  // Depth-first enumeration of per-species exponents; desk-scale species
  // counts and orders keep this tiny.
  std::vector<std::int64_t> exponents(species.size(), 0);
  std::vector<std::int64_t> bounds(species.size());
  for (std::size_t s = 0; s < species.size(); ++s) {
    bounds[s] = character_order(species[s].charge);
  }
  const GroupSpec group(target.factors());
  while (true) {
    Character value = group.trivial_character();
    for (std::size_t s = 0; s < species.size(); ++s) {
      value = compose(value, power(species[s].charge, exponents[s]));
    }
    if (value == target) {
      MatterShift out;
      for (std::size_t s = 0; s < species.size(); ++s) {
        if (exponents[s] != 0) {
          out.emplace(MatterIndex{vertex, static_cast<int>(s), 0}, exponents[s]);
        }
      }
      return out;
    }
    // Odometer increment.
    std::size_t s = 0;
    for (; s < species.size(); ++s) {
      if (++exponents[s] < bounds[s]) break;
      exponents[s] = 0;
    }
    if (s == species.size()) return std::nullopt;
  }
}

void DressedLineData::add(int link, int species, std::int64_t fwd,
                          std::int64_t rev) {
  Hop& hop = hops[{link, species}];
  hop.fwd += fwd;
  hop.rev += rev;
  if (hop.fwd == 0 && hop.rev == 0) hops.erase({link, species});
}

void DressedLineData::compose(const DressedLineData& other) {
  for (const auto& [key, hop] : other.hops) {
    add(key.first, key.second, hop.fwd, hop.rev);
  }
}

WilsonLineProduct induced_flux(const DressedLineData& k,
                               const MatterContent& matter,
                               const GroupSpec& group) {
  const auto& species = matter.species();
  WilsonLineProduct w(group);
  for (const auto& [key, hop] : k.hops) {
    const auto& [link, s] = key;
    if (s < 0 || s >= static_cast<int>(species.size())) {
      throw IncompatibleError("[gauss] dressed line names missing species " +
                              std::to_string(s));
    }
    w.multiply(link, power(species[static_cast<std::size_t>(s)].charge,
                           hop.fwd - hop.rev));
  }
  return w;
}

std::map<MatterIndex, std::int64_t> vacuum_occupations(
    const DressedLineData& k, const MatterContent& matter,
    const Lattice& lattice) {
  const auto& species = matter.species();
  std::map<MatterIndex, std::int64_t> occ;
  for (const auto& [key, hop] : k.hops) {
    const auto& [l, s] = key;
    if (l < 0 || l >= lattice.num_links()) {
      throw IncompatibleError("[gauss] dressed line names missing link " +
                              std::to_string(l));
    }
    if (s < 0 || s >= static_cast<int>(species.size())) {
      throw IncompatibleError("[gauss] dressed line names missing species " +
                              std::to_string(s));
    }
    if (hop.fwd < 0 || hop.rev < 0) {
      throw IncompatibleError(
          "[gauss] dressed line transport counts must be nonnegative");
    }
    const Link& edge = lattice.link(l);
    const BosonSpecies& sp = species[static_cast<std::size_t>(s)];
    if (sp.oscillator_pair) {
      occ[MatterIndex{edge.head, s, 0}] += hop.fwd;
      occ[MatterIndex{edge.tail, s, 1}] += hop.fwd;
      occ[MatterIndex{edge.tail, s, 0}] += hop.rev;
      occ[MatterIndex{edge.head, s, 1}] += hop.rev;
    } else {
      occ[MatterIndex{edge.tail, s, 0}] += hop.rev - hop.fwd;
      occ[MatterIndex{edge.head, s, 0}] += hop.fwd - hop.rev;
    }
  }
  for (auto it = occ.begin(); it != occ.end();) {
    const BosonSpecies& sp = species[static_cast<std::size_t>(it->first.species)];
    if (!sp.oscillator_pair) {
      const std::int64_t dim = sp.finite_dimension();
      it->second = ((it->second % dim) + dim) % dim;
    }
    if (it->second == 0) {
      it = occ.erase(it);
    } else {
      ++it;
    }
  }
  return occ;
}

std::vector<Syndrome> gauss_map_vacuum(const DressedLineData& k,
                                       const MatterContent& matter,
                                       const Lattice& lattice, int root) {
  if (matter.kind() != MatterContent::Kind::Bosonic) {
    throw FamilyMismatch("[gauss] vacuum transport map needs bosonic matter");
  }
  const auto occ = vacuum_occupations(k, matter, lattice);
  const auto& species = matter.species();
  std::vector<Syndrome> out;
  for (std::size_t s = 0; s < species.size(); ++s) {
    std::vector<Character> charges;
    for (int v = 0; v < lattice.num_vertices(); ++v) {
      std::int64_t net = 0;
      auto it = occ.find(MatterIndex{v, static_cast<int>(s), 0});
      if (it != occ.end()) net += it->second;
      it = occ.find(MatterIndex{v, static_cast<int>(s), 1});
      if (it != occ.end()) net -= it->second;
      charges.push_back(power(species[s].charge, net));
    }
    const GroupSpec group(species[s].charge.factors());
    out.emplace_back(group, std::move(charges), GaussScope::AllVertices, root);
  }
  return out;
}

}  // namespace gqec
