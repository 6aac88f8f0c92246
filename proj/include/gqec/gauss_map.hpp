#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gqec/abelian_group.hpp"
#include "gqec/lattice.hpp"
#include "gqec/matter.hpp"
#include "gqec/qrf.hpp"

// Divergence (Gauss) maps from flux/shift data to vertex charge profiles,
// and sections of the induced syndrome bundles. A section picks one error
// datum per reachable syndrome; maximal correctable error sets are exactly
// images of such sections.
namespace gqec {

// Whether the root charge participates in comparisons. Pure-gauge syndromes
// are globally neutral, so the root entry is redundant and excluded; with
// matter every vertex charge is independent information.
enum class GaussScope { ExcludeRoot, AllVertices };

class Syndrome {
 public:
  Syndrome(GroupSpec group, std::vector<Character> charges, GaussScope scope,
           int root);

  const GroupSpec& group() const { return group_; }
  const Character& charge(int v) const { return charges_.at(v); }
  int num_vertices() const { return static_cast<int>(charges_.size()); }
  GaussScope scope() const { return scope_; }
  int root() const { return root_; }

  // Trivial within the comparison scope.
  bool is_trivial() const;

  // Scope-respecting equality; throws SpecMismatch when comparing syndromes
  // with different groups, scopes, roots, or vertex counts.
  bool operator==(const Syndrome& other) const;

  // Dense comparison key: per-vertex character indices within scope.
  std::vector<std::int64_t> key() const;

  std::string to_string() const;  // e.g. "(0,1,1)"; root entry marked for
                                  // ExcludeRoot scope as e.g. "([0],1,1)"

 private:
  GroupSpec group_;
  std::vector<Character> charges_;
  GaussScope scope_;
  int root_;
};

// Divergence of a flux configuration: at each vertex the product of
// exponents on outgoing links times conjugated exponents on incoming links.
Syndrome gauss_map(const WilsonLineProduct& w, const Lattice& lattice,
                   GaussScope scope, int root = 0);

// Divergence extended by bosonic occupation shifts: each finite-order
// species contributes charge^shift at its vertex, each oscillator pair
// charge^(particle shift - antiparticle shift). Always AllVertices scope.
Syndrome gauss_map_bosonic(const WilsonLineProduct& w, const MatterShift& x,
                           const MatterContent& matter, const Lattice& lattice,
                           int root = 0);

// Reachable syndrome sets (bundle bases).
// Pure gauge: globally neutral charge profiles, one free character per
// non-root vertex (ExcludeRoot scope, root entry filled by neutrality).
std::vector<Syndrome> enumerate_pure_base(const GroupSpec& group,
                                          const Lattice& lattice, int root = 0);
// Bosonic matter: every charge profile is reachable (AllVertices scope).
// Throws IncompatibleMatter if the species charges do not generate the dual
// group.
std::vector<Syndrome> enumerate_bosonic_base(const GroupSpec& group,
                                             const Lattice& lattice,
                                             const MatterContent& matter,
                                             int root = 0);

struct SectionEntry {
  Syndrome syndrome;
  WilsonLineProduct links;
  MatterShift matter_x;
  std::string label;
};

// A syndrome -> error-datum table with unique keys. `truncated_base` marks
// tables whose base was cut off (oscillator occupation bases).
class Section {
 public:
  explicit Section(std::string label) : label_(std::move(label)) {}

  // Throws NotASection if the syndrome is already present.
  void add(SectionEntry entry);

  const SectionEntry* find(const Syndrome& syndrome) const;
  const std::vector<SectionEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const std::string& label() const { return label_; }

  bool truncated_base() const { return truncated_base_; }
  void mark_truncated() { truncated_base_ = true; }

 private:
  std::vector<SectionEntry> entries_;
  std::map<std::vector<std::int64_t>, std::size_t> index_;
  std::string label_;
  bool truncated_base_ = false;
};

// Canonical pure-gauge section: the frame field of each base syndrome
// (tree-supported flux realizing those charges).
Section tree_frame_section(const Lattice& lattice, const SpanningTree& tree,
                           const GroupSpec& group);

// Canonical bosonic-matter section: pure occupation shifts realizing each
// charge profile, no flux. Throws IncompatibleMatter if the species cannot
// express some charge.
Section matter_flip_section(const Lattice& lattice, const GroupSpec& group,
                            const MatterContent& matter, int root = 0);

// Solves prod_s charge_s^(x_s) = target over per-species exponents (finite
// species: mode-0 shift in [0, D); oscillator pairs: mode-0 shift in
// [0, ord(charge))). Returns std::nullopt when the target is unreachable.
std::optional<MatterShift> solve_charge_as_shifts(const MatterContent& matter,
                                                  int vertex,
                                                  const Character& target);

// Integer transport data of a gauge-invariant dressed line: per (link,
// species), quanta carried along the link orientation (fwd: tail to head)
// and against it (rev). Counts are nonnegative; composing two lines adds
// their counts.
struct DressedLineData {
  struct Hop {
    std::int64_t fwd = 0;
    std::int64_t rev = 0;
  };
  std::map<std::pair<int, int>, Hop> hops;

  // Accumulates transport on (link, species); scrubs all-zero entries.
  void add(int link, int species, std::int64_t fwd, std::int64_t rev);
  void compose(const DressedLineData& other);
  bool is_identity() const { return hops.empty(); }
};

// The link flux a dressed line drags along: on each link, the product over
// species of charge^(fwd - rev).
WilsonLineProduct induced_flux(const DressedLineData& k,
                               const MatterContent& matter,
                               const GroupSpec& group);

// The matter occupations the dressed line creates out of the empty vacuum:
// finite species accumulate (rev - fwd) on out-links and (fwd - rev) on
// in-links, reduced mod the species dimension; oscillator pairs collect
// particle quanta from incoming-fwd / outgoing-rev transport and
// antiparticle quanta from the mirrored counts. Only nonzero entries are
// returned. Throws IncompatibleError on negative counts or unknown targets.
std::map<MatterIndex, std::int64_t> vacuum_occupations(
    const DressedLineData& k, const MatterContent& matter,
    const Lattice& lattice);

// Per-species detected charge profile of a dressed line: species i reads
// charge_i^(occupation) at each vertex (oscillator pairs: the particle
// minus antiparticle count). Scope AllVertices.
std::vector<Syndrome> gauss_map_vacuum(const DressedLineData& k,
                                       const MatterContent& matter,
                                       const Lattice& lattice, int root = 0);

}  // namespace gqec
