#pragma once

#include <map>
#include <string>
#include <vector>

#include "gqec/abelian_group.hpp"
#include "gqec/lattice.hpp"

// Spanning-tree reference frames over a gauge lattice. A rooted spanning
// tree splits the links into frame links (on the tree) and system links
// (off the tree); tree paths define transporters between vertices, frame
// fields realize prescribed charge profiles, and system holonomies generate
// the closed (divergence-free) flux configurations.
namespace gqec {

// One step of a tree walk: traverse `link` along its orientation
// (sign = +1, tail -> head) or against it (sign = -1).
struct TreeStep {
  int link;
  int sign;
  bool operator==(const TreeStep& other) const = default;
};

class SpanningTree {
 public:
  enum class Strategy { Bfs, Dfs };

  // Deterministic construction: neighbors are explored in ascending link
  // order, so the same lattice and root always yield the same tree.
  static SpanningTree build(const Lattice& lattice, int root,
                            Strategy strategy = Strategy::Bfs);

  // Builds from an explicit set of N_V - 1 link indices; throws
  // InvalidExplicitTree if they do not form a spanning tree.
  static SpanningTree from_links(const Lattice& lattice, int root,
                                 std::vector<int> links);

  int root() const { return root_; }
  bool contains(int link) const;
  const std::vector<int>& tree_links() const { return tree_links_; }
  const std::vector<int>& system_links() const { return system_links_; }

  // Walk from `from` to `to` through the tree (via the lowest common
  // ancestor); returns the traversed steps in order.
  std::vector<TreeStep> path(int from, int to) const;

  // Parent vertex of v (-1 at the root) and the first step of the walk from
  // v toward the root (undefined at the root).
  int parent(int v) const { return parent_.at(v); }
  const TreeStep& parent_step(int v) const { return parent_step_.at(v); }

 private:
  SpanningTree() = default;

  int root_ = 0;
  int num_vertices_ = 0;
  std::vector<int> tree_links_;
  std::vector<int> system_links_;
  std::vector<char> in_tree_;
  // Per vertex: first step of the walk toward the root (undefined at root).
  std::vector<TreeStep> parent_step_;
  std::vector<int> parent_;
  std::vector<int> depth_;

  void finalize(const Lattice& lattice);
};

// A finite product of per-link flux insertions, prod_l W_l^{chi_l}, stored
// as link -> character with trivial characters omitted. Multiplication is
// commutative (all factors act on distinct registers or commute).
class WilsonLineProduct {
 public:
  explicit WilsonLineProduct(GroupSpec group);

  const GroupSpec& group() const { return group_; }

  // Multiplies W_link^{chi} into the product.
  void multiply(int link, const Character& chi);
  void multiply(const WilsonLineProduct& other);

  WilsonLineProduct adjoint() const;
  WilsonLineProduct times(const WilsonLineProduct& other) const;

  // Exponent on a given link (trivial character if absent).
  Character exponent(int link) const;
  bool is_identity() const { return exponents_.empty(); }
  const std::map<int, Character>& exponents() const { return exponents_; }
  std::vector<int> support() const;
  int weight() const { return static_cast<int>(exponents_.size()); }

  // Sub-product over the given links only.
  WilsonLineProduct restricted_to(const std::vector<int>& links) const;

  bool operator==(const WilsonLineProduct& other) const;
  std::string to_string() const;  // e.g. "W[0:1] W[2:1]", "1" if empty

 private:
  GroupSpec group_;
  std::map<int, Character> exponents_;
};

// Product of link insertions along a tree walk, carrying `chi` forward
// (chi on +1 steps, conjugate(chi) on -1 steps).
WilsonLineProduct transporter(const GroupSpec& group,
                              const std::vector<TreeStep>& steps,
                              const Character& chi);

// Frame field: the tree-supported flux configuration whose divergence
// realizes the prescribed charges at the non-root vertices (the root charge
// is fixed by global neutrality). Throws RootChargeSupplied if a nontrivial
// charge is given at the tree root.
WilsonLineProduct frame_field(const Lattice& lattice, const SpanningTree& tree,
                              const GroupSpec& group,
                              const std::map<int, Character>& charges);

// System holonomy of an off-tree link: the link insertion closed up through
// the tree, a divergence-free flux loop. Throws LinkInTree for tree links.
WilsonLineProduct system_holonomy(const Lattice& lattice,
                                  const SpanningTree& tree, int link,
                                  const Character& chi);

// Generators of the divergence-free flux configurations: one holonomy per
// (system link, dual factor generator).
std::vector<WilsonLineProduct> kernel_generators(const Lattice& lattice,
                                                 const SpanningTree& tree,
                                                 const GroupSpec& group);

}  // namespace gqec
