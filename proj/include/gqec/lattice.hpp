#pragma once

#include <string>
#include <vector>

// Oriented multigraphs serving as gauge lattices: vertices carry matter,
// links carry group-valued flux. Parallel links are allowed (and arise on
// small tori); self-loops are not. All lattices are validated to be
// connected at construction.
namespace gqec {

struct Link {
  int tail;
  int head;
  bool operator==(const Link& other) const = default;
};

class Lattice {
 public:
  // Generic constructor from an explicit oriented link list.
  Lattice(int num_vertices, std::vector<Link> links, std::string name = "");

  // Periodic 1d chain: vertices 0..n-1, link i runs i -> (i+1) mod n.
  static Lattice ring(int n);

  // Periodic square lattice, lx x ly plaquettes. Vertex (x, y) has index
  // x + lx*y; link 2v is the horizontal link (x,y)->(x+1,y), link 2v+1 the
  // vertical link (x,y)->(x,y+1) (coordinates mod lx / mod ly).
  static Lattice torus(int lx, int ly);

  int num_vertices() const { return num_vertices_; }
  int num_links() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int index) const { return links_.at(index); }
  const std::string& name() const { return name_; }

  // First Betti number of the graph: independent cycles.
  int loop_rank() const { return num_links() - num_vertices() + 1; }

  // Link indices with tail == v / head == v, ascending.
  const std::vector<int>& out_links(int v) const;
  const std::vector<int>& in_links(int v) const;

  // Length of the shortest cycle; a pair of parallel links counts as a
  // 2-cycle. Returns 0 if the graph is a tree (no cycle).
  int girth() const;

  bool is_bipartite() const;

  // Staggered occupancy coloring: 0 on the root's parity class, 1 on the
  // other, assigned by BFS parity from `root`. Requires a bipartite lattice
  // with an even number of vertices (throws NotBipartite / OddVertexCount).
  std::vector<int> stagger_coloring(int root) const;

 private:
  int num_vertices_;
  std::vector<Link> links_;
  std::string name_;
  std::vector<std::vector<int>> out_links_;
  std::vector<std::vector<int>> in_links_;
};

}  // namespace gqec
