#include "gqec/lattice.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

#include "gqec/exceptions.hpp"

namespace gqec {

Lattice::Lattice(int num_vertices, std::vector<Link> links, std::string name)
    : num_vertices_(num_vertices), links_(std::move(links)), name_(std::move(name)) {
  if (num_vertices_ < 2) {
    throw TooSmall("[lattice] need at least 2 vertices, got " +
                   std::to_string(num_vertices_));
  }
  if (links_.empty()) {
    throw TooSmall("[lattice] need at least 1 link");
  }
  out_links_.resize(num_vertices_);
  in_links_.resize(num_vertices_);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.tail < 0 || l.tail >= num_vertices_ || l.head < 0 ||
        l.head >= num_vertices_) {
      throw TooSmall("[lattice] link " + std::to_string(i) +
                     " references vertex outside [0," +
                     std::to_string(num_vertices_) + ")");
    }
    if (l.tail == l.head) {
      throw TooSmall("[lattice] self-loop at vertex " + std::to_string(l.tail) +
                     " is not supported");
    }
    out_links_[l.tail].push_back(static_cast<int>(i));
    in_links_[l.head].push_back(static_cast<int>(i));
  }

  // Connectivity over the undirected support.
  std::vector<char> seen(num_vertices_, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    auto visit = [&](int u) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        frontier.push(u);
      }
    };
    for (int l : out_links_[v]) visit(links_[l].head);
    for (int l : in_links_[v]) visit(links_[l].tail);
  }
  if (reached != num_vertices_) {
    for (int v = 0; v < num_vertices_; ++v) {
      if (!seen[v]) {
        throw Disconnected("[lattice] vertex " + std::to_string(v) +
                           " unreachable from vertex 0");
      }
    }
  }
}

Lattice Lattice::ring(int n) {
  if (n < 2) {
    throw TooSmall("[lattice] ring(" + std::to_string(n) + "): need n >= 2");
  }
  std::vector<Link> links;
  links.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    links.push_back(Link{i, (i + 1) % n});
  }
  return Lattice(n, std::move(links), "ring(" + std::to_string(n) + ")");
}

Lattice Lattice::torus(int lx, int ly) {
  if (lx < 2 || ly < 2) {
    throw TooSmall("[lattice] torus(" + std::to_string(lx) + "," +
                   std::to_string(ly) + "): need lx, ly >= 2");
  }
  std::vector<Link> links;
  links.reserve(static_cast<std::size_t>(2 * lx * ly));
  for (int y = 0; y < ly; ++y) {
    for (int x = 0; x < lx; ++x) {
      const int v = x + lx * y;
      links.push_back(Link{v, (x + 1) % lx + lx * y});        // horizontal
      links.push_back(Link{v, x + lx * ((y + 1) % ly)});      // vertical
    }
  }
  return Lattice(lx * ly, std::move(links),
                 "torus(" + std::to_string(lx) + "," + std::to_string(ly) + ")");
}

const std::vector<int>& Lattice::out_links(int v) const {
  return out_links_.at(v);
}

const std::vector<int>& Lattice::in_links(int v) const { return in_links_.at(v); }

int Lattice::girth() const {
  // Parallel links (same unordered endpoint pair) form 2-cycles.
  std::set<std::pair<int, int>> seen_pairs;
  for (const Link& l : links_) {
    const auto key = std::minmax(l.tail, l.head);
    if (!seen_pairs.insert({key.first, key.second}).second) {
      return 2;
    }
  }
  // No multi-edges left to worry about: BFS from every vertex on the simple
  // undirected graph, tracking parent links so a revisit closes a cycle.
  std::vector<std::vector<int>> adjacency(num_vertices_);
  for (const auto& [a, b] : seen_pairs) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  int best = std::numeric_limits<int>::max();
  for (int start = 0; start < num_vertices_; ++start) {
    std::vector<int> dist(num_vertices_, -1);
    std::vector<int> parent(num_vertices_, -1);
    std::queue<int> frontier;
    dist[start] = 0;
    frontier.push(start);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int u : adjacency[v]) {
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          parent[u] = v;
          frontier.push(u);
        } else if (u != parent[v]) {
          best = std::min(best, dist[v] + dist[u] + 1);
        }
      }
    }
  }
  return best == std::numeric_limits<int>::max() ? 0 : best;
}

bool Lattice::is_bipartite() const {
  std::vector<int> color(num_vertices_, -1);
  std::queue<int> frontier;
  color[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    auto visit = [&](int u) {
      if (color[u] < 0) {
        color[u] = 1 - color[v];
        frontier.push(u);
        return true;
      }
      return color[u] != color[v];
    };
    for (int l : out_links_[v]) {
      if (!visit(links_[l].head)) return false;
    }
    for (int l : in_links_[v]) {
      if (!visit(links_[l].tail)) return false;
    }
  }
  return true;
}

std::vector<int> Lattice::stagger_coloring(int root) const {
  if (root < 0 || root >= num_vertices_) {
    throw TooSmall("[lattice] stagger root " + std::to_string(root) +
                   " out of range");
  }
  if (num_vertices_ % 2 != 0) {
    throw OddVertexCount("[lattice] staggered occupancy needs an even vertex "
                         "count, got " +
                         std::to_string(num_vertices_));
  }
  if (!is_bipartite()) {
    throw NotBipartite("[lattice] staggered occupancy needs a bipartite "
                       "lattice; " +
                       (name_.empty() ? std::string("this lattice") : name_) +
                       " contains an odd cycle");
  }
  std::vector<int> color(num_vertices_, -1);
  std::queue<int> frontier;
  color[root] = 0;
  frontier.push(root);
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    auto visit = [&](int u) {
      if (color[u] < 0) {
        color[u] = 1 - color[v];
        frontier.push(u);
      }
    };
    for (int l : out_links_[v]) visit(links_[l].head);
    for (int l : in_links_[v]) visit(links_[l].tail);
  }
  return color;
}

}  // namespace gqec
