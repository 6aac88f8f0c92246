#include "gqec/qrf.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "gqec/exceptions.hpp"

namespace gqec {

namespace {

// Incident links of v (both orientations) in ascending index order, each
// annotated with the step sign for walking *away* from v.
std::vector<TreeStep> incident_steps(const Lattice& lattice, int v) {
  std::vector<TreeStep> steps;
  for (int l : lattice.out_links(v)) steps.push_back(TreeStep{l, +1});
  for (int l : lattice.in_links(v)) steps.push_back(TreeStep{l, -1});
  std::sort(steps.begin(), steps.end(),
            [](const TreeStep& a, const TreeStep& b) { return a.link < b.link; });
  return steps;
}

int step_target(const Lattice& lattice, int v, const TreeStep& step) {
  const Link& l = lattice.link(step.link);
  return step.sign > 0 ? (l.tail == v ? l.head : l.tail)
                       : (l.head == v ? l.tail : l.head);
}

}  // namespace

SpanningTree SpanningTree::build(const Lattice& lattice, int root,
                                 Strategy strategy) {
  if (root < 0 || root >= lattice.num_vertices()) {
    throw InvalidExplicitTree("[tree] root " + std::to_string(root) +
                              " out of range");
  }
  SpanningTree tree;
  tree.root_ = root;
  tree.num_vertices_ = lattice.num_vertices();
  tree.in_tree_.assign(lattice.num_links(), 0);
  tree.parent_step_.assign(lattice.num_vertices(), TreeStep{-1, 0});
  tree.parent_.assign(lattice.num_vertices(), -1);
  tree.depth_.assign(lattice.num_vertices(), -1);
  tree.depth_[root] = 0;

  if (strategy == Strategy::Bfs) {
    std::queue<int> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (const TreeStep& step : incident_steps(lattice, v)) {
        // Walking v -> u uses `step` as seen from v; the stored parent step
        // (u -> v) is the reverse.
        const int u = step_target(lattice, v, step);
        if (tree.depth_[u] >= 0) continue;
        tree.depth_[u] = tree.depth_[v] + 1;
        tree.parent_[u] = v;
        tree.parent_step_[u] = TreeStep{step.link, -step.sign};
        tree.in_tree_[step.link] = 1;
        frontier.push(u);
      }
    }
  } else {
    // Depth-first with recursive semantics: descend through the lowest
    // unexplored link before trying the next one at the same vertex.
    struct Frame {
      int v;
      std::vector<TreeStep> steps;
      std::size_t next = 0;
    };
    std::vector<Frame> stack;
    stack.push_back({root, incident_steps(lattice, root)});
    while (!stack.empty()) {
      Frame& frame = stack.back();
      if (frame.next >= frame.steps.size()) {
        stack.pop_back();
        continue;
      }
      const TreeStep step = frame.steps[frame.next++];
      const int u = step_target(lattice, frame.v, step);
      if (tree.depth_[u] >= 0) continue;
      tree.depth_[u] = tree.depth_[frame.v] + 1;
      tree.parent_[u] = frame.v;
      tree.parent_step_[u] = TreeStep{step.link, -step.sign};
      tree.in_tree_[step.link] = 1;
      stack.push_back({u, incident_steps(lattice, u)});
    }
  }
  tree.finalize(lattice);
  return tree;
}

SpanningTree SpanningTree::from_links(const Lattice& lattice, int root,
                                      std::vector<int> links) {
  if (root < 0 || root >= lattice.num_vertices()) {
    throw InvalidExplicitTree("[tree] root " + std::to_string(root) +
                              " out of range");
  }
  if (static_cast<int>(links.size()) != lattice.num_vertices() - 1) {
    throw InvalidExplicitTree(
        "[tree] explicit tree needs exactly " +
        std::to_string(lattice.num_vertices() - 1) + " links, got " +
        std::to_string(links.size()));
  }
  std::vector<char> chosen(lattice.num_links(), 0);
  for (int l : links) {
    if (l < 0 || l >= lattice.num_links()) {
      throw InvalidExplicitTree("[tree] link index " + std::to_string(l) +
                                " out of range");
    }
    if (chosen[l]) {
      throw InvalidExplicitTree("[tree] duplicate link index " +
                                std::to_string(l));
    }
    chosen[l] = 1;
  }

  SpanningTree tree;
  tree.root_ = root;
  tree.num_vertices_ = lattice.num_vertices();
  tree.in_tree_ = chosen;
  tree.parent_step_.assign(lattice.num_vertices(), TreeStep{-1, 0});
  tree.parent_.assign(lattice.num_vertices(), -1);
  tree.depth_.assign(lattice.num_vertices(), -1);
  tree.depth_[root] = 0;

  std::queue<int> frontier;
  frontier.push(root);
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (const TreeStep& step : incident_steps(lattice, v)) {
      if (!chosen[step.link]) continue;
      const int u = step_target(lattice, v, step);
      if (tree.depth_[u] >= 0) continue;
      tree.depth_[u] = tree.depth_[v] + 1;
      tree.parent_[u] = v;
      tree.parent_step_[u] = TreeStep{step.link, -step.sign};
      frontier.push(u);
      ++reached;
    }
  }
  if (reached != lattice.num_vertices()) {
    throw InvalidExplicitTree(
        "[tree] explicit links do not span the lattice (cycle or detached "
        "component)");
  }
  tree.finalize(lattice);
  return tree;
}

void SpanningTree::finalize(const Lattice& lattice) {
  tree_links_.clear();
  system_links_.clear();
  for (int l = 0; l < lattice.num_links(); ++l) {
    (in_tree_[l] ? tree_links_ : system_links_).push_back(l);
  }
}

bool SpanningTree::contains(int link) const {
  return link >= 0 && link < static_cast<int>(in_tree_.size()) &&
         in_tree_[link] != 0;
}

std::vector<TreeStep> SpanningTree::path(int from, int to) const {
  if (from < 0 || from >= num_vertices_ || to < 0 || to >= num_vertices_) {
    throw InvalidExplicitTree("[tree] path endpoint out of range");
  }
  // Climb both endpoints to their lowest common ancestor.
  std::vector<TreeStep> up;    // from -> lca, in traversal order
  std::vector<TreeStep> down;  // to -> lca, to be reversed and inverted
  int a = from;
  int b = to;
  while (depth_[a] > depth_[b]) {
    up.push_back(parent_step_[a]);
    a = parent_[a];
  }
  while (depth_[b] > depth_[a]) {
    down.push_back(parent_step_[b]);
    b = parent_[b];
  }
  while (a != b) {
    up.push_back(parent_step_[a]);
    down.push_back(parent_step_[b]);
    a = parent_[a];
    b = parent_[b];
  }
  for (auto it = down.rbegin(); it != down.rend(); ++it) {
    up.push_back(TreeStep{it->link, -it->sign});
  }
  return up;
}

WilsonLineProduct::WilsonLineProduct(GroupSpec group) : group_(std::move(group)) {}

void WilsonLineProduct::multiply(int link, const Character& chi) {
  if (chi.factors() != group_.factors()) {
    throw SpecMismatch("[wilson] character group does not match product group");
  }
  auto it = exponents_.find(link);
  if (it == exponents_.end()) {
    if (!chi.is_trivial()) exponents_.emplace(link, chi);
    return;
  }
  const Character merged = compose(it->second, chi);
  if (merged.is_trivial()) {
    exponents_.erase(it);
  } else {
    it->second = merged;
  }
}

void WilsonLineProduct::multiply(const WilsonLineProduct& other) {
  if (other.group_ != group_) {
    throw SpecMismatch("[wilson] products over different groups");
  }
  for (const auto& [link, chi] : other.exponents_) multiply(link, chi);
}

WilsonLineProduct WilsonLineProduct::adjoint() const {
  WilsonLineProduct out(group_);
  for (const auto& [link, chi] : exponents_) {
    out.exponents_.emplace(link, conjugate(chi));
  }
  return out;
}

WilsonLineProduct WilsonLineProduct::times(const WilsonLineProduct& other) const {
  WilsonLineProduct out = *this;
  out.multiply(other);
  return out;
}

Character WilsonLineProduct::exponent(int link) const {
  auto it = exponents_.find(link);
  return it == exponents_.end() ? group_.trivial_character() : it->second;
}

std::vector<int> WilsonLineProduct::support() const {
  std::vector<int> out;
  out.reserve(exponents_.size());
  for (const auto& [link, chi] : exponents_) out.push_back(link);
  return out;
}

WilsonLineProduct WilsonLineProduct::restricted_to(
    const std::vector<int>& links) const {
  WilsonLineProduct out(group_);
  for (int l : links) {
    auto it = exponents_.find(l);
    if (it != exponents_.end()) out.exponents_.emplace(l, it->second);
  }
  return out;
}

bool WilsonLineProduct::operator==(const WilsonLineProduct& other) const {
  return group_ == other.group_ && exponents_ == other.exponents_;
}

std::string WilsonLineProduct::to_string() const {
  if (exponents_.empty()) return "1";
  std::ostringstream out;
  bool first = true;
  for (const auto& [link, chi] : exponents_) {
    if (!first) out << ' ';
    first = false;
    out << "W[" << link << ':' << chi.to_string() << ']';
  }
  return out.str();
}

WilsonLineProduct transporter(const GroupSpec& group,
                              const std::vector<TreeStep>& steps,
                              const Character& chi) {
  WilsonLineProduct out(group);
  for (const TreeStep& step : steps) {
    out.multiply(step.link, step.sign > 0 ? chi : conjugate(chi));
  }
  return out;
}

WilsonLineProduct frame_field(const Lattice& lattice, const SpanningTree& tree,
                              const GroupSpec& group,
                              const std::map<int, Character>& charges) {
  (void)lattice;
  WilsonLineProduct out(group);
  for (const auto& [v, q] : charges) {
    if (v == tree.root()) {
      if (!q.is_trivial()) {
        throw RootChargeSupplied(
            "[frame] nontrivial charge at the tree root v" + std::to_string(v) +
            " (the root charge is fixed by neutrality)");
      }
      continue;
    }
    if (q.is_trivial()) continue;
    out.multiply(transporter(group, tree.path(v, tree.root()), q));
  }
  return out;
}

WilsonLineProduct system_holonomy(const Lattice& lattice,
                                  const SpanningTree& tree, int link,
                                  const Character& chi) {
  if (tree.contains(link)) {
    throw LinkInTree("[holonomy] link " + std::to_string(link) +
                     " lies on the spanning tree");
  }
  const GroupSpec group(chi.factors());
  const Link& l = lattice.link(link);
  WilsonLineProduct out(group);
  out.multiply(link, chi);
  // Close the loop: carry conjugate(chi) from tail to root and chi from head
  // to root; the divergence cancels at every vertex.
  out.multiply(transporter(group, tree.path(l.tail, tree.root()), conjugate(chi)));
  out.multiply(transporter(group, tree.path(l.head, tree.root()), chi));
  return out;
}

std::vector<WilsonLineProduct> kernel_generators(const Lattice& lattice,
                                                 const SpanningTree& tree,
                                                 const GroupSpec& group) {
  std::vector<WilsonLineProduct> out;
  for (int link : tree.system_links()) {
    for (std::size_t i = 0; i < group.rank(); ++i) {
      out.push_back(
          system_holonomy(lattice, tree, link, group.dual_factor_generator(i)));
    }
  }
  return out;
}

}  // namespace gqec
