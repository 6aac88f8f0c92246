#include "gqec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include "gqec/exceptions.hpp"

namespace gqec {

namespace {

constexpr double kTol = 1e-10;

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  return ((a % m) + m) % m;
}

void require_within_cap(const CodeInstance& code) {
  if (!code.has_dense() || code.layout()->total_dim() > kOracleDimensionCap) {
    throw DimensionCap("[oracle] instance exceeds the dense reference cap");
  }
}

// Total gauge charge of one basis state at one vertex, recomputed from the
// digits: outgoing flux times conjugated incoming flux times the matter
// contributions (staggered offset for fermions).
Character vertex_charge(const CodeInstance& code, const RegisterLayout& layout,
                        std::int64_t index, int v) {
  const GroupSpec& group = code.group();
  const Lattice& lat = code.lattice();
  Character q = group.trivial_character();
  for (int l : lat.out_links(v)) {
    q = compose(q,
                group.character_at(layout.digit(index, layout.link_register(l))));
  }
  for (int l : lat.in_links(v)) {
    q = compose(q, conjugate(group.character_at(
                       layout.digit(index, layout.link_register(l)))));
  }
  switch (code.matter().kind()) {
    case MatterContent::Kind::None:
      break;
    case MatterContent::Kind::Bosonic: {
      const auto& species = code.matter().species();
      for (std::size_t s = 0; s < species.size(); ++s) {
        const MatterIndex part{v, static_cast<int>(s), 0};
        std::int64_t n = layout.digit(index, layout.matter_register(part));
        if (species[s].oscillator_pair) {
          const MatterIndex anti{v, static_cast<int>(s), 1};
          n -= layout.digit(index, layout.matter_register(anti));
        }
        q = compose(q, power(species[s].charge, n));
      }
      break;
    }
    case MatterContent::Kind::Fermionic: {
      const MatterIndex site{v, 0, 0};
      const std::int64_t n = layout.digit(index, layout.matter_register(site));
      q = compose(q, power(code.matter().fermion_charge(),
                           n - code.stagger()[static_cast<std::size_t>(v)]));
      break;
    }
  }
  return q;
}

// Image of one basis state under the composite error datum: electric
// phases read the pre-shift flux, flux insertions compose characters,
// occupation shifts walk the matter registers in ascending order (fermion
// toggles pick up their parity strings as they go), diagonal phases read
// the shifted occupations. Returns nothing when a truncated oscillator
// clips the shift.
struct BasisImage {
  std::int64_t index = 0;
  std::complex<double> amp{1.0, 0.0};
};

std::optional<BasisImage> apply_error_raw(const CodeInstance& code,
                                          const ErrorOp& e,
                                          std::int64_t index) {
  const RegisterLayout& layout = *code.layout();
  const GroupSpec& group = code.group();
  if (!(e.links.group() == group)) {
    throw SpecMismatch("[oracle] error over a foreign group");
  }
  RationalPhase phase;
  double sign = 1.0;
  std::int64_t cur = index;

  for (const auto& [l, g] : e.link_z) {
    const int r = layout.link_register(l);
    phase = phase + pair_phase(group.character_at(layout.digit(cur, r)), g);
  }
  for (const auto& [l, chi] : e.links.exponents()) {
    const int r = layout.link_register(l);
    cur = layout.with_digit(
        cur, r,
        group.index_of(compose(chi, group.character_at(layout.digit(cur, r)))));
  }
  const bool fermionic =
      code.matter().kind() == MatterContent::Kind::Fermionic;
  for (const auto& [idx, k] : e.matter_x) {
    const int r = layout.matter_register(idx);
    const RegisterInfo& info = layout.reg(r);
    if (fermionic) {
      if (positive_mod(k, 2) == 0) continue;
      for (int pr : layout.fermion_registers()) {
        if (layout.reg(pr).matter.vertex < idx.vertex &&
            layout.digit(cur, pr) == 1) {
          sign = -sign;
        }
      }
      cur = layout.with_digit(cur, r, 1 - layout.digit(cur, r));
    } else if (info.type == RegisterInfo::Type::BosonFinite) {
      cur = layout.with_digit(cur, r,
                              positive_mod(layout.digit(cur, r) + k, info.dim));
    } else {
      if (k < 0) {
        throw IncompatibleError(
            "[oracle] oscillator shifts are non-negative; target the "
            "antiparticle mode instead");
      }
      const std::int64_t n = layout.digit(cur, r) + k;
      if (n >= info.dim) return std::nullopt;
      cur = layout.with_digit(cur, r, n);
    }
  }
  for (const auto& [idx, ph] : e.matter_z) {
    const int r = layout.matter_register(idx);
    phase = phase + ph.times(layout.digit(cur, r));
  }
  return BasisImage{cur, sign * phase.to_complex()};
}

// Spanning tree grown by ascending link index, kept local to this module.
struct OracleTree {
  std::vector<char> in_tree;        // per link
  std::vector<int> parent_vertex;   // per vertex, -1 at the root
  std::vector<int> parent_link;     // per vertex, -1 at the root
  std::vector<char> parent_points_up;  // link oriented child -> parent
  std::vector<int> system_links;
};

OracleTree grow_tree(const Lattice& lat) {
  OracleTree t;
  const int nv = lat.num_vertices();
  const int nl = lat.num_links();
  t.in_tree.assign(static_cast<std::size_t>(nl), 0);
  t.parent_vertex.assign(static_cast<std::size_t>(nv), -1);
  t.parent_link.assign(static_cast<std::size_t>(nv), -1);
  t.parent_points_up.assign(static_cast<std::size_t>(nv), 0);
  std::vector<char> visited(static_cast<std::size_t>(nv), 0);
  visited[0] = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int l = 0; l < nl; ++l) {
      if (t.in_tree[static_cast<std::size_t>(l)]) continue;
      const Link& e = lat.link(l);
      const bool vt = visited[static_cast<std::size_t>(e.tail)];
      const bool vh = visited[static_cast<std::size_t>(e.head)];
      if (vt == vh) continue;
      const int child = vt ? e.head : e.tail;
      const int parent = vt ? e.tail : e.head;
      visited[static_cast<std::size_t>(child)] = 1;
      t.in_tree[static_cast<std::size_t>(l)] = 1;
      t.parent_vertex[static_cast<std::size_t>(child)] = parent;
      t.parent_link[static_cast<std::size_t>(child)] = l;
      // The link points "up" when it runs child -> parent.
      t.parent_points_up[static_cast<std::size_t>(child)] = vt ? 0 : 1;
      grew = true;
    }
  }
  for (int l = 0; l < nl; ++l) {
    if (!t.in_tree[static_cast<std::size_t>(l)]) t.system_links.push_back(l);
  }
  return t;
}

// Character transported along the tree from the root to v: the product of
// tree-link characters signed by their orientation along the walk.
Character root_potential(const CodeInstance& code, const RegisterLayout& layout,
                         const OracleTree& tree, std::int64_t index, int v) {
  const GroupSpec& group = code.group();
  Character phi = group.trivial_character();
  int cursor = v;
  while (tree.parent_link[static_cast<std::size_t>(cursor)] >= 0) {
    const int l = tree.parent_link[static_cast<std::size_t>(cursor)];
    const Character chi =
        group.character_at(layout.digit(index, layout.link_register(l)));
    // Walking root -> v traverses this link downward (parent -> child).
    phi = compose(phi, tree.parent_points_up[static_cast<std::size_t>(cursor)]
                           ? conjugate(chi)
                           : chi);
    cursor = tree.parent_vertex[static_cast<std::size_t>(cursor)];
  }
  return phi;
}

// Interned (matter digits, cycle holonomies) labels of the code basis.
struct CodeLabels {
  std::vector<int> matter;  // per code state
  std::vector<int> cycles;  // per code state
};

CodeLabels label_code_basis(const CodeInstance& code,
                            const std::vector<std::int64_t>& basis) {
  const RegisterLayout& layout = *code.layout();
  const GroupSpec& group = code.group();
  const OracleTree tree = grow_tree(code.lattice());
  CodeLabels labels;
  std::map<std::vector<std::int64_t>, int> matter_ids;
  std::map<std::vector<std::int64_t>, int> cycle_ids;
  for (const std::int64_t i : basis) {
    std::vector<std::int64_t> m;
    for (int r = 0; r < layout.num_registers(); ++r) {
      if (layout.reg(r).type != RegisterInfo::Type::Link) {
        m.push_back(layout.digit(i, r));
      }
    }
    std::vector<std::int64_t> h;
    for (const int l : tree.system_links) {
      const Link& e = code.lattice().link(l);
      const Character hol = compose(
          group.character_at(layout.digit(i, layout.link_register(l))),
          compose(root_potential(code, layout, tree, i, e.tail),
                  conjugate(root_potential(code, layout, tree, i, e.head))));
      h.push_back(group.index_of(hol));
    }
    labels.matter.push_back(
        matter_ids.emplace(std::move(m), static_cast<int>(matter_ids.size()))
            .first->second);
    labels.cycles.push_back(
        cycle_ids.emplace(std::move(h), static_cast<int>(cycle_ids.size()))
            .first->second);
  }
  return labels;
}

std::vector<std::int64_t> oracle_code_basis(
    const std::vector<std::complex<double>>& diag) {
  std::vector<std::int64_t> basis;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (diag[i].real() > 0.5) basis.push_back(static_cast<std::int64_t>(i));
  }
  return basis;
}

std::string join_exponents(const Character& chi) {
  std::string out;
  for (std::size_t i = 0; i < chi.exponents().size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(chi.exponents()[i]);
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> dense_projector(const CodeInstance& code) {
  require_within_cap(code);
  const RegisterLayout& layout = *code.layout();
  const GroupSpec& group = code.group();
  const std::int64_t dim = layout.total_dim();
  const int nv = code.lattice().num_vertices();
  const std::int64_t gorder = group.order();

  // Per-state vertex charges, then the literal sum over every gauge
  // transformation (one group element per vertex).
  std::vector<std::int64_t> charge(
      static_cast<std::size_t>(dim) * static_cast<std::size_t>(nv));
  for (std::int64_t i = 0; i < dim; ++i) {
    for (int v = 0; v < nv; ++v) {
      charge[static_cast<std::size_t>(i) * nv + v] =
          group.index_of(vertex_charge(code, layout, i, v));
    }
  }
  std::vector<std::complex<double>> pair_table(
      static_cast<std::size_t>(gorder) * static_cast<std::size_t>(gorder));
  const auto elements = group.elements();
  for (std::int64_t c = 0; c < gorder; ++c) {
    for (std::int64_t g = 0; g < gorder; ++g) {
      pair_table[static_cast<std::size_t>(c) * gorder + g] =
          pair_phase(group.character_at(c), elements[static_cast<std::size_t>(g)])
              .to_complex();
    }
  }

  std::vector<std::complex<double>> diag(static_cast<std::size_t>(dim),
                                         {0.0, 0.0});
  std::vector<std::int64_t> assign(static_cast<std::size_t>(nv), 0);
  double count = 0.0;
  while (true) {
    for (std::int64_t i = 0; i < dim; ++i) {
      std::complex<double> term{1.0, 0.0};
      for (int v = 0; v < nv; ++v) {
        term *= pair_table[static_cast<std::size_t>(
                               charge[static_cast<std::size_t>(i) * nv + v]) *
                               gorder +
                           assign[static_cast<std::size_t>(v)]];
      }
      diag[static_cast<std::size_t>(i)] += term;
    }
    count += 1.0;
    int v = 0;
    for (; v < nv; ++v) {
      if (++assign[static_cast<std::size_t>(v)] < gorder) break;
      assign[static_cast<std::size_t>(v)] = 0;
    }
    if (v == nv) break;
  }
  for (auto& p : diag) p /= count;

  // Vacuum families additionally pin every occupation register: average
  // the register's own phase group (finite or truncated alike), and for
  // fermions the staggered parity pair.
  const CodeFamily family = code.family();
  if (family == CodeFamily::BosonicVacuum ||
      family == CodeFamily::FermionicVacuum) {
    for (int r = 0; r < layout.num_registers(); ++r) {
      const RegisterInfo& info = layout.reg(r);
      if (info.type == RegisterInfo::Type::Link) continue;
      for (std::int64_t i = 0; i < dim; ++i) {
        const std::int64_t n = layout.digit(i, r);
        std::complex<double> pin{0.0, 0.0};
        if (info.type == RegisterInfo::Type::Fermion) {
          const std::int64_t c =
              code.stagger()[static_cast<std::size_t>(info.matter.vertex)];
          pin = 0.5 * (1.0 + RationalPhase(n - c, 2).to_complex());
        } else {
          for (std::int64_t k = 0; k < info.dim; ++k) {
            pin += RationalPhase(k * n, info.dim).to_complex();
          }
          pin /= static_cast<double>(info.dim);
        }
        diag[static_cast<std::size_t>(i)] *= pin;
      }
    }
  }
  return diag;
}

std::int64_t projector_rank(const std::vector<std::complex<double>>& diag) {
  std::int64_t rank = 0;
  for (const auto& p : diag) {
    if (p.real() > 0.5) ++rank;
  }
  return rank;
}

double projector_idempotence_defect(
    const std::vector<std::complex<double>>& diag) {
  double worst = 0.0;
  for (const auto& p : diag) {
    worst = std::max(worst, std::abs(p * p - p));
  }
  return worst;
}

std::string OracleVerdict::to_string() const {
  std::ostringstream out;
  switch (outcome) {
    case OracleOutcome::Zero:
      out << "zero on the code space";
      break;
    case OracleOutcome::Scalar:
      out << "scalar " << scalar.real();
      if (std::abs(scalar.imag()) > 1e-12) out << (scalar.imag() < 0 ? "-" : "+")
                                               << std::abs(scalar.imag()) << "i";
      break;
    case OracleOutcome::BlockScalar:
      out << "identity on matter labels times a holonomy block";
      break;
    case OracleOutcome::Violation:
      out << "violation";
      break;
  }
  if (!detail.empty()) out << " (" << detail << ")";
  return out.str();
}

OracleVerdict kl_oracle(const ErrorOp& ea, const ErrorOp& eb,
                        const CodeInstance& code) {
  require_within_cap(code);
  const auto diag = dense_projector(code);
  const auto basis = oracle_code_basis(diag);
  const std::size_t r = basis.size();

  // Columns of Ea and Eb on the code basis; the sandwich never needs an
  // explicit adjoint because <Ea ci | Eb cj> pairs single basis images.
  std::vector<std::optional<BasisImage>> ia(r), ib(r);
  for (std::size_t j = 0; j < r; ++j) {
    ia[j] = apply_error_raw(code, ea, basis[j]);
    ib[j] = apply_error_raw(code, eb, basis[j]);
  }
  std::vector<std::complex<double>> m(r * r, {0.0, 0.0});
  double maxabs = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      if (ia[i].has_value() && ib[j].has_value() &&
          ia[i]->index == ib[j]->index) {
        m[i * r + j] = std::conj(ia[i]->amp) * ib[j]->amp;
        maxabs = std::max(maxabs, std::abs(m[i * r + j]));
      }
    }
  }

  OracleVerdict verdict;
  if (maxabs <= kTol) {
    verdict.outcome = OracleOutcome::Zero;
    verdict.deviation = maxabs;
    return verdict;
  }

  std::complex<double> trace{0.0, 0.0};
  for (std::size_t i = 0; i < r; ++i) trace += m[i * r + i];
  const std::complex<double> c = trace / static_cast<double>(r);
  double scalar_dev = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const std::complex<double> want = i == j ? c : std::complex<double>{};
      scalar_dev = std::max(scalar_dev, std::abs(m[i * r + j] - want));
    }
  }
  if (scalar_dev <= kTol) {
    verdict.outcome = OracleOutcome::Scalar;
    verdict.scalar = c;
    verdict.deviation = scalar_dev;
    return verdict;
  }

  // Subsystem form: zero across different matter labels, one shared block
  // on the cycle-holonomy labels inside them.
  const CodeLabels labels = label_code_basis(code, basis);
  std::map<std::pair<int, int>, std::complex<double>> block;
  double block_dev = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      if (labels.matter[i] != labels.matter[j]) {
        block_dev = std::max(block_dev, std::abs(m[i * r + j]));
        continue;
      }
      const auto key = std::make_pair(labels.cycles[i], labels.cycles[j]);
      const auto [it, fresh] = block.emplace(key, m[i * r + j]);
      if (!fresh) {
        block_dev = std::max(block_dev, std::abs(m[i * r + j] - it->second));
      }
    }
  }
  if (block_dev <= kTol) {
    verdict.outcome = OracleOutcome::BlockScalar;
    verdict.deviation = block_dev;
    return verdict;
  }

  verdict.outcome = OracleOutcome::Violation;
  verdict.deviation = std::min(scalar_dev, block_dev);
  verdict.detail = "no scalar or subsystem form matches the product";
  return verdict;
}

std::string DistanceScan::to_string() const {
  if (found) return std::to_string(weight);
  return ">" + std::to_string(searched_up_to);
}

DistanceScan distance_oracle(const CodeInstance& code, int wmax) {
  require_within_cap(code);
  const RegisterLayout& layout = *code.layout();
  const GroupSpec& group = code.group();
  const auto diag = dense_projector(code);
  const auto basis = oracle_code_basis(diag);
  std::vector<char> in_code(static_cast<std::size_t>(layout.total_dim()), 0);
  for (const std::int64_t i : basis) in_code[static_cast<std::size_t>(i)] = 1;

  const int nr = layout.num_registers();
  if (nr > 20) {
    throw BaseNotEnumerable("[oracle] too many registers for the weight scan");
  }

  // One generalized-X alphabet per register: nontrivial flux characters on
  // links, cyclic shifts on occupation registers, the toggle on fermions.
  std::vector<std::vector<std::int64_t>> alphabet(
      static_cast<std::size_t>(nr));
  for (int r = 0; r < nr; ++r) {
    const RegisterInfo& info = layout.reg(r);
    const std::int64_t top =
        info.type == RegisterInfo::Type::Link ? group.order() : info.dim;
    for (std::int64_t k = 1; k < top; ++k) {
      alphabet[static_cast<std::size_t>(r)].push_back(k);
    }
    if (info.type == RegisterInfo::Type::Fermion) {
      alphabet[static_cast<std::size_t>(r)] = {1};
    }
  }

  // Supports in increasing weight, then ascending register order.
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 1; mask < (1u << nr); ++mask) {
    if (static_cast<int>(__builtin_popcount(mask)) <= wmax) masks.push_back(mask);
  }
  std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    const int pa = __builtin_popcount(a);
    const int pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });

  DistanceScan scan;
  scan.searched_up_to = wmax;
  for (const std::uint32_t mask : masks) {
    std::vector<int> support;
    for (int r = 0; r < nr; ++r) {
      if (mask & (1u << r)) support.push_back(r);
    }
    std::vector<std::size_t> pick(support.size(), 0);
    while (true) {
      // Act on every code state; the operator is a signed permutation.
      bool preserves = true;
      bool moves = false;
      std::complex<double> common{0.0, 0.0};
      bool phase_varies = false;
      for (const std::int64_t i : basis) {
        std::int64_t cur = i;
        double sign = 1.0;
        for (std::size_t s = 0; s < support.size(); ++s) {
          const int r = support[s];
          const RegisterInfo& info = layout.reg(r);
          const std::int64_t k =
              alphabet[static_cast<std::size_t>(r)][pick[s]];
          if (info.type == RegisterInfo::Type::Link) {
            cur = layout.with_digit(
                cur, r,
                group.index_of(compose(group.character_at(k),
                                       group.character_at(layout.digit(cur, r)))));
          } else if (info.type == RegisterInfo::Type::Fermion) {
            for (int pr : layout.fermion_registers()) {
              if (layout.reg(pr).matter.vertex < info.matter.vertex &&
                  layout.digit(cur, pr) == 1) {
                sign = -sign;
              }
            }
            cur = layout.with_digit(cur, r, 1 - layout.digit(cur, r));
          } else {
            cur = layout.with_digit(
                cur, r, positive_mod(layout.digit(cur, r) + k, info.dim));
          }
        }
        if (!in_code[static_cast<std::size_t>(cur)]) {
          preserves = false;
          break;
        }
        if (cur != i) moves = true;
        if (std::abs(common) < 0.5) {
          common = sign;
        } else if (std::abs(common - sign) > kTol) {
          phase_varies = true;
        }
      }
      if (preserves && (moves || phase_varies)) {
        scan.found = true;
        scan.weight = static_cast<int>(support.size());
        std::string witness;
        for (std::size_t s = 0; s < support.size(); ++s) {
          const RegisterInfo& info = layout.reg(support[s]);
          const std::int64_t k =
              alphabet[static_cast<std::size_t>(support[s])][pick[s]];
          if (!witness.empty()) witness += " ";
          if (info.type == RegisterInfo::Type::Link) {
            witness += "W[" + std::to_string(info.link) + ":" +
                       join_exponents(group.character_at(k)) + "]";
          } else {
            witness += "X[" + std::to_string(info.matter.vertex) + "," +
                       std::to_string(info.matter.species) +
                       (info.matter.mode == 1 ? ",-" : "") + ":" +
                       std::to_string(k) + "]";
          }
        }
        scan.witness = std::move(witness);
        return scan;
      }
      std::size_t s = 0;
      for (; s < support.size(); ++s) {
        if (++pick[s] < alphabet[static_cast<std::size_t>(support[s])].size()) {
          break;
        }
        pick[s] = 0;
      }
      if (s == support.size()) break;
    }
  }
  return scan;
}

}  // namespace gqec
