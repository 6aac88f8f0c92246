#include "gqec/codes.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "gqec/exceptions.hpp"

namespace gqec {
namespace {

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > (std::int64_t{1} << 62) / base) {
      throw DimensionCap("[codes] dimension overflows 64-bit range");
    }
    out *= base;
  }
  return out;
}

// Per-register occupation metadata for the matter content: register
// dimension and the charge contributed by one quantum (antiparticle modes
// carry the conjugate charge).
struct MatterRegisterSpec {
  MatterIndex idx;
  std::int64_t dim;
  Character unit_charge;
};

std::vector<MatterRegisterSpec> matter_register_specs(
    const MatterContent& matter, int num_vertices) {
  std::vector<MatterRegisterSpec> out;
  if (matter.kind() == MatterContent::Kind::Bosonic) {
    for (int v = 0; v < num_vertices; ++v) {
      for (int s = 0; s < static_cast<int>(matter.species().size()); ++s) {
        const BosonSpecies& sp = matter.species()[s];
        if (sp.oscillator_pair) {
          out.push_back({MatterIndex{v, s, 0}, sp.cutoff + 1, sp.charge});
          out.push_back(
              {MatterIndex{v, s, 1}, sp.cutoff + 1, conjugate(sp.charge)});
        } else {
          out.push_back(
              {MatterIndex{v, s, 0}, sp.finite_dimension(), sp.charge});
        }
      }
    }
  } else if (matter.kind() == MatterContent::Kind::Fermionic) {
    for (int v = 0; v < num_vertices; ++v) {
      out.push_back({MatterIndex{v, 0, 0}, 2, matter.fermion_charge()});
    }
  }
  return out;
}

std::int64_t dressed_count(const MatterContent& matter,
                           const std::vector<int>& stagger, int num_vertices) {
  const std::vector<MatterRegisterSpec> regs =
      matter_register_specs(matter, num_vertices);
  if (regs.empty()) return 1;
  std::int64_t configs = 1;
  for (const auto& r : regs) {
    if (configs > (std::int64_t{1} << 22) / r.dim) {
      throw DimensionCap("[codes] matter configuration space too large");
    }
    configs *= r.dim;
  }
  // Staggered vacuum occupations shift the neutrality condition.
  Character offset = power(regs.front().unit_charge, 0);
  if (matter.kind() == MatterContent::Kind::Fermionic) {
    std::int64_t filled = 0;
    for (int c : stagger) filled += c;
    offset = power(conjugate(matter.fermion_charge()), filled);
  }

  std::int64_t count = 0;
  std::function<void(std::size_t, const Character&)> walk =
      [&](std::size_t level, const Character& total) {
        if (level == regs.size()) {
          count += total.is_trivial() ? 1 : 0;
          return;
        }
        Character running = total;
        for (std::int64_t n = 0; n < regs[level].dim; ++n) {
          if (n > 0) running = compose(running, regs[level].unit_charge);
          walk(level + 1, running);
        }
      };
  walk(0, offset);
  return count;
}

void check_family_matter(const MatterContent& matter, CodeFamily family) {
  const MatterContent::Kind kind = matter.kind();
  switch (family) {
    case CodeFamily::PureGaugeGL:
      if (kind != MatterContent::Kind::None) {
        throw IncompatibleMatter("[codes] pure-gauge family takes no matter");
      }
      return;
    case CodeFamily::BosonicGL:
    case CodeFamily::BosonicVacuum:
      if (kind != MatterContent::Kind::Bosonic || matter.species().empty()) {
        throw IncompatibleMatter(
            "[codes] bosonic family needs bosonic species");
      }
      return;
    case CodeFamily::FermionicGL:
    case CodeFamily::FermionicVacuum:
      if (kind != MatterContent::Kind::Fermionic) {
        throw IncompatibleMatter(
            "[codes] fermionic family needs fermionic matter");
      }
      return;
  }
  throw IncompatibleMatter("[codes] unknown family");
}

// The subgroup of the dual group generated by the species charges must be
// everything, otherwise some vertex charge can never be screened by matter.
void check_charges_generate(const GroupSpec& group,
                            const MatterContent& matter) {
  std::vector<char> reached(group.order(), 0);
  reached[group.index_of(group.trivial_character())] = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::int64_t i = 0; i < group.order(); ++i) {
      if (!reached[i]) continue;
      for (const BosonSpecies& sp : matter.species()) {
        const std::int64_t j =
            group.index_of(compose(group.character_at(i), sp.charge));
        if (!reached[j]) {
          reached[j] = 1;
          grew = true;
        }
      }
    }
  }
  for (std::int64_t i = 0; i < group.order(); ++i) {
    if (!reached[i]) {
      throw IncompatibleMatter(
          "[codes] species charges do not generate the dual group");
    }
  }
}

}  // namespace

std::string to_string(CodeFamily family) {
  switch (family) {
    case CodeFamily::PureGaugeGL: return "pure-gauge-gl";
    case CodeFamily::BosonicGL: return "bosonic-gl";
    case CodeFamily::FermionicGL: return "fermionic-gl";
    case CodeFamily::BosonicVacuum: return "bosonic-vacuum";
    case CodeFamily::FermionicVacuum: return "fermionic-vacuum";
  }
  return "?";
}

bool family_is_vacuum(CodeFamily family) {
  return family == CodeFamily::BosonicVacuum ||
         family == CodeFamily::FermionicVacuum;
}

bool family_is_fermionic(CodeFamily family) {
  return family == CodeFamily::FermionicGL ||
         family == CodeFamily::FermionicVacuum;
}

bool family_has_matter(CodeFamily family) {
  return family != CodeFamily::PureGaugeGL;
}

CodeInstance::CodeInstance(Lattice lattice, GroupSpec group, SpanningTree tree,
                           MatterContent matter, CodeFamily family)
    : lattice_(std::move(lattice)),
      group_(std::move(group)),
      tree_(std::move(tree)),
      matter_(std::move(matter)),
      family_(family) {}

std::shared_ptr<const RegisterLayout> CodeInstance::layout() const {
  if (!layout_) {
    throw DimensionCap(
        "[codes] dense structures unavailable: state space exceeds the "
        "dimension cap");
  }
  return layout_;
}

const std::vector<std::uint8_t>& CodeInstance::gauss_mask() const {
  layout();  // throws when dense structures are absent
  return gauss_mask_;
}

const std::vector<std::uint8_t>& CodeInstance::code_mask() const {
  layout();
  return code_mask_;
}

const std::vector<std::int64_t>& CodeInstance::code_basis() const {
  layout();
  return code_basis_;
}

CodeInstance build_code(const Lattice& lattice, const GroupSpec& group,
                        const SpanningTree& tree, const MatterContent& matter,
                        CodeFamily family, std::int64_t dim_cap) {
  check_family_matter(matter, family);
  if (matter.kind() == MatterContent::Kind::Bosonic) {
    for (const BosonSpecies& sp : matter.species()) {
      if (sp.charge.factors() != group.factors()) {
        throw SpecMismatch("[codes] species charge from a different group");
      }
    }
    check_charges_generate(group, matter);
  }
  if (matter.kind() == MatterContent::Kind::Fermionic &&
      matter.fermion_charge().factors() != group.factors()) {
    throw SpecMismatch("[codes] fermion charge from a different group");
  }

  CodeInstance code(lattice, group, tree, matter, family);
  if (code.is_fermionic()) {
    code.stagger_ = lattice.stagger_coloring(tree.root());
  }

  const bool gl_matter = family == CodeFamily::BosonicGL ||
                         family == CodeFamily::FermionicGL;
  code.dimension_ = ipow(group.order(), lattice.loop_rank());
  if (gl_matter) {
    code.dimension_ *=
        dressed_count(matter, code.stagger_, lattice.num_vertices());
  }

  try {
    code.layout_ = RegisterLayout::create(lattice, group, matter, dim_cap);
  } catch (const DimensionCap&) {
    code.layout_ = nullptr;  // symbolic-only instance
  }
  if (code.layout_) {
    code.gauss_mask_ =
        gauge_invariant_mask(*code.layout_, lattice, code.stagger_);
    code.code_mask_ = code.gauss_mask_;
    if (code.is_vacuum()) {
      const RegisterLayout& lay = *code.layout_;
      for (std::int64_t i = 0; i < lay.total_dim(); ++i) {
        if (!code.code_mask_[i]) continue;
        for (int r = lattice.num_links(); r < lay.num_registers(); ++r) {
          const std::int64_t want =
              lay.reg(r).type == RegisterInfo::Type::Fermion
                  ? code.stagger_[lay.reg(r).matter.vertex]
                  : 0;
          if (lay.digit(i, r) != want) {
            code.code_mask_[i] = 0;
            break;
          }
        }
      }
    }
    code.code_basis_ = mask_indices(code.code_mask_);
    if (static_cast<std::int64_t>(code.code_basis_.size()) !=
        code.dimension_) {
      throw std::runtime_error(
          "[codes] internal dimension mismatch between mask and closed form");
    }
  }
  return code;
}

std::int64_t dressed_matter_dimension(const CodeInstance& code) {
  if (!code.has_matter()) {
    throw FamilyMismatch("[codes] dressed matter dimension needs matter");
  }
  return dressed_count(code.matter(), code.stagger(),
                       code.lattice().num_vertices());
}

OpSequence star_operator_sequence(const CodeInstance& code, int v,
                                  const GroupElement& g) {
  if (v < 0 || v >= code.lattice().num_vertices()) {
    throw IncompatibleError("[codes] star vertex out of range");
  }
  OpSequence seq;
  for (int l : code.lattice().out_links(v)) {
    seq.push_back(LinkPhaseOp{l, g});
  }
  for (int l : code.lattice().in_links(v)) {
    seq.push_back(LinkPhaseOp{l, inverse(g)});
  }
  const MatterContent& matter = code.matter();
  if (matter.kind() == MatterContent::Kind::Bosonic) {
    for (int s = 0; s < static_cast<int>(matter.species().size()); ++s) {
      const BosonSpecies& sp = matter.species()[s];
      const RationalPhase theta = pair_phase(sp.charge, g);
      if (theta.is_zero()) continue;
      seq.push_back(BosonOp{MatterIndex{v, s, 0}, BosonOpKind::PhaseN, 1,
                            theta});
      if (sp.oscillator_pair) {
        seq.push_back(BosonOp{MatterIndex{v, s, 1}, BosonOpKind::PhaseN, 1,
                              -theta});
      }
    }
  } else if (matter.kind() == MatterContent::Kind::Fermionic) {
    const RationalPhase theta = pair_phase(matter.fermion_charge(), g);
    if (!theta.is_zero()) {
      seq.push_back(
          BosonOp{MatterIndex{v, 0, 0}, BosonOpKind::PhaseN, 1, theta});
      // Staggered reference occupation: the phase is taken relative to the
      // local vacuum filling.
      const int c = code.stagger()[v];
      if (c != 0) {
        seq.push_back(GlobalPhaseOp{theta.times(-c)});
      }
    }
  }
  return seq;
}

std::vector<StabilizerGenerator> stabilizer_generators(
    const CodeInstance& code) {
  std::vector<StabilizerGenerator> out;
  const GroupSpec& group = code.group();
  const int nv = code.lattice().num_vertices();
  for (int v = 0; v < nv; ++v) {
    for (std::size_t j = 0; j < group.rank(); ++j) {
      StabilizerGenerator gen;
      gen.label = "A[v" + std::to_string(v) + ":g" + std::to_string(j) + "]";
      gen.ops = star_operator_sequence(code, v, group.factor_generator(j));
      gen.redundant = code.family() == CodeFamily::PureGaugeGL &&
                      v == code.tree().root();
      out.push_back(std::move(gen));
    }
  }
  if (!code.is_vacuum()) return out;

  const MatterContent& matter = code.matter();
  if (matter.kind() == MatterContent::Kind::Bosonic) {
    for (int v = 0; v < nv; ++v) {
      for (int s = 0; s < static_cast<int>(matter.species().size()); ++s) {
        const BosonSpecies& sp = matter.species()[s];
        if (sp.oscillator_pair) {
          // Truncated modes are pinned by the finest diagonal phase the
          // register supports (period = register dimension).
          for (int mode = 0; mode < 2; ++mode) {
            StabilizerGenerator gen;
            gen.label = "n[v" + std::to_string(v) + ",s" + std::to_string(s) +
                        (mode == 0 ? ",+]" : ",-]");
            gen.ops = {BosonOp{MatterIndex{v, s, mode}, BosonOpKind::PhaseN, 1,
                               RationalPhase(1, sp.cutoff + 1)}};
            out.push_back(std::move(gen));
          }
        } else {
          for (std::size_t j = 0; j < group.rank(); ++j) {
            const RationalPhase theta =
                pair_phase(sp.charge, group.factor_generator(j));
            if (theta.is_zero()) continue;
            StabilizerGenerator gen;
            gen.label = "u[v" + std::to_string(v) + ",s" + std::to_string(s) +
                        ":g" + std::to_string(j) + "]";
            gen.ops = {
                BosonOp{MatterIndex{v, s, 0}, BosonOpKind::PhaseN, 1, theta}};
            out.push_back(std::move(gen));
          }
        }
      }
    }
  } else if (matter.kind() == MatterContent::Kind::Fermionic) {
    for (int v = 0; v < nv; ++v) {
      StabilizerGenerator gen;
      gen.label = "n[v" + std::to_string(v) + "]";
      gen.ops = {BosonOp{MatterIndex{v, 0, 0}, BosonOpKind::PhaseN, 1,
                         RationalPhase(1, 2)}};
      if (code.stagger()[v] != 0) {
        gen.ops.push_back(
            GlobalPhaseOp{RationalPhase(-code.stagger()[v], 2)});
      }
      out.push_back(std::move(gen));
    }
  }
  return out;
}

std::string XWitness::to_string() const {
  std::string out = links.to_string();
  if (!matter_x.empty()) {
    if (out == "1") out.clear();
    if (!out.empty()) out += " ";
    out += gqec::to_string(matter_x);
  }
  return out;
}

namespace {

// One admissible value for a register in the undetectable-X search, with
// the vertex charges it contributes.
struct SearchOption {
  std::int64_t value = 0;
  std::vector<std::pair<int, Character>> touches;
};

struct SearchRegister {
  bool is_link = false;
  int link = -1;
  MatterIndex idx{};
  std::vector<SearchOption> options;
};

std::vector<SearchRegister> x_search_universe(const CodeInstance& code) {
  std::vector<SearchRegister> regs;
  const GroupSpec& group = code.group();
  const Lattice& lat = code.lattice();
  for (int l = 0; l < lat.num_links(); ++l) {
    SearchRegister r;
    r.is_link = true;
    r.link = l;
    for (std::int64_t c = 1; c < group.order(); ++c) {
      const Character chi = group.character_at(c);
      r.options.push_back(
          {c, {{lat.link(l).tail, chi}, {lat.link(l).head, conjugate(chi)}}});
    }
    regs.push_back(std::move(r));
  }
  // Vacuum families pin the occupations, so matter shifts always trip a
  // number stabilizer: flux registers are the whole universe there.
  if (code.is_vacuum() || !code.has_matter()) return regs;

  const MatterContent& matter = code.matter();
  if (matter.kind() == MatterContent::Kind::Bosonic) {
    for (const MatterRegisterSpec& m :
         matter_register_specs(matter, lat.num_vertices())) {
      SearchRegister r;
      r.idx = m.idx;
      for (std::int64_t k = 1; k < m.dim; ++k) {
        r.options.push_back({k, {{m.idx.vertex, power(m.unit_charge, k)}}});
      }
      regs.push_back(std::move(r));
    }
  } else if (character_order(matter.fermion_charge()) == 2) {
    // Occupation toggles carry a state-independent charge only when the
    // fermion charge squares to the identity; other orders are excluded
    // from the bounded search.
    for (int v = 0; v < lat.num_vertices(); ++v) {
      SearchRegister r;
      r.idx = MatterIndex{v, 0, 0};
      r.options.push_back({1, {{v, matter.fermion_charge()}}});
      regs.push_back(std::move(r));
    }
  }
  return regs;
}

bool x_search(const std::vector<SearchRegister>& regs, int start, int remaining,
              std::vector<Character>& acc,
              std::vector<std::pair<int, std::int64_t>>& picks) {
  if (remaining == 0) {
    for (const Character& chi : acc) {
      if (!chi.is_trivial()) return false;
    }
    return true;
  }
  const int limit = static_cast<int>(regs.size()) - remaining;
  for (int r = start; r <= limit; ++r) {
    for (const SearchOption& opt : regs[r].options) {
      for (const auto& [v, chi] : opt.touches) {
        acc[v] = compose(acc[v], chi);
      }
      picks.emplace_back(r, opt.value);
      if (x_search(regs, r + 1, remaining - 1, acc, picks)) return true;
      picks.pop_back();
      for (const auto& [v, chi] : opt.touches) {
        acc[v] = compose(acc[v], conjugate(chi));
      }
    }
  }
  return false;
}

}  // namespace

CodeParameters code_parameters(const CodeInstance& code, int wmax) {
  CodeParameters out;
  out.wmax = wmax;
  const Lattice& lat = code.lattice();
  const GroupSpec& group = code.group();
  out.num_links = lat.num_links();
  out.num_matter_registers = static_cast<int>(
      matter_register_specs(code.matter(), lat.num_vertices()).size());
  out.dimension = code.code_dimension();
  out.log_dim_base_two = std::log2(static_cast<double>(out.dimension));
  out.log_dim_group_base =
      out.log_dim_base_two / std::log2(static_cast<double>(group.order()));

  // Diagonal single-register logical: any register whose label varies over
  // the code basis yields one, so the distance against phase-type noise is 1
  // whenever the code holds more than one state.
  if (out.dimension > 1) {
    out.d_z = 1;
    if (code.has_dense()) {
      const RegisterLayout& lay = *code.layout();
      const std::vector<std::int64_t>& basis = code.code_basis();
      for (int r = 0; r < lay.num_registers() && out.d_z_witness.empty();
           ++r) {
        const RegisterInfo& info = lay.reg(r);
        if (info.type == RegisterInfo::Type::Link) {
          for (std::size_t j = 0;
               j < group.rank() && out.d_z_witness.empty(); ++j) {
            const GroupElement g = group.factor_generator(j);
            const RationalPhase first =
                pair_phase(group.character_at(lay.digit(basis[0], r)), g);
            for (std::int64_t idx : basis) {
              if (pair_phase(group.character_at(lay.digit(idx, r)), g) !=
                  first) {
                out.d_z_witness = to_string(PrimitiveOp{LinkPhaseOp{info.link, g}});
                break;
              }
            }
          }
        } else {
          const std::int64_t first = lay.digit(basis[0], r);
          for (std::int64_t idx : basis) {
            if (lay.digit(idx, r) != first) {
              PrimitiveOp op =
                  info.type == RegisterInfo::Type::Fermion
                      ? PrimitiveOp{FermionOp{info.matter, FermionOpKind::PauliZ}}
                      : PrimitiveOp{BosonOp{info.matter, BosonOpKind::PhaseN, 1,
                                            RationalPhase(1, info.dim)}};
              out.d_z_witness = to_string(op);
              break;
            }
          }
        }
      }
    } else if (lat.loop_rank() >= 1) {
      // Off-tree link registers sweep every character across the code
      // basis, so the first factor phase already distinguishes states.
      out.d_z_witness = to_string(PrimitiveOp{LinkPhaseOp{
          code.tree().system_links().front(), group.factor_generator(0)}});
    }
  }

  const std::vector<SearchRegister> regs = x_search_universe(code);
  for (int w = 1; w <= wmax && !out.d_x; ++w) {
    std::vector<Character> acc(lat.num_vertices(), group.trivial_character());
    std::vector<std::pair<int, std::int64_t>> picks;
    if (x_search(regs, 0, w, acc, picks)) {
      XWitness witness(group);
      witness.weight = w;
      for (const auto& [r, value] : picks) {
        if (regs[r].is_link) {
          witness.links.multiply(regs[r].link, group.character_at(value));
        } else {
          witness.matter_x[regs[r].idx] = value;
        }
      }
      out.d_x = w;
      out.d_x_witness = std::move(witness);
    }
  }
  return out;
}

}  // namespace gqec
