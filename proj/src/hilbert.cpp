#include "gqec/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gqec/exceptions.hpp"

namespace gqec {

namespace {

// Per-register weighted relabeling: label v maps to target[v] with
// coefficient coeff[v]; target -1 drops the amplitude; overflow[v] set
// means the move is illegal and must throw if any amplitude sits there.
struct RegisterMonomial {
  std::vector<std::int64_t> target;
  std::vector<std::complex<double>> coeff;
  std::vector<char> overflow;

  explicit RegisterMonomial(std::int64_t dim)
      : target(dim, -1), coeff(dim, 0.0), overflow(dim, 0) {}
};

bool is_diagonal(const RegisterMonomial& m) {
  for (std::size_t v = 0; v < m.target.size(); ++v) {
    if (m.overflow[v]) return false;
    if (m.target[v] != static_cast<std::int64_t>(v)) return false;
  }
  return true;
}

void apply_register_monomial(StateVector& state, int r,
                             const RegisterMonomial& m,
                             const char* op_name) {
  const RegisterLayout& layout = state.layout();
  const std::int64_t dim = layout.total_dim();
  const std::int64_t stride = layout.stride(r);

  if (is_diagonal(m)) {
    for (std::int64_t idx = 0; idx < dim; ++idx) {
      state.amp(idx) *= m.coeff[layout.digit(idx, r)];
    }
    return;
  }

  std::vector<std::complex<double>> out(dim, 0.0);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    const std::complex<double> a = state.amp(idx);
    if (a == std::complex<double>{0.0, 0.0}) continue;
    const std::int64_t label = layout.digit(idx, r);
    if (m.overflow[label]) {
      throw CutoffExceeded(std::string("[hilbert] ") + op_name +
                           ": amplitude pushed past the register cutoff");
    }
    const std::int64_t t = m.target[label];
    if (t < 0) continue;
    out[idx + (t - label) * stride] += m.coeff[label] * a;
  }
  for (std::int64_t idx = 0; idx < dim; ++idx) state.amp(idx) = out[idx];
}

// Like above but with a Jordan-Wigner parity factor from the given
// registers: amplitude picks up (-1)^(sum of their digits).
void apply_register_monomial_with_parity(StateVector& state, int r,
                                         const RegisterMonomial& m,
                                         const std::vector<int>& parity_regs) {
  const RegisterLayout& layout = state.layout();
  const std::int64_t dim = layout.total_dim();
  const std::int64_t stride = layout.stride(r);
  std::vector<std::complex<double>> out(dim, 0.0);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    const std::complex<double> a = state.amp(idx);
    if (a == std::complex<double>{0.0, 0.0}) continue;
    const std::int64_t label = layout.digit(idx, r);
    const std::int64_t t = m.target[label];
    if (t < 0) continue;
    std::int64_t parity = 0;
    for (int pr : parity_regs) parity += layout.digit(idx, pr);
    const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
    out[idx + (t - label) * stride] += sign * m.coeff[label] * a;
  }
  for (std::int64_t idx = 0; idx < dim; ++idx) state.amp(idx) = out[idx];
}

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

// ---- RegisterLayout ----------------------------------------------------

std::shared_ptr<const RegisterLayout> RegisterLayout::create(
    const Lattice& lattice, const GroupSpec& group, const MatterContent& matter,
    std::int64_t dim_cap) {
  std::vector<int> links(lattice.num_links());
  for (int l = 0; l < lattice.num_links(); ++l) links[l] = l;
  return create_for_links(lattice, group, matter, links, dim_cap);
}

std::shared_ptr<const RegisterLayout> RegisterLayout::create_for_links(
    const Lattice& lattice, const GroupSpec& group, const MatterContent& matter,
    const std::vector<int>& links, std::int64_t dim_cap) {
  auto layout = std::shared_ptr<RegisterLayout>(new RegisterLayout());
  layout->group_ = group;
  layout->matter_ = matter;
  layout->num_vertices_ = lattice.num_vertices();

  for (int l : links) {
    if (l < 0 || l >= lattice.num_links()) {
      throw SpecMismatch("[layout] link index out of range");
    }
    RegisterInfo info;
    info.type = RegisterInfo::Type::Link;
    info.dim = group.order();
    info.link = l;
    layout->link_to_reg_.emplace(l, static_cast<int>(layout->registers_.size()));
    layout->registers_.push_back(info);
  }

  if (matter.kind() == MatterContent::Kind::Bosonic) {
    for (int v = 0; v < lattice.num_vertices(); ++v) {
      for (std::size_t s = 0; s < matter.species().size(); ++s) {
        const BosonSpecies& species = matter.species()[s];
        if (species.charge.factors() != group.factors()) {
          throw SpecMismatch("[layout] species charge group mismatch");
        }
        const int modes = species.oscillator_pair ? 2 : 1;
        for (int mode = 0; mode < modes; ++mode) {
          RegisterInfo info;
          info.type = species.oscillator_pair ? RegisterInfo::Type::BosonMode
                                              : RegisterInfo::Type::BosonFinite;
          info.dim = species.oscillator_pair ? species.cutoff + 1
                                             : species.finite_dimension();
          info.matter = MatterIndex{v, static_cast<int>(s), mode};
          layout->matter_to_reg_.emplace(
              info.matter, static_cast<int>(layout->registers_.size()));
          layout->registers_.push_back(info);
        }
      }
    }
  } else if (matter.kind() == MatterContent::Kind::Fermionic) {
    if (matter.fermion_charge().factors() != group.factors()) {
      throw SpecMismatch("[layout] fermion charge group mismatch");
    }
    for (int v = 0; v < lattice.num_vertices(); ++v) {
      RegisterInfo info;
      info.type = RegisterInfo::Type::Fermion;
      info.dim = 2;
      info.matter = MatterIndex{v, 0, 0};
      layout->matter_to_reg_.emplace(info.matter,
                                     static_cast<int>(layout->registers_.size()));
      layout->fermion_regs_.push_back(
          static_cast<int>(layout->registers_.size()));
      layout->registers_.push_back(info);
    }
  }

  layout->total_dim_ = 1;
  for (const RegisterInfo& info : layout->registers_) {
    if (layout->total_dim_ > dim_cap / info.dim) {
      throw DimensionCap("[layout] total dimension exceeds the cap of " +
                         std::to_string(dim_cap));
    }
    layout->total_dim_ *= info.dim;
  }
  layout->strides_.assign(layout->registers_.size(), 1);
  for (int r = static_cast<int>(layout->registers_.size()) - 2; r >= 0; --r) {
    layout->strides_[r] = layout->strides_[r + 1] * layout->registers_[r + 1].dim;
  }
  return layout;
}

int RegisterLayout::link_register(int link) const {
  auto it = link_to_reg_.find(link);
  if (it == link_to_reg_.end()) {
    throw IncompatibleError("[layout] no register for link " +
                            std::to_string(link));
  }
  return it->second;
}

bool RegisterLayout::has_link(int link) const {
  return link_to_reg_.contains(link);
}

int RegisterLayout::matter_register(const MatterIndex& idx) const {
  auto it = matter_to_reg_.find(idx);
  if (it == matter_to_reg_.end()) {
    throw IncompatibleError("[layout] no matter register at " + idx.to_string());
  }
  return it->second;
}

std::vector<std::int64_t> RegisterLayout::digits(std::int64_t index) const {
  std::vector<std::int64_t> out(registers_.size());
  for (int r = 0; r < num_registers(); ++r) out[r] = digit(index, r);
  return out;
}

std::int64_t RegisterLayout::index_of(
    const std::vector<std::int64_t>& digits) const {
  if (digits.size() != registers_.size()) {
    throw SpecMismatch("[layout] digit tuple length mismatch");
  }
  std::int64_t index = 0;
  for (std::size_t r = 0; r < digits.size(); ++r) {
    if (digits[r] < 0 || digits[r] >= registers_[r].dim) {
      throw SpecMismatch("[layout] digit out of range");
    }
    index = index * registers_[r].dim + digits[r];
  }
  return index;
}

std::string RegisterLayout::basis_label(std::int64_t index) const {
  bool wide = false;
  for (const RegisterInfo& info : registers_) {
    if (info.dim > 10) wide = true;
  }
  std::ostringstream out;
  out << '|';
  bool in_matter = false;
  bool first = true;
  for (int r = 0; r < num_registers(); ++r) {
    const bool matter_reg = registers_[r].type != RegisterInfo::Type::Link;
    if (matter_reg && !in_matter) {
      out << ';';
      in_matter = true;
      first = true;
    }
    if (!first && wide) out << ',';
    first = false;
    out << digit(index, r);
  }
  out << '>';
  return out.str();
}

// ---- StateVector -------------------------------------------------------

StateVector::StateVector(std::shared_ptr<const RegisterLayout> layout)
    : layout_(std::move(layout)),
      amps_(static_cast<std::size_t>(layout_->total_dim()), {0.0, 0.0}) {}

StateVector StateVector::basis_state(
    std::shared_ptr<const RegisterLayout> layout, std::int64_t index) {
  StateVector out(std::move(layout));
  out.amps_.at(static_cast<std::size_t>(index)) = {1.0, 0.0};
  return out;
}

StateVector StateVector::random_state(
    std::shared_ptr<const RegisterLayout> layout, std::mt19937_64& rng) {
  StateVector out(std::move(layout));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& a : out.amps_) a = {gauss(rng), gauss(rng)};
  out.normalize();
  return out;
}

StateVector StateVector::random_masked_state(
    std::shared_ptr<const RegisterLayout> layout,
    const std::vector<std::uint8_t>& mask, std::mt19937_64& rng) {
  StateVector out(std::move(layout));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t idx = 0; idx < out.amps_.size(); ++idx) {
    if (mask[idx]) out.amps_[idx] = {gauss(rng), gauss(rng)};
  }
  out.normalize();
  return out;
}

double StateVector::norm() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return std::sqrt(total);
}

void StateVector::normalize() {
  const double n = norm();
  if (n == 0.0) return;
  for (auto& a : amps_) a /= n;
}

void StateVector::scale(std::complex<double> factor) {
  for (auto& a : amps_) a *= factor;
}

std::complex<double> StateVector::inner(const StateVector& other) const {
  std::complex<double> total{0.0, 0.0};
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    total += std::conj(amps_[i]) * other.amps_[i];
  }
  return total;
}

double StateVector::distance(const StateVector& other) const {
  double total = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    total += std::norm(amps_[i] - other.amps_[i]);
  }
  return std::sqrt(total);
}

// ---- Primitive application --------------------------------------------

namespace {

RegisterMonomial link_shift_monomial(const GroupSpec& group,
                                     const Character& chi) {
  RegisterMonomial m(group.order());
  for (std::int64_t v = 0; v < group.order(); ++v) {
    m.target[v] = group.index_of(compose(chi, group.character_at(v)));
    m.coeff[v] = 1.0;
  }
  return m;
}

RegisterMonomial link_phase_monomial(const GroupSpec& group,
                                     const GroupElement& g) {
  RegisterMonomial m(group.order());
  for (std::int64_t v = 0; v < group.order(); ++v) {
    m.target[v] = v;
    m.coeff[v] = pair_phase(group.character_at(v), g).to_complex();
  }
  return m;
}

RegisterMonomial boson_monomial(const RegisterInfo& info, const BosonOp& op) {
  const std::int64_t d = info.dim;
  const bool finite = info.type == RegisterInfo::Type::BosonFinite;
  RegisterMonomial m(d);
  switch (op.kind) {
    case BosonOpKind::Raise:
      for (std::int64_t n = 0; n + 1 < d; ++n) {
        m.target[n] = n + 1;
        m.coeff[n] = std::sqrt(static_cast<double>(n + 1));
      }
      break;
    case BosonOpKind::Lower:
      for (std::int64_t n = 1; n < d; ++n) {
        m.target[n] = n - 1;
        m.coeff[n] = std::sqrt(static_cast<double>(n));
      }
      break;
    case BosonOpKind::BarRaise:
      if (!finite) {
        throw IncompatibleError(
            "[hilbert] antiparticle ladder only exists on finite-order "
            "registers; use the antiparticle mode register instead");
      }
      // abar^dag |(m+1) mod D> = sqrt(D-m) |m> for m = 1..D-1.
      for (std::int64_t mm = 1; mm < d; ++mm) {
        const std::int64_t src = (mm + 1) % d;
        m.target[src] = mm;
        m.coeff[src] = std::sqrt(static_cast<double>(d - mm));
      }
      break;
    case BosonOpKind::BarLower:
      if (!finite) {
        throw IncompatibleError(
            "[hilbert] antiparticle ladder only exists on finite-order "
            "registers; use the antiparticle mode register instead");
      }
      // abar |m> = sqrt(D-m) |(m+1) mod D> for m = 1..D-1.
      for (std::int64_t mm = 1; mm < d; ++mm) {
        m.target[mm] = (mm + 1) % d;
        m.coeff[mm] = std::sqrt(static_cast<double>(d - mm));
      }
      break;
    case BosonOpKind::Number:
      for (std::int64_t n = 0; n < d; ++n) {
        m.target[n] = n;
        m.coeff[n] = static_cast<double>(n);
      }
      break;
    case BosonOpKind::PhaseN:
      for (std::int64_t n = 0; n < d; ++n) {
        m.target[n] = n;
        m.coeff[n] = op.theta.times(n).to_complex();
      }
      break;
    case BosonOpKind::CleanShift:
      for (std::int64_t n = 0; n < d; ++n) {
        if (finite) {
          m.target[n] = positive_mod(n + op.shift, d);
          m.coeff[n] = 1.0;
        } else if (n + op.shift < d) {
          m.target[n] = n + op.shift;
          m.coeff[n] = 1.0;
        } else {
          m.overflow[n] = 1;
        }
      }
      break;
    case BosonOpKind::CleanShiftDag:
      for (std::int64_t n = 0; n < d; ++n) {
        if (finite) {
          m.target[n] = positive_mod(n - op.shift, d);
          m.coeff[n] = 1.0;
        } else if (n - op.shift >= 0) {
          m.target[n] = n - op.shift;
          m.coeff[n] = 1.0;
        }
        // Under-range amplitudes drop: adjoint of an isometry.
      }
      break;
  }
  return m;
}

RegisterMonomial fermion_monomial(FermionOpKind kind) {
  RegisterMonomial m(2);
  switch (kind) {
    case FermionOpKind::Annihilate:  // |0><1|
      m.target[1] = 0;
      m.coeff[1] = 1.0;
      break;
    case FermionOpKind::Create:  // |1><0|
      m.target[0] = 1;
      m.coeff[0] = 1.0;
      break;
    case FermionOpKind::Number:
      m.target[0] = 0;
      m.coeff[0] = 0.0;
      m.target[1] = 1;
      m.coeff[1] = 1.0;
      break;
    case FermionOpKind::PauliZ:
      m.target[0] = 0;
      m.coeff[0] = 1.0;
      m.target[1] = 1;
      m.coeff[1] = -1.0;
      break;
    case FermionOpKind::PauliX:
      m.target[0] = 1;
      m.coeff[0] = 1.0;
      m.target[1] = 0;
      m.coeff[1] = 1.0;
      break;
    case FermionOpKind::PauliY:  // i|1><0| - i|0><1|
      m.target[0] = 1;
      m.coeff[0] = {0.0, 1.0};
      m.target[1] = 0;
      m.coeff[1] = {0.0, -1.0};
      break;
  }
  return m;
}

bool fermion_needs_string(FermionOpKind kind) {
  switch (kind) {
    case FermionOpKind::Annihilate:
    case FermionOpKind::Create:
    case FermionOpKind::PauliX:
    case FermionOpKind::PauliY:
      return true;
    default:
      return false;
  }
}

}  // namespace

void apply_op(StateVector& state, const PrimitiveOp& op) {
  const RegisterLayout& layout = state.layout();
  if (const auto* w = std::get_if<LinkShiftOp>(&op)) {
    const int r = layout.link_register(w->link);
    apply_register_monomial(state, r,
                            link_shift_monomial(layout.group(), w->chi), "W");
  } else if (const auto* u = std::get_if<LinkPhaseOp>(&op)) {
    const int r = layout.link_register(u->link);
    apply_register_monomial(state, r, link_phase_monomial(layout.group(), u->g),
                            "U");
  } else if (const auto* b = std::get_if<BosonOp>(&op)) {
    const int r = layout.matter_register(b->target);
    const RegisterInfo& info = layout.reg(r);
    // Diagonal kinds act on any occupation register, fermionic included.
    if (info.type == RegisterInfo::Type::Fermion &&
        b->kind != BosonOpKind::Number && b->kind != BosonOpKind::PhaseN) {
      throw IncompatibleError("[hilbert] bosonic ladder on fermion register");
    }
    apply_register_monomial(state, r, boson_monomial(info, *b), "boson");
  } else if (const auto* f = std::get_if<FermionOp>(&op)) {
    const int r = layout.matter_register(f->target);
    if (layout.reg(r).type != RegisterInfo::Type::Fermion) {
      throw IncompatibleError("[hilbert] fermionic operator on boson register");
    }
    const RegisterMonomial m = fermion_monomial(f->kind);
    if (fermion_needs_string(f->kind)) {
      // String over fermion registers at smaller vertices (JW order).
      std::vector<int> parity_regs;
      for (int pr : layout.fermion_registers()) {
        if (layout.reg(pr).matter.vertex < f->target.vertex) {
          parity_regs.push_back(pr);
        }
      }
      apply_register_monomial_with_parity(state, r, m, parity_regs);
    } else {
      apply_register_monomial(state, r, m, "fermion");
    }
  } else if (const auto* p = std::get_if<GlobalPhaseOp>(&op)) {
    state.scale(p->phase.to_complex());
  }
}

void apply_sequence(StateVector& state, const OpSequence& seq) {
  for (const PrimitiveOp& op : seq) apply_op(state, op);
}

PrimitiveOp adjoint_op(const PrimitiveOp& op) {
  if (const auto* w = std::get_if<LinkShiftOp>(&op)) {
    return LinkShiftOp{w->link, conjugate(w->chi)};
  }
  if (const auto* u = std::get_if<LinkPhaseOp>(&op)) {
    return LinkPhaseOp{u->link, inverse(u->g)};
  }
  if (const auto* b = std::get_if<BosonOp>(&op)) {
    BosonOp out = *b;
    switch (b->kind) {
      case BosonOpKind::Raise: out.kind = BosonOpKind::Lower; break;
      case BosonOpKind::Lower: out.kind = BosonOpKind::Raise; break;
      case BosonOpKind::BarRaise: out.kind = BosonOpKind::BarLower; break;
      case BosonOpKind::BarLower: out.kind = BosonOpKind::BarRaise; break;
      case BosonOpKind::Number: break;
      case BosonOpKind::PhaseN: out.theta = -b->theta; break;
      case BosonOpKind::CleanShift: out.kind = BosonOpKind::CleanShiftDag; break;
      case BosonOpKind::CleanShiftDag: out.kind = BosonOpKind::CleanShift; break;
    }
    return out;
  }
  if (const auto* f = std::get_if<FermionOp>(&op)) {
    FermionOp out = *f;
    switch (f->kind) {
      case FermionOpKind::Annihilate: out.kind = FermionOpKind::Create; break;
      case FermionOpKind::Create: out.kind = FermionOpKind::Annihilate; break;
      default: break;  // Number, Pauli X/Y/Z are self-adjoint
    }
    return out;
  }
  const auto& p = std::get<GlobalPhaseOp>(op);
  return GlobalPhaseOp{-p.phase};
}

OpSequence adjoint_sequence(const OpSequence& seq) {
  OpSequence out;
  out.reserve(seq.size());
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
    out.push_back(adjoint_op(*it));
  }
  return out;
}

std::string to_string(const PrimitiveOp& op) {
  std::ostringstream out;
  if (const auto* w = std::get_if<LinkShiftOp>(&op)) {
    out << "W[" << w->link << ':' << w->chi.to_string() << ']';
  } else if (const auto* u = std::get_if<LinkPhaseOp>(&op)) {
    out << "U[" << u->link << ':' << u->g.to_string() << ']';
  } else if (const auto* b = std::get_if<BosonOp>(&op)) {
    const char* name = "?";
    switch (b->kind) {
      case BosonOpKind::Raise: name = "adag"; break;
      case BosonOpKind::Lower: name = "a"; break;
      case BosonOpKind::BarRaise: name = "abardag"; break;
      case BosonOpKind::BarLower: name = "abar"; break;
      case BosonOpKind::Number: name = "N"; break;
      case BosonOpKind::PhaseN: name = "Zn"; break;
      case BosonOpKind::CleanShift: name = "X"; break;
      case BosonOpKind::CleanShiftDag: name = "Xdag"; break;
    }
    out << name << '[' << b->target.to_string();
    if (b->kind == BosonOpKind::PhaseN) {
      out << ':' << b->theta.to_string();
    } else if (b->kind == BosonOpKind::CleanShift ||
               b->kind == BosonOpKind::CleanShiftDag) {
      out << ':' << b->shift;
    }
    out << ']';
  } else if (const auto* f = std::get_if<FermionOp>(&op)) {
    const char* name = "?";
    switch (f->kind) {
      case FermionOpKind::Annihilate: name = "psi"; break;
      case FermionOpKind::Create: name = "psidag"; break;
      case FermionOpKind::Number: name = "N"; break;
      case FermionOpKind::PauliZ: name = "Z"; break;
      case FermionOpKind::PauliX: name = "X"; break;
      case FermionOpKind::PauliY: name = "Y"; break;
    }
    out << name << "[v" << f->target.vertex << ']';
  } else {
    const auto& p = std::get<GlobalPhaseOp>(op);
    out << "phase(" << p.phase.to_string() << ')';
  }
  return out.str();
}

std::string to_string(const OpSequence& seq) {
  if (seq.empty()) return "1";
  std::ostringstream out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out << ' ';
    out << to_string(seq[i]);
  }
  return out.str();
}

// ---- Gauge structure ---------------------------------------------------

namespace {

// Accumulates the exact per-label phase tables of the gauge transformation
// at vertex v; only touched registers appear in the result.
std::map<int, std::vector<RationalPhase>> gauge_phase_tables(
    const RegisterLayout& layout, const Lattice& lattice, int v,
    const GroupElement& g, const std::vector<int>& stagger) {
  const GroupSpec& group = layout.group();
  std::map<int, std::vector<RationalPhase>> tables;
  auto table_for = [&](int r) -> std::vector<RationalPhase>& {
    auto [it, inserted] = tables.try_emplace(
        r, std::vector<RationalPhase>(layout.reg(r).dim, RationalPhase{}));
    return it->second;
  };

  for (int l : lattice.out_links(v)) {
    if (!layout.has_link(l)) continue;
    const int r = layout.link_register(l);
    auto& table = table_for(r);
    for (std::int64_t c = 0; c < group.order(); ++c) {
      table[c] = table[c] + pair_phase(group.character_at(c), g);
    }
  }
  const GroupElement ginv = inverse(g);
  for (int l : lattice.in_links(v)) {
    if (!layout.has_link(l)) continue;
    const int r = layout.link_register(l);
    auto& table = table_for(r);
    for (std::int64_t c = 0; c < group.order(); ++c) {
      table[c] = table[c] + pair_phase(group.character_at(c), ginv);
    }
  }

  const MatterContent& matter = layout.matter();
  if (matter.kind() == MatterContent::Kind::Bosonic) {
    for (std::size_t s = 0; s < matter.species().size(); ++s) {
      const BosonSpecies& species = matter.species()[s];
      const RationalPhase unit = pair_phase(species.charge, g);
      const int modes = species.oscillator_pair ? 2 : 1;
      for (int mode = 0; mode < modes; ++mode) {
        const int r = layout.matter_register(
            MatterIndex{v, static_cast<int>(s), mode});
        auto& table = table_for(r);
        for (std::int64_t n = 0; n < layout.reg(r).dim; ++n) {
          // Mode 0 carries charge^n, mode 1 (antiparticles) charge^-n.
          table[n] = table[n] + (mode == 0 ? unit.times(n) : (-unit).times(n));
        }
      }
    }
  } else if (matter.kind() == MatterContent::Kind::Fermionic) {
    if (stagger.empty()) {
      throw FamilyMismatch(
          "[hilbert] fermionic gauge transformation needs the stagger "
          "coloring");
    }
    const RationalPhase unit = pair_phase(matter.fermion_charge(), g);
    const int r = layout.matter_register(MatterIndex{v, 0, 0});
    auto& table = table_for(r);
    for (std::int64_t n = 0; n < 2; ++n) {
      table[n] = table[n] + unit.times(n - stagger[v]);
    }
  }
  return tables;
}

}  // namespace

void gauge_transform(StateVector& state, const Lattice& lattice, int v,
                     const GroupElement& g, const std::vector<int>& stagger) {
  const RegisterLayout& layout = state.layout();
  const auto tables = gauge_phase_tables(layout, lattice, v, g, stagger);
  std::vector<std::pair<int, std::vector<std::complex<double>>>> complex_tables;
  complex_tables.reserve(tables.size());
  for (const auto& [r, table] : tables) {
    std::vector<std::complex<double>> ct(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) ct[i] = table[i].to_complex();
    complex_tables.emplace_back(r, std::move(ct));
  }
  const std::int64_t dim = layout.total_dim();
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::complex<double> phase{1.0, 0.0};
    for (const auto& [r, ct] : complex_tables) phase *= ct[layout.digit(idx, r)];
    state.amp(idx) *= phase;
  }
}

std::vector<std::uint8_t> gauge_invariant_mask(const RegisterLayout& layout,
                                               const Lattice& lattice,
                                               const std::vector<int>& stagger) {
  const GroupSpec& group = layout.group();
  const std::size_t rank = group.rank();
  const int nv = lattice.num_vertices();
  const MatterContent& matter = layout.matter();
  if (matter.kind() == MatterContent::Kind::Fermionic && stagger.empty()) {
    throw FamilyMismatch("[hilbert] fermionic mask needs the stagger coloring");
  }

  // Per register and label: sparse list of (vertex, factor, exponent delta)
  // contributions to the vertex charge.
  struct Contribution {
    int vertex;
    std::size_t factor;
    std::int64_t delta;
  };
  std::vector<std::vector<std::vector<Contribution>>> contrib(
      layout.num_registers());
  for (int r = 0; r < layout.num_registers(); ++r) {
    const RegisterInfo& info = layout.reg(r);
    contrib[r].resize(info.dim);
    for (std::int64_t label = 0; label < info.dim; ++label) {
      auto& list = contrib[r][label];
      if (info.type == RegisterInfo::Type::Link) {
        const Character chi = group.character_at(label);
        const Link& l = lattice.link(info.link);
        for (std::size_t i = 0; i < rank; ++i) {
          if (chi.exponents()[i] == 0) continue;
          list.push_back({l.tail, i, chi.exponents()[i]});
          list.push_back({l.head, i, -chi.exponents()[i]});
        }
      } else if (info.type == RegisterInfo::Type::BosonFinite ||
                 info.type == RegisterInfo::Type::BosonMode) {
        const BosonSpecies& species = matter.species()[info.matter.species];
        const std::int64_t sign = info.matter.mode == 0 ? 1 : -1;
        for (std::size_t i = 0; i < rank; ++i) {
          const std::int64_t e = species.charge.exponents()[i];
          if (e == 0) continue;
          list.push_back({info.matter.vertex, i, sign * e * label});
        }
      } else {  // Fermion
        const Character& chi = matter.fermion_charge();
        const std::int64_t occ = label - stagger[info.matter.vertex];
        for (std::size_t i = 0; i < rank; ++i) {
          const std::int64_t e = chi.exponents()[i];
          if (e == 0) continue;
          list.push_back({info.matter.vertex, i, e * occ});
        }
      }
    }
  }

  const std::int64_t dim = layout.total_dim();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(dim), 0);
  std::vector<std::int64_t> acc(static_cast<std::size_t>(nv) * rank);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    std::fill(acc.begin(), acc.end(), 0);
    for (int r = 0; r < layout.num_registers(); ++r) {
      for (const auto& c : contrib[r][layout.digit(idx, r)]) {
        acc[static_cast<std::size_t>(c.vertex) * rank + c.factor] += c.delta;
      }
    }
    bool ok = true;
    for (int v = 0; v < nv && ok; ++v) {
      for (std::size_t i = 0; i < rank; ++i) {
        if (acc[static_cast<std::size_t>(v) * rank + i] %
                group.factors()[i] != 0) {
          ok = false;
          break;
        }
      }
    }
    mask[static_cast<std::size_t>(idx)] = ok ? 1 : 0;
  }
  return mask;
}

std::vector<std::int64_t> mask_indices(const std::vector<std::uint8_t>& mask) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

double project_to_mask(StateVector& state,
                       const std::vector<std::uint8_t>& mask) {
  double discarded = 0.0;
  for (std::int64_t idx = 0; idx < state.dim(); ++idx) {
    if (!mask[static_cast<std::size_t>(idx)]) {
      discarded += std::norm(state.amp(idx));
      state.amp(idx) = {0.0, 0.0};
    }
  }
  return std::sqrt(discarded);
}

StateVector condition_on_frame(const StateVector& state, const Lattice& lattice,
                               const SpanningTree& tree,
                               const std::map<int, GroupElement>& orientation,
                               const std::vector<int>& stagger, double tol) {
  const RegisterLayout& layout = state.layout();
  const GroupSpec& group = layout.group();

  auto orientation_at = [&](int v) -> GroupElement {
    auto it = orientation.find(v);
    return it == orientation.end() ? group.identity() : it->second;
  };
  if (auto it = orientation.find(tree.root());
      it != orientation.end() && !it->second.is_identity()) {
    throw SpecMismatch(
        "[frame] orientation at the root must be the identity (the root is "
        "the reference)");
  }

  // The frame orientation fixes one group label per tree link: walking from
  // v to its parent across (link, sign) contributes g_link^sign, so
  // g_link = (h_v h_parent^-1)^sign.
  std::map<int, GroupElement> link_labels;
  for (int v = 0; v < lattice.num_vertices(); ++v) {
    if (v == tree.root()) continue;
    const TreeStep& step = tree.parent_step(v);
    const GroupElement rel =
        compose(orientation_at(v), inverse(orientation_at(tree.parent(v))));
    link_labels.emplace(step.link, step.sign > 0 ? rel : inverse(rel));
  }

  // Gauge-invariance gate.
  StateVector masked = state;
  const double in_norm = state.norm();
  const double lost = project_to_mask(
      masked, gauge_invariant_mask(layout, lattice, stagger));
  if (lost > tol * std::max(1.0, in_norm)) {
    throw NotGaugeInvariant(
        "[frame] state leaks outside the gauge-invariant mask (norm " +
        std::to_string(lost) + ")");
  }

  // Phase tables <g_l | chi> per tree register; the sqrt(|G|) of the
  // group-basis overlap cancels against the unitarity normalization, so
  // only the character phases remain.
  std::vector<std::pair<int, std::vector<std::complex<double>>>> tree_tables;
  for (const auto& [link, g] : link_labels) {
    const int r = layout.link_register(link);
    std::vector<std::complex<double>> table(group.order());
    for (std::int64_t c = 0; c < group.order(); ++c) {
      table[c] = pair_phase(group.character_at(c), g).to_complex();
    }
    tree_tables.emplace_back(r, std::move(table));
  }

  auto reduced_layout = RegisterLayout::create_for_links(
      lattice, group, layout.matter(), tree.system_links());
  StateVector out(reduced_layout);

  // Registers shared by both layouts, in matching order.
  std::vector<int> kept_regs;
  for (int r = 0; r < layout.num_registers(); ++r) {
    const RegisterInfo& info = layout.reg(r);
    if (info.type == RegisterInfo::Type::Link && tree.contains(info.link)) {
      continue;
    }
    kept_regs.push_back(r);
  }

  for (std::int64_t idx = 0; idx < masked.dim(); ++idx) {
    const std::complex<double> a = masked.amp(idx);
    if (a == std::complex<double>{0.0, 0.0}) continue;
    std::complex<double> phase{1.0, 0.0};
    for (const auto& [r, table] : tree_tables) {
      phase *= table[layout.digit(idx, r)];
    }
    std::int64_t out_idx = 0;
    for (std::size_t k = 0; k < kept_regs.size(); ++k) {
      out_idx = out_idx * reduced_layout->reg(static_cast<int>(k)).dim +
                layout.digit(idx, kept_regs[k]);
    }
    out.amp(out_idx) += phase * a;
  }
  return out;
}

}  // namespace gqec
