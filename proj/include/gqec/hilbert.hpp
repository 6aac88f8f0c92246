#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gqec/abelian_group.hpp"
#include "gqec/lattice.hpp"
#include "gqec/matter.hpp"
#include "gqec/qrf.hpp"

// Dense state-vector engine over mixed-radix register layouts. Link
// registers hold flux labels in the character basis (a link label is the
// index of its character); matter registers hold occupation numbers. Every
// stabilizer in scope is diagonal in this basis, which keeps projections
// and syndrome extraction exact.
namespace gqec {

inline constexpr std::int64_t kDefaultDimensionCap = std::int64_t{1} << 22;

struct RegisterInfo {
  enum class Type { Link, BosonFinite, BosonMode, Fermion };
  Type type;
  std::int64_t dim;
  int link = -1;        // for Type::Link
  MatterIndex matter{}; // for matter registers
};

// Immutable register list with mixed-radix index arithmetic. Register 0 is
// the most significant digit, so a basis index reads left-to-right as the
// tuple of register labels.
class RegisterLayout {
 public:
  // Full layout: one register per link (ascending index) followed by matter
  // registers ordered by (vertex, species, mode). Throws DimensionCap if the
  // total dimension exceeds `dim_cap`.
  static std::shared_ptr<const RegisterLayout> create(
      const Lattice& lattice, const GroupSpec& group,
      const MatterContent& matter,
      std::int64_t dim_cap = kDefaultDimensionCap);

  // Same, but restricted to the listed links (used for frame-reduced
  // states over the system links only).
  static std::shared_ptr<const RegisterLayout> create_for_links(
      const Lattice& lattice, const GroupSpec& group,
      const MatterContent& matter, const std::vector<int>& links,
      std::int64_t dim_cap = kDefaultDimensionCap);

  const GroupSpec& group() const { return group_; }
  const MatterContent& matter() const { return matter_; }
  int num_vertices() const { return num_vertices_; }

  std::int64_t total_dim() const { return total_dim_; }
  int num_registers() const { return static_cast<int>(registers_.size()); }
  const RegisterInfo& reg(int r) const { return registers_.at(r); }

  // Register lookup; throws IncompatibleError for absent registers.
  int link_register(int link) const;
  int matter_register(const MatterIndex& idx) const;
  bool has_link(int link) const;
  // Fermion registers in Jordan-Wigner order (ascending vertex).
  const std::vector<int>& fermion_registers() const { return fermion_regs_; }

  std::int64_t stride(int r) const { return strides_.at(r); }
  std::int64_t digit(std::int64_t index, int r) const {
    return (index / strides_[r]) % registers_[r].dim;
  }
  std::int64_t with_digit(std::int64_t index, int r, std::int64_t value) const {
    return index + (value - digit(index, r)) * strides_[r];
  }
  std::vector<std::int64_t> digits(std::int64_t index) const;
  std::int64_t index_of(const std::vector<std::int64_t>& digits) const;

  // Human-readable basis label, e.g. "|011;10>" (links;matter) or "|0,3,1>"
  // when some register dimension exceeds 10.
  std::string basis_label(std::int64_t index) const;

 private:
  RegisterLayout() = default;

  GroupSpec group_{std::vector<std::int64_t>{2}};
  MatterContent matter_ = MatterContent::none();
  int num_vertices_ = 0;
  std::vector<RegisterInfo> registers_;
  std::vector<std::int64_t> strides_;
  std::int64_t total_dim_ = 1;
  std::map<int, int> link_to_reg_;
  std::map<MatterIndex, int> matter_to_reg_;
  std::vector<int> fermion_regs_;
};

class StateVector {
 public:
  explicit StateVector(std::shared_ptr<const RegisterLayout> layout);

  static StateVector basis_state(std::shared_ptr<const RegisterLayout> layout,
                                 std::int64_t index);
  static StateVector random_state(std::shared_ptr<const RegisterLayout> layout,
                                  std::mt19937_64& rng);
  // Gaussian amplitudes on the masked basis only, normalized.
  static StateVector random_masked_state(
      std::shared_ptr<const RegisterLayout> layout,
      const std::vector<std::uint8_t>& mask, std::mt19937_64& rng);

  const RegisterLayout& layout() const { return *layout_; }
  std::shared_ptr<const RegisterLayout> layout_ptr() const { return layout_; }

  std::complex<double>& amp(std::int64_t index) { return amps_[index]; }
  const std::complex<double>& amp(std::int64_t index) const {
    return amps_[index];
  }
  std::int64_t dim() const { return static_cast<std::int64_t>(amps_.size()); }

  double norm() const;
  void normalize();  // no-op on the zero vector
  void scale(std::complex<double> factor);
  // <this|other>
  std::complex<double> inner(const StateVector& other) const;
  double distance(const StateVector& other) const;

 private:
  std::shared_ptr<const RegisterLayout> layout_;
  std::vector<std::complex<double>> amps_;
};

// ---- Primitive operators ----------------------------------------------

// Flux shift W^chi on one link register: |chi'> -> |chi compose chi'>.
struct LinkShiftOp {
  int link;
  Character chi;
};

// Electric phase U^g on one link register: |chi'> -> chi'(g) |chi'>.
struct LinkPhaseOp {
  int link;
  GroupElement g;
};

enum class BosonOpKind {
  Lower,          // truncated oscillator a
  Raise,          // a^dag
  BarLower,       // antiparticle ladder on a finite-order register
  BarRaise,       // its adjoint
  Number,         // diagonal n
  PhaseN,         // diagonal exp(2*pi*i*theta*n)
  CleanShift,     // generalized X^k: cyclic mod D (finite) or isometric +k
                  // (oscillator mode; throws CutoffExceeded past the top)
  CleanShiftDag,  // adjoint of CleanShift (under-range amplitudes drop)
};

struct BosonOp {
  MatterIndex target;
  BosonOpKind kind;
  std::int64_t shift = 1;     // for CleanShift / CleanShiftDag
  RationalPhase theta{};      // for PhaseN
};

enum class FermionOpKind {
  Annihilate,  // psi (string-dressed)
  Create,      // psi^dag (string-dressed)
  Number,      // diagonal n
  PauliZ,      // diagonal (-1)^n
  PauliX,      // string-dressed occupation toggle
  PauliY,      // string-dressed i(|1><0| - |0><1|)
};

// Fermionic operators carry their Jordan-Wigner string implicitly: parity
// Z-factors on every fermion register earlier in JW (vertex) order.
struct FermionOp {
  MatterIndex target;
  FermionOpKind kind;
};

struct GlobalPhaseOp {
  RationalPhase phase;
};

using PrimitiveOp =
    std::variant<LinkShiftOp, LinkPhaseOp, BosonOp, FermionOp, GlobalPhaseOp>;
using OpSequence = std::vector<PrimitiveOp>;

// Applies one primitive / a sequence (sequence order = application order).
void apply_op(StateVector& state, const PrimitiveOp& op);
void apply_sequence(StateVector& state, const OpSequence& seq);

PrimitiveOp adjoint_op(const PrimitiveOp& op);
// Reversed order with each primitive adjointed.
OpSequence adjoint_sequence(const OpSequence& seq);

std::string to_string(const PrimitiveOp& op);
std::string to_string(const OpSequence& seq);

// ---- Gauge structure ---------------------------------------------------

// Applies the gauge transformation at vertex v with parameter g: electric
// phases U^g on outgoing and U^(g^-1) on incoming links, plus the matter
// charge phase at v (bosonic: charge(g)^n per species/mode; fermionic:
// fermion_charge(g)^(n - stagger_v)). `stagger` is required for fermionic
// matter and ignored otherwise.
void gauge_transform(StateVector& state, const Lattice& lattice, int v,
                     const GroupElement& g,
                     const std::vector<int>& stagger = {});

// 0/1 mask over the basis: 1 where every vertex charge (flux divergence
// times matter charge) is trivial. This is the support of the projector
// obtained by averaging all gauge transformations.
std::vector<std::uint8_t> gauge_invariant_mask(
    const RegisterLayout& layout, const Lattice& lattice,
    const std::vector<int>& stagger = {});

std::vector<std::int64_t> mask_indices(const std::vector<std::uint8_t>& mask);

// Projects onto the mask in place; returns the norm of the discarded part.
double project_to_mask(StateVector& state, const std::vector<std::uint8_t>& mask);

// ---- Frame conditioning ------------------------------------------------

// Conditions the tree-link registers on a group-basis frame orientation
// (map non-root vertex -> group element; absent = identity) and returns the
// reduced state over system links + matter. The input must be supported on
// the gauge-invariant mask up to `tol` (NotGaugeInvariant otherwise); for
// such inputs the reduction preserves the norm.
StateVector condition_on_frame(const StateVector& state, const Lattice& lattice,
                               const SpanningTree& tree,
                               const std::map<int, GroupElement>& orientation,
                               const std::vector<int>& stagger = {},
                               double tol = 1e-10);

}  // namespace gqec
