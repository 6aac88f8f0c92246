#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gqec/codes.hpp"
#include "gqec/gauss_map.hpp"
#include "gqec/hilbert.hpp"

// Error model for Gauss-law codes: composite generalized-Pauli data on links
// and matter, symbolic syndromes, exact Knill-Laflamme classification,
// maximal-set validation from sections, and round-trip recovery simulation.
namespace gqec {

// Composite error datum. As an operator it reads Z.X.W.U: electric link
// phases U^g applied first, then flux insertions W^chi, then occupation
// shifts (fermions: string-dressed toggles), then diagonal phases.
struct ErrorOp {
  explicit ErrorOp(GroupSpec group) : links(std::move(group)) {}

  WilsonLineProduct links;             // flux insertions (X-type link data)
  std::map<int, GroupElement> link_z;  // electric decorations (Z-type)
  MatterShift matter_x;                // occupation shifts / fermion toggles
  MatterPhase matter_z;                // diagonal occupation phases
  std::string label;

  bool is_identity() const;
  std::string to_string() const;
};

// Parses whitespace-separated tokens:
//   W[l:k]      flux insertion, k = character exponents (comma-separated
//               for multi-factor groups)
//   U[l:g]      electric decoration, g = element residues
//   X[v,s:k]    occupation shift (fermions: s = 0, k = 1)
//   X[v,s,-:k]  antiparticle-mode shift of an oscillator pair ("+" = mode 0)
//   Z[v,s:p/q]  diagonal phase exp(2*pi*i*(p/q)*n) (mode suffix as for X)
// "1" (or only whitespace) denotes the identity. Throws ParseError.
ErrorOp parse_error_literal(const GroupSpec& group, std::string_view text);

// Concrete primitive sequence in application order. Validates link indices,
// matter targets and occupation bounds against the code (IncompatibleError;
// SpecMismatch for foreign-group data).
OpSequence error_sequence(const ErrorOp& e, const CodeInstance& code);

// ---- Syndromes ---------------------------------------------------------

// Family-dispatched symbolic syndrome:
//   pure gauge    flux divergence (root excluded, globally neutral);
//   bosonic GL    divergence times matter shift charges, every vertex;
//   fermionic GL  per-vertex toggle bit plus base divergence charge (the
//                 label of the coarse charge-occupation measurement);
//   vacuum        occupation profile imprinted on the vacuum (the error
//                 must be gauge-invariant as a whole).
struct CodeSyndrome {
  Syndrome charges;
  std::vector<int> x_bits;                          // fermionic GL only
  std::map<MatterIndex, std::int64_t> occupations;  // vacuum families only

  bool operator==(const CodeSyndrome& other) const;
  std::vector<std::int64_t> key() const;
  std::string to_string() const;
};

CodeSyndrome syndrome_of(const ErrorOp& e, const CodeInstance& code);

// ---- Knill-Laflamme classification ------------------------------------

enum class KLOutcome { OrthogonalCorrectable, IdenticalOnCode, Violation };

struct KLVerdict {
  KLOutcome outcome = KLOutcome::OrthogonalCorrectable;
  // Violation: description of the nontrivial logical residue.
  std::string witness;
  // IdenticalOnCode: Eb acts as exp(2*pi*i*phase) times Ea on the code.
  RationalPhase relative_phase{};
  std::string to_string() const;
};

// Exact symbolic evaluation of the pairwise Knill-Laflamme condition
// Pi Ea^dag Eb Pi for the code's family. Distinct syndromes give
// OrthogonalCorrectable; equal syndromes with equal X-type data reduce to a
// diagonal residual evaluated exactly over the code basis (constant phase:
// IdenticalOnCode, else Violation); equal syndromes with differing X-type
// data leave a nontrivial logical residue (Violation). The fermionic family
// evaluates per-vertex distinguishability of the coarse measurements,
// including the occupation-conditional charge shift of toggles.
KLVerdict kl_check_pair(const ErrorOp& ea, const ErrorOp& eb,
                        const CodeInstance& code);

// ---- Error-set validation ---------------------------------------------

struct SetValidation {
  bool correctable = false;  // pairwise KL free of violations
  bool maximal = false;      // syndromes cover the enumerable base
  bool truncated_base = false;
  std::string violation_witness;  // first violating pair, when any
  std::size_t base_size = 0;
  std::size_t distinct_syndromes = 0;
};

// Pairwise KL over an explicit error list plus base-coverage check.
// IdenticalOnCode pairs are degenerate directions and stay correctable;
// they do, however, collapse onto one syndrome, so maximality counts
// distinct syndromes against the base.
SetValidation validate_error_set(const std::vector<ErrorOp>& errors,
                                 const CodeInstance& code);

// Lifts a section table to an error set. Each entry's recomputed syndrome
// must match its declared one (NotASection); the resulting set must be
// violation-free (KLViolationInside — cannot happen for a true section).
// Returns the set plus the validation summary.
struct MaxSetResult {
  std::vector<ErrorOp> errors;
  SetValidation validation;
};
MaxSetResult max_set_from_section(const Section& sec, const CodeInstance& code);

// ---- Fermionic coarse measurements ------------------------------------

// Mutual exclusivity of the coarse charge-occupation measurements labelled
// (x, base charge) at vertex v: equal toggle bits are distinguished by
// exact base-charge difference; opposite bits require the difference to
// avoid both the fermion charge and its conjugate.
bool distinguishable_at_vertex(const CodeInstance& code, int xa,
                               const Character& qa, int xb,
                               const Character& qb);

struct VertexBin {
  int x = 0;
  Character base_charge;
  std::string to_string() const;
};

// Per-vertex families of pairwise-distinguishable measurement labels,
// maximal under inclusion.
struct BinScheme {
  std::vector<std::vector<VertexBin>> vertex_bins;  // indexed by vertex
  std::string to_string() const;
};

// Enumerates all maximal schemes: vertices outside `x_support` use the
// toggle-free labels (all charges); vertices inside it range over every
// maximal family containing at least one toggled label. Throws
// BaseNotEnumerable past 4096 schemes.
std::vector<BinScheme> fermionic_bin_schemes(const CodeInstance& code,
                                             const std::vector<int>& x_support);

// Dense diagonal mask of the coarse projector at v with label (x, base
// charge): occupation 1 demands total vertex charge q*chiF^x, occupation 0
// demands q*conj(chiF)^x (an x = 1 error toggles the occupation while
// injecting flux, so the two branches see opposite charge offsets).
std::vector<std::uint8_t> coarse_projector_mask(const CodeInstance& code,
                                                int v, int x,
                                                const Character& base_charge);

// ---- Recovery simulation ----------------------------------------------

struct RoundReport {
  std::string syndrome;
  std::string recovery;
  bool success = false;
  double fidelity = 0.0;  // |<initial|final>|
  bool state_annihilated = false;
  std::string note;  // honest description of any failure mode
};

// One error/measure/recover cycle on a codeword basis state: applies the
// error, classifies the (unique) measured syndrome from the state's basis
// support, applies the adjoint of the section representative, and compares
// against the initial state at 1e-10.
RoundReport simulate_round(const CodeInstance& code, std::int64_t codeword,
                           const ErrorOp& e, const Section& sec);
RoundReport simulate_round_state(const CodeInstance& code,
                                 const StateVector& initial, const ErrorOp& e,
                                 const Section& sec);

// ---- Fermionic vacuum dressing ----------------------------------------

// Result of screening a flux pattern into a fermionic-vacuum dressed line.
// The toggle at each charged vertex is forced: an empty (even) site can
// only absorb divergence conj(chiF) via a creation, an occupied (odd)
// site only chiF via an annihilation; any other divergence would require
// an operator that annihilates the staggered vacuum.
struct FermionDressing {
  explicit FermionDressing(GroupSpec group) : dressed(std::move(group)) {}
  bool admissible = false;
  int blocking_vertex = -1;  // first vertex that cannot be screened
  ErrorOp dressed;           // flux plus forced toggles, when admissible
  std::string to_string() const;
};

// Decides admissibility of `w` as a vacuum-code dressed line and builds
// the unique dressing. Throws FamilyMismatch unless the code is the
// fermionic vacuum family, SpecMismatch on a foreign group.
FermionDressing fermionic_vacuum_admissible(const WilsonLineProduct& w,
                                            const CodeInstance& code);

}  // namespace gqec
