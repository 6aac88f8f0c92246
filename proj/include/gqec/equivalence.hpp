#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gqec/errors.hpp"

// The correspondence between vacuum codes and pure-gauge Gauss-law codes on
// the same lattice: coarse-graining of dressed errors to bare flux
// insertions, the basis bijection T that carries one code onto the other,
// kernel diagnostics explaining when that bijection cannot exist, and a
// dense end-to-end verifier (bases, stabilizers, sections, recoveries).
namespace gqec {

// ---- Coarse-graining of dressed errors --------------------------------

// Strips the matter content of a bosonic-vacuum error, leaving the bare
// link data (flux and electric decorations) it descends to on the
// pure-gauge code. Throws FamilyMismatch for other families.
ErrorOp theta(const ErrorOp& e_vac, const CodeInstance& code_vac);

// Screens a flux pattern into a bosonic-vacuum error: at every vertex the
// occupation shifts solving charge^(shift) = conj(divergence) are added
// (IncompatibleMatter when no species combination reaches the target).
// Inverse of `theta` on dressed lines.
ErrorOp dress_flux(const WilsonLineProduct& w, const CodeInstance& code_vac);

// ---- Vacuum recovery tables -------------------------------------------

// Occupation-profile-keyed recovery table for vacuum codes: the vacuum
// analogue of Section, with the detected matter occupations as base.
struct VacuumSectionEntry {
  std::map<MatterIndex, std::int64_t> occupations;
  ErrorOp error;
  std::string label;
};

class VacuumSection {
 public:
  explicit VacuumSection(std::string label) : label_(std::move(label)) {}

  // Throws NotASection when the occupation key is already present.
  void add(VacuumSectionEntry entry);
  const VacuumSectionEntry* find(
      const std::map<MatterIndex, std::int64_t>& occupations) const;

  const std::vector<VacuumSectionEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const std::string& label() const { return label_; }

  bool truncated_base() const { return truncated_base_; }
  void mark_truncated() { truncated_base_ = true; }

 private:
  std::vector<VacuumSectionEntry> entries_;
  std::map<std::vector<std::int64_t>, std::size_t> index_;
  std::string label_;
  bool truncated_base_ = false;
};

// Dresses each flux representative of a pure-gauge section into the vacuum
// code's recovery table. Entries must be flux-only (IncompatibleError
// otherwise); the dressed occupations become the table keys.
VacuumSection dress_section(const Section& sec, const CodeInstance& code_vac);

// Strips a vacuum recovery table back to a pure-gauge section keyed by the
// divergence of each bare flux (the coarse-grained image).
Section theta_section(const VacuumSection& vsec, const CodeInstance& code_vac);

// One error/measure/recover cycle on the vacuum code: the syndrome is the
// (sharp) matter occupation profile read from the errored state's basis
// support; recovery applies the adjoint of the table representative.
RoundReport simulate_vacuum_round(const CodeInstance& code_vac,
                                  std::int64_t codeword, const ErrorOp& e,
                                  const VacuumSection& vsec);
RoundReport simulate_vacuum_round_state(const CodeInstance& code_vac,
                                        const StateVector& initial,
                                        const ErrorOp& e,
                                        const VacuumSection& vsec);

// ---- The basis bijection ----------------------------------------------

// Index bijection between the vacuum code's gauge-invariant (physical)
// basis states and the pure-gauge code's full kinematical basis: a
// physical state's link digits name the gauge-code state, and conversely
// every flux pattern admits exactly one screening occupation profile when
// the single finite species generates the dual group. Stored as index
// permutations, never as a dense matrix.
struct TMap {
  std::shared_ptr<const RegisterLayout> vacuum_layout;
  std::shared_ptr<const RegisterLayout> gauge_layout;
  // Vacuum kinematical index -> gauge index; -1 on non-physical states.
  std::vector<std::int64_t> to_gauge;
  // Gauge index -> the unique physical vacuum index over it.
  std::vector<std::int64_t> to_vacuum;

  std::int64_t apply(std::int64_t vacuum_index) const;
  std::int64_t invert(std::int64_t gauge_index) const;
};

// Builds the bijection. Requires a bosonic-vacuum code and a pure-gauge
// code over the same lattice and group (SpecMismatch), dense layouts on
// both (DimensionCap), and a single finite-order species; oscillator pairs
// or multiple species raise KernelNontrivial since distinct occupation
// profiles then induce the same flux (coarse-grain first).
TMap build_T(const CodeInstance& code_vac, const CodeInstance& code_gl);

// Searches single-vertex occupation profiles for two with equal total
// charge (the obstruction to `build_T`). Finite single species certify a
// trivial kernel; an oscillator pair yields (particle, antiparticle) =
// (1,1) vs (0,0).
struct KernelWitness {
  bool trivial = true;
  std::map<MatterIndex, std::int64_t> config_a;
  std::map<MatterIndex, std::int64_t> config_b;
  std::string to_string() const;
};

KernelWitness kernel_witness(const CodeInstance& code_vac);

// ---- End-to-end verification ------------------------------------------

struct EquivalenceCheck {
  std::string label;
  bool pass = false;
  double max_deviation = 0.0;
  std::string note;
};

struct EquivalenceReport {
  bool pass = false;
  std::vector<EquivalenceCheck> checks;
  std::string to_string() const;
};

// Dense verification that the pure-gauge code inherits the vacuum code's
// error correction through T: tree frames align, T maps code mask onto
// code mask, vacuum occupation-pinning stabilizers conjugate onto gauge
// vertex stars, every dressed section member conjugates onto its bare
// flux, and full recovery rounds commute with T on every codeword.
// Tolerance 1e-10; propagates KernelNontrivial from build_T.
EquivalenceReport verify_equivalence(const CodeInstance& code_vac,
                                     const CodeInstance& code_gl,
                                     const Section& sec);

}  // namespace gqec
