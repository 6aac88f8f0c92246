#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gqec/abelian_group.hpp"

// Matter species attached to lattice vertices. Bosonic species are either
// finite-order (one cyclic register of dimension ord(charge) per vertex) or
// truncated oscillator pairs (two number registers per vertex: mode 0 for
// particles, mode 1 for antiparticles, each of dimension cutoff+1).
// Fermionic matter is one staggered-occupancy qubit per vertex.
namespace gqec {

inline constexpr int kDefaultOscillatorCutoff = 4;

struct BosonSpecies {
  Character charge;             // gauge charge of one particle
  bool oscillator_pair = false; // false: finite-order register
  int cutoff = kDefaultOscillatorCutoff;  // max quanta per oscillator mode

  // Local dimension of the finite-order register (= order of the charge).
  std::int64_t finite_dimension() const { return character_order(charge); }
};

class MatterContent {
 public:
  enum class Kind { None, Bosonic, Fermionic };

  static MatterContent none() { return MatterContent(Kind::None); }
  static MatterContent bosonic(std::vector<BosonSpecies> species);
  static MatterContent fermionic(Character fermion_charge);

  Kind kind() const { return kind_; }
  bool has_matter() const { return kind_ != Kind::None; }
  const std::vector<BosonSpecies>& species() const { return species_; }
  const Character& fermion_charge() const;

 private:
  explicit MatterContent(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::vector<BosonSpecies> species_;
  std::optional<Character> fermion_charge_;
};

// Addresses one matter register: vertex + species index + oscillator mode
// (mode 1 = antiparticle register of an oscillator pair, else 0). For
// fermionic matter, species and mode are 0.
struct MatterIndex {
  int vertex = 0;
  int species = 0;
  int mode = 0;
  auto operator<=>(const MatterIndex&) const = default;
  std::string to_string() const;
};

// Sparse per-register occupation shifts (X-type data): finite-order species
// shift cyclically mod D, oscillator modes shift by a nonnegative count,
// fermions toggle (value 1).
using MatterShift = std::map<MatterIndex, std::int64_t>;

// Sparse per-register diagonal phases (Z-type data): the register with
// occupation n acquires phase^(n) ... i.e. exp(2*pi*i*(p/q)*n).
using MatterPhase = std::map<MatterIndex, RationalPhase>;

std::string to_string(const MatterShift& shift);
std::string to_string(const MatterPhase& phase);

}  // namespace gqec
