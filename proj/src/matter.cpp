#include "gqec/matter.hpp"

#include <sstream>

#include "gqec/exceptions.hpp"

namespace gqec {

MatterContent MatterContent::bosonic(std::vector<BosonSpecies> species) {
  if (species.empty()) {
    throw IncompatibleMatter("[matter] bosonic content needs at least one species");
  }
  for (std::size_t i = 1; i < species.size(); ++i) {
    if (species[i].charge.factors() != species[0].charge.factors()) {
      throw SpecMismatch("[matter] species charges live over different groups");
    }
  }
  for (const BosonSpecies& s : species) {
    if (s.oscillator_pair && s.cutoff < 1) {
      throw IncompatibleMatter("[matter] oscillator cutoff must be >= 1");
    }
    if (!s.oscillator_pair && s.charge.is_trivial()) {
      throw IncompatibleMatter(
          "[matter] a finite-order species needs a nontrivial charge");
    }
  }
  MatterContent out(Kind::Bosonic);
  out.species_ = std::move(species);
  return out;
}

MatterContent MatterContent::fermionic(Character fermion_charge) {
  if (fermion_charge.is_trivial()) {
    throw IncompatibleMatter("[matter] fermion charge must be nontrivial");
  }
  MatterContent out(Kind::Fermionic);
  out.fermion_charge_ = std::move(fermion_charge);
  return out;
}

const Character& MatterContent::fermion_charge() const {
  if (!fermion_charge_) {
    throw FamilyMismatch("[matter] no fermion charge: content is not fermionic");
  }
  return *fermion_charge_;
}

std::string MatterIndex::to_string() const {
  std::ostringstream out;
  out << 'v' << vertex << ",s" << species;
  if (mode) out << ",bar";
  return out.str();
}

std::string to_string(const MatterShift& shift) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [idx, k] : shift) {
    if (!first) out << ' ';
    first = false;
    out << "X[" << idx.to_string() << ':' << k << ']';
  }
  return first ? "1" : out.str();
}

std::string to_string(const MatterPhase& phase) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [idx, p] : phase) {
    if (!first) out << ' ';
    first = false;
    out << "Z[" << idx.to_string() << ':' << p.to_string() << ']';
  }
  return first ? "1" : out.str();
}

}  // namespace gqec
