#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

// Finite abelian groups presented as products of cyclic factors
// Z_{D_0} x Z_{D_1} x ... together with their character groups.
//
// Elements are residue tuples (one residue per factor, always reduced into
// [0, D_i)); characters are exponent tuples with the pairing
//   <chi, g> = sum_i k_i * g_i / D_i   (in turns, i.e. the phase is
//   exp(2*pi*i*<chi,g>)).
// Both carry a copy of the factor list so arithmetic between operands from
// different groups is detected rather than silently misinterpreted.
namespace gqec {

// An exact phase, stored as a reduced fraction of a full turn:
// value = exp(2*pi*i * num/den), with den >= 1 and 0 <= num < den.
class RationalPhase {
 public:
  RationalPhase() : num_(0), den_(1) {}
  RationalPhase(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  RationalPhase operator+(const RationalPhase& other) const;
  RationalPhase operator-(const RationalPhase& other) const;
  RationalPhase operator-() const;
  RationalPhase times(std::int64_t k) const;
  bool operator==(const RationalPhase& other) const = default;

  std::complex<double> to_complex() const;
  std::string to_string() const;  // "p/q" in turns

 private:
  std::int64_t num_;
  std::int64_t den_;
};

class GroupElement;
class Character;

// Immutable description of a finite abelian group as a product of cyclic
// factors, each of order >= 2. Doubles as the factory for elements,
// characters and their index enumerations (mixed-radix, factor 0 slowest).
class GroupSpec {
 public:
  explicit GroupSpec(std::vector<std::int64_t> factors);

  // Parses literals like "Z2", "z6", "Z3xZ2" (case-insensitive, 'x'
  // separated). Throws ParseError on malformed input.
  static GroupSpec parse(std::string_view text);

  const std::vector<std::int64_t>& factors() const { return factors_; }
  std::size_t rank() const { return factors_.size(); }
  std::int64_t order() const { return order_; }
  std::string to_string() const;

  bool operator==(const GroupSpec& other) const = default;

  GroupElement identity() const;
  Character trivial_character() const;

  // Construct with validation; residues/exponents are reduced mod D_i.
  GroupElement element(std::vector<std::int64_t> residues) const;
  Character character(std::vector<std::int64_t> exponents) const;

  // Generator of factor i (residue/exponent 1 in slot i).
  GroupElement factor_generator(std::size_t i) const;
  Character dual_factor_generator(std::size_t i) const;

  // Mixed-radix enumeration, index in [0, order()).
  GroupElement element_at(std::int64_t index) const;
  Character character_at(std::int64_t index) const;
  std::int64_t index_of(const GroupElement& g) const;
  std::int64_t index_of(const Character& chi) const;

  std::vector<GroupElement> elements() const;
  std::vector<Character> characters() const;

 private:
  std::vector<std::int64_t> factors_;
  std::int64_t order_;
};

// Group element: residue tuple plus the factor list it lives over.
class GroupElement {
 public:
  const std::vector<std::int64_t>& residues() const { return residues_; }
  const std::vector<std::int64_t>& factors() const { return factors_; }
  bool is_identity() const;
  std::string to_string() const;  // "(a,b,...)" or "a" for rank 1
  bool operator==(const GroupElement& other) const = default;

 private:
  friend class GroupSpec;
  GroupElement(std::vector<std::int64_t> factors,
               std::vector<std::int64_t> residues)
      : factors_(std::move(factors)), residues_(std::move(residues)) {}

  std::vector<std::int64_t> factors_;
  std::vector<std::int64_t> residues_;
};

// Character: exponent tuple over the dual group (same cyclic orders).
class Character {
 public:
  const std::vector<std::int64_t>& exponents() const { return exponents_; }
  const std::vector<std::int64_t>& factors() const { return factors_; }
  bool is_trivial() const;
  std::string to_string() const;
  bool operator==(const Character& other) const = default;

 private:
  friend class GroupSpec;
  Character(std::vector<std::int64_t> factors,
            std::vector<std::int64_t> exponents)
      : factors_(std::move(factors)), exponents_(std::move(exponents)) {}

  std::vector<std::int64_t> factors_;
  std::vector<std::int64_t> exponents_;
};

// Group operations. All throw SpecMismatch if the operands' factor lists
// differ.
GroupElement compose(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& a);
GroupElement power(const GroupElement& a, std::int64_t k);
Character compose(const Character& a, const Character& b);
Character conjugate(const Character& a);  // the inverse character
Character power(const Character& a, std::int64_t k);

// Exact evaluation of chi(g) as a fraction of a turn.
RationalPhase pair_phase(const Character& chi, const GroupElement& g);

std::int64_t element_order(const GroupElement& g);
std::int64_t character_order(const Character& chi);

// Uniform average (1/|G|) sum_g f(g).
std::complex<double> haar_average(
    const GroupSpec& spec,
    const std::function<std::complex<double>(const GroupElement&)>& f);

}  // namespace gqec
