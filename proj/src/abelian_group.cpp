#include "gqec/abelian_group.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gqec/exceptions.hpp"

namespace gqec {

namespace {

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

void require_same_factors(const std::vector<std::int64_t>& a,
                          const std::vector<std::int64_t>& b,
                          const char* what) {
  if (a != b) {
    throw SpecMismatch(std::string("[group] ") + what +
                       ": operands belong to different groups");
  }
}

std::string tuple_to_string(const std::vector<std::int64_t>& values) {
  if (values.size() == 1) return std::to_string(values[0]);
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << values[i];
  }
  out << ')';
  return out.str();
}

}  // namespace

RationalPhase::RationalPhase(std::int64_t num, std::int64_t den) {
  if (den == 0) throw SpecMismatch("[phase] zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  num = positive_mod(num, den);
  const std::int64_t g = std::gcd(num == 0 ? den : num, den);
  num_ = num / g;
  den_ = den / g;
  if (num_ == 0) den_ = 1;
}

RationalPhase RationalPhase::operator+(const RationalPhase& other) const {
  return RationalPhase(num_ * other.den_ + other.num_ * den_, den_ * other.den_);
}

RationalPhase RationalPhase::operator-(const RationalPhase& other) const {
  return RationalPhase(num_ * other.den_ - other.num_ * den_, den_ * other.den_);
}

RationalPhase RationalPhase::operator-() const {
  return RationalPhase(-num_, den_);
}

RationalPhase RationalPhase::times(std::int64_t k) const {
  return RationalPhase(num_ * k, den_);
}

std::complex<double> RationalPhase::to_complex() const {
  const double angle =
      2.0 * std::numbers::pi * static_cast<double>(num_) / static_cast<double>(den_);
  return {std::cos(angle), std::sin(angle)};
}

std::string RationalPhase::to_string() const {
  if (num_ == 0) return "0";
  return std::to_string(num_) + "/" + std::to_string(den_);
}

GroupSpec::GroupSpec(std::vector<std::int64_t> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) {
    throw SpecMismatch("[group] empty factor list");
  }
  order_ = 1;
  for (std::int64_t d : factors_) {
    if (d < 2) {
      throw SpecMismatch("[group] cyclic factor order must be >= 2, got " +
                         std::to_string(d));
    }
    if (order_ > (std::int64_t{1} << 62) / d) {
      throw SpecMismatch("[group] group order overflows 64-bit range");
    }
    order_ *= d;
  }
}

GroupSpec GroupSpec::parse(std::string_view text) {
  std::vector<std::int64_t> factors;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (c != 'Z' && c != 'z') {
      throw ParseError("[group] expected 'Z' at position " +
                       std::to_string(pos) + " in '" + std::string(text) + "'");
    }
    ++pos;
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr == text.data() + pos) {
      throw ParseError("[group] expected integer after 'Z' in '" +
                       std::string(text) + "'");
    }
    factors.push_back(value);
    pos = static_cast<std::size_t>(ptr - text.data());
    if (pos < text.size()) {
      if (text[pos] != 'x' && text[pos] != 'X') {
        throw ParseError("[group] expected 'x' separator in '" +
                         std::string(text) + "'");
      }
      ++pos;
      if (pos == text.size()) {
        throw ParseError("[group] trailing separator in '" + std::string(text) +
                         "'");
      }
    }
  }
  if (factors.empty()) {
    throw ParseError("[group] empty group literal");
  }
  try {
    return GroupSpec(std::move(factors));
  } catch (const SpecMismatch& err) {
    throw ParseError(err.what());
  }
}

std::string GroupSpec::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) out += 'x';
    out += 'Z';
    out += std::to_string(factors_[i]);
  }
  return out;
}

GroupElement GroupSpec::identity() const {
  return GroupElement(factors_, std::vector<std::int64_t>(rank(), 0));
}

Character GroupSpec::trivial_character() const {
  return Character(factors_, std::vector<std::int64_t>(rank(), 0));
}

GroupElement GroupSpec::element(std::vector<std::int64_t> residues) const {
  if (residues.size() != rank()) {
    throw SpecMismatch("[group] element tuple length " +
                       std::to_string(residues.size()) + " != rank " +
                       std::to_string(rank()));
  }
  for (std::size_t i = 0; i < residues.size(); ++i) {
    residues[i] = positive_mod(residues[i], factors_[i]);
  }
  return GroupElement(factors_, std::move(residues));
}

Character GroupSpec::character(std::vector<std::int64_t> exponents) const {
  if (exponents.size() != rank()) {
    throw SpecMismatch("[group] character tuple length " +
                       std::to_string(exponents.size()) + " != rank " +
                       std::to_string(rank()));
  }
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    exponents[i] = positive_mod(exponents[i], factors_[i]);
  }
  return Character(factors_, std::move(exponents));
}

GroupElement GroupSpec::factor_generator(std::size_t i) const {
  std::vector<std::int64_t> residues(rank(), 0);
  residues.at(i) = 1;
  return GroupElement(factors_, std::move(residues));
}

Character GroupSpec::dual_factor_generator(std::size_t i) const {
  std::vector<std::int64_t> exponents(rank(), 0);
  exponents.at(i) = 1;
  return Character(factors_, std::move(exponents));
}

GroupElement GroupSpec::element_at(std::int64_t index) const {
  if (index < 0 || index >= order_) {
    throw SpecMismatch("[group] element index " + std::to_string(index) +
                       " out of range [0," + std::to_string(order_) + ")");
  }
  std::vector<std::int64_t> residues(rank());
  for (std::size_t i = rank(); i-- > 0;) {
    residues[i] = index % factors_[i];
    index /= factors_[i];
  }
  return GroupElement(factors_, std::move(residues));
}

Character GroupSpec::character_at(std::int64_t index) const {
  const GroupElement g = element_at(index);
  return Character(factors_, g.residues());
}

std::int64_t GroupSpec::index_of(const GroupElement& g) const {
  require_same_factors(factors_, g.factors(), "index_of");
  std::int64_t index = 0;
  for (std::size_t i = 0; i < rank(); ++i) {
    index = index * factors_[i] + g.residues()[i];
  }
  return index;
}

std::int64_t GroupSpec::index_of(const Character& chi) const {
  require_same_factors(factors_, chi.factors(), "index_of");
  std::int64_t index = 0;
  for (std::size_t i = 0; i < rank(); ++i) {
    index = index * factors_[i] + chi.exponents()[i];
  }
  return index;
}

std::vector<GroupElement> GroupSpec::elements() const {
  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(order_));
  for (std::int64_t i = 0; i < order_; ++i) out.push_back(element_at(i));
  return out;
}

std::vector<Character> GroupSpec::characters() const {
  std::vector<Character> out;
  out.reserve(static_cast<std::size_t>(order_));
  for (std::int64_t i = 0; i < order_; ++i) out.push_back(character_at(i));
  return out;
}

bool GroupElement::is_identity() const {
  return std::all_of(residues_.begin(), residues_.end(),
                     [](std::int64_t r) { return r == 0; });
}

std::string GroupElement::to_string() const { return tuple_to_string(residues_); }

bool Character::is_trivial() const {
  return std::all_of(exponents_.begin(), exponents_.end(),
                     [](std::int64_t k) { return k == 0; });
}

std::string Character::to_string() const { return tuple_to_string(exponents_); }

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  require_same_factors(a.factors(), b.factors(), "compose");
  std::vector<std::int64_t> residues(a.residues().size());
  for (std::size_t i = 0; i < residues.size(); ++i) {
    residues[i] = (a.residues()[i] + b.residues()[i]) % a.factors()[i];
  }
  return GroupSpec(a.factors()).element(std::move(residues));
}

GroupElement inverse(const GroupElement& a) {
  std::vector<std::int64_t> residues(a.residues().size());
  for (std::size_t i = 0; i < residues.size(); ++i) {
    residues[i] = positive_mod(-a.residues()[i], a.factors()[i]);
  }
  return GroupSpec(a.factors()).element(std::move(residues));
}

GroupElement power(const GroupElement& a, std::int64_t k) {
  std::vector<std::int64_t> residues(a.residues().size());
  for (std::size_t i = 0; i < residues.size(); ++i) {
    residues[i] = positive_mod(a.residues()[i] * positive_mod(k, a.factors()[i]),
                               a.factors()[i]);
  }
  return GroupSpec(a.factors()).element(std::move(residues));
}

Character compose(const Character& a, const Character& b) {
  require_same_factors(a.factors(), b.factors(), "compose");
  std::vector<std::int64_t> exponents(a.exponents().size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    exponents[i] = (a.exponents()[i] + b.exponents()[i]) % a.factors()[i];
  }
  return GroupSpec(a.factors()).character(std::move(exponents));
}

Character conjugate(const Character& a) {
  std::vector<std::int64_t> exponents(a.exponents().size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    exponents[i] = positive_mod(-a.exponents()[i], a.factors()[i]);
  }
  return GroupSpec(a.factors()).character(std::move(exponents));
}

Character power(const Character& a, std::int64_t k) {
  std::vector<std::int64_t> exponents(a.exponents().size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    exponents[i] = positive_mod(
        a.exponents()[i] * positive_mod(k, a.factors()[i]), a.factors()[i]);
  }
  return GroupSpec(a.factors()).character(std::move(exponents));
}

RationalPhase pair_phase(const Character& chi, const GroupElement& g) {
  require_same_factors(chi.factors(), g.factors(), "pair_phase");
  RationalPhase total;
  for (std::size_t i = 0; i < chi.exponents().size(); ++i) {
    total = total +
            RationalPhase(chi.exponents()[i] * g.residues()[i], chi.factors()[i]);
  }
  return total;
}

std::int64_t element_order(const GroupElement& g) {
  std::int64_t order = 1;
  for (std::size_t i = 0; i < g.residues().size(); ++i) {
    const std::int64_t d = g.factors()[i];
    const std::int64_t r = g.residues()[i];
    const std::int64_t factor_order = d / std::gcd(d, r == 0 ? d : r);
    order = std::lcm(order, factor_order);
  }
  return order;
}

std::int64_t character_order(const Character& chi) {
  std::int64_t order = 1;
  for (std::size_t i = 0; i < chi.exponents().size(); ++i) {
    const std::int64_t d = chi.factors()[i];
    const std::int64_t k = chi.exponents()[i];
    const std::int64_t factor_order = d / std::gcd(d, k == 0 ? d : k);
    order = std::lcm(order, factor_order);
  }
  return order;
}

std::complex<double> haar_average(
    const GroupSpec& spec,
    const std::function<std::complex<double>(const GroupElement&)>& f) {
  std::complex<double> total{0.0, 0.0};
  for (std::int64_t i = 0; i < spec.order(); ++i) {
    total += f(spec.element_at(i));
  }
  return total / static_cast<double>(spec.order());
}

}  // namespace gqec
