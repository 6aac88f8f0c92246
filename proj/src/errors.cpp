#include "gqec/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <sstream>
#include <utility>

#include "gqec/exceptions.hpp"

namespace gqec {

namespace {

// ---- shared error resolution -------------------------------------------

// Canonicalized error data checked against a concrete code: identity parts
// scrubbed, shifts reduced into their register ranges.
struct ResolvedError {
  std::map<int, GroupElement> link_z;
  MatterShift x;
  MatterPhase z;
};

// One matter register as the error model sees it: its dimension, the unit
// charge one occupation quantum carries at the vertex, and the occupation
// the vacuum pins there.
struct MatterSlot {
  MatterIndex idx;
  std::int64_t dim = 0;
  Character unit;
  int vacuum_occ = 0;
  bool oscillator = false;
};

std::vector<MatterSlot> matter_slots(const CodeInstance& code) {
  std::vector<MatterSlot> slots;
  const MatterContent& matter = code.matter();
  if (!matter.has_matter()) return slots;
  const int nv = code.lattice().num_vertices();
  for (int v = 0; v < nv; ++v) {
    if (matter.kind() == MatterContent::Kind::Bosonic) {
      const auto& species = matter.species();
      for (std::size_t s = 0; s < species.size(); ++s) {
        const BosonSpecies& sp = species[s];
        if (sp.oscillator_pair) {
          slots.push_back({MatterIndex{v, static_cast<int>(s), 0},
                           sp.cutoff + 1, sp.charge, 0, true});
          slots.push_back({MatterIndex{v, static_cast<int>(s), 1},
                           sp.cutoff + 1, conjugate(sp.charge), 0, true});
        } else {
          slots.push_back({MatterIndex{v, static_cast<int>(s), 0},
                           sp.finite_dimension(), sp.charge, 0, false});
        }
      }
    } else {
      slots.push_back({MatterIndex{v, 0, 0}, 2, matter.fermion_charge(),
                       code.stagger().at(static_cast<std::size_t>(v)), false});
    }
  }
  return slots;
}

const MatterSlot* find_slot(const std::vector<MatterSlot>& slots,
                            const MatterIndex& idx) {
  for (const MatterSlot& s : slots) {
    if (s.idx == idx) return &s;
  }
  return nullptr;
}

ResolvedError resolve_error(const ErrorOp& e, const CodeInstance& code) {
  if (!(e.links.group() == code.group())) {
    throw SpecMismatch("[errors] error group differs from the code group");
  }
  const int nl = code.lattice().num_links();
  for (int l : e.links.support()) {
    if (l < 0 || l >= nl) {
      throw IncompatibleError("[errors] flux insertion on missing link " +
                              std::to_string(l));
    }
  }

  ResolvedError out;
  for (const auto& [l, g] : e.link_z) {
    if (l < 0 || l >= nl) {
      throw IncompatibleError("[errors] electric decoration on missing link " +
                              std::to_string(l));
    }
    if (static_cast<std::size_t>(g.residues().size()) != code.group().rank()) {
      throw SpecMismatch("[errors] electric decoration from a foreign group");
    }
    if (!g.is_identity()) out.link_z.emplace(l, g);
  }

  const std::vector<MatterSlot> slots = matter_slots(code);
  if (slots.empty() && (!e.matter_x.empty() || !e.matter_z.empty())) {
    throw IncompatibleError("[errors] matter data on a matterless code");
  }
  for (const auto& [idx, k] : e.matter_x) {
    const MatterSlot* slot = find_slot(slots, idx);
    if (slot == nullptr) {
      throw IncompatibleError("[errors] occupation shift on missing register " +
                              idx.to_string());
    }
    std::int64_t kk = k;
    if (slot->oscillator) {
      if (kk < 0) {
        throw IncompatibleError(
            "[errors] oscillator shifts are non-negative; target the "
            "antiparticle mode instead of " + idx.to_string());
      }
      if (kk >= slot->dim) {
        throw OccupationOutOfRange("[errors] shift " + std::to_string(kk) +
                                   " exceeds the truncation at " +
                                   idx.to_string());
      }
    } else {
      kk = ((kk % slot->dim) + slot->dim) % slot->dim;
    }
    if (kk != 0) out.x.emplace(idx, kk);
  }
  for (const auto& [idx, ph] : e.matter_z) {
    if (find_slot(slots, idx) == nullptr) {
      throw IncompatibleError("[errors] occupation phase on missing register " +
                              idx.to_string());
    }
    if (!ph.is_zero()) out.z.emplace(idx, ph);
  }
  return out;
}

std::vector<int> toggle_bits(const ResolvedError& r, int num_vertices) {
  std::vector<int> bits(static_cast<std::size_t>(num_vertices), 0);
  for (const auto& [idx, k] : r.x) {
    if (k % 2 != 0) bits[static_cast<std::size_t>(idx.vertex)] = 1;
  }
  return bits;
}

// ---- matter-sector enumeration -----------------------------------------

constexpr std::int64_t kSectorCap = std::int64_t{1} << 20;

// Charge the occupations `occ` place at vertex v.
Character sector_charge_at(const GroupSpec& group,
                           const std::vector<MatterSlot>& slots,
                           const std::vector<std::int64_t>& occ, int v) {
  Character q = group.trivial_character();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].idx.vertex != v) continue;
    q = compose(q, power(slots[i].unit, occ[i] - slots[i].vacuum_occ));
  }
  return q;
}

// All matter occupation profiles the code contains (globally neutral ones,
// paired with the tree frame flux realizing their charge profile), reduced
// to the data the diagonal-residual evaluation needs.
struct CodeSector {
  std::vector<std::int64_t> occ;      // parallel to matter_slots
  WilsonLineProduct frame;
};

std::vector<CodeSector> enumerate_code_sectors(
    const CodeInstance& code, const std::vector<MatterSlot>& slots) {
  const GroupSpec& group = code.group();
  std::vector<CodeSector> sectors;

  if (slots.empty()) {
    sectors.push_back({{}, WilsonLineProduct(group)});
    return sectors;
  }

  if (code.is_vacuum()) {
    // Matter pinned to the vacuum occupations; flux stays divergence-free.
    std::vector<std::int64_t> occ(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      occ[i] = slots[i].vacuum_occ;
    }
    sectors.push_back({std::move(occ), WilsonLineProduct(group)});
    return sectors;
  }

  std::int64_t count = 1;
  for (const MatterSlot& s : slots) {
    if (count > kSectorCap / s.dim) {
      throw BaseNotEnumerable(
          "[errors] matter sector enumeration exceeds the cap");
    }
    count *= s.dim;
  }

  const Lattice& lat = code.lattice();
  const int nv = lat.num_vertices();
  const int root = code.tree().root();
  std::vector<std::int64_t> occ(slots.size(), 0);
  for (std::int64_t c = 0; c < count; ++c) {
    std::int64_t rem = c;
    for (std::size_t i = slots.size(); i-- > 0;) {
      occ[i] = rem % slots[i].dim;
      rem /= slots[i].dim;
    }
    Character total = group.trivial_character();
    std::vector<Character> at_vertex;
    at_vertex.reserve(static_cast<std::size_t>(nv));
    for (int v = 0; v < nv; ++v) {
      at_vertex.push_back(sector_charge_at(group, slots, occ, v));
      total = compose(total, at_vertex.back());
    }
    if (!total.is_trivial()) continue;  // no flux can close the charges up
    std::map<int, Character> charges;
    for (int v = 0; v < nv; ++v) {
      if (v == root) continue;
      if (!at_vertex[static_cast<std::size_t>(v)].is_trivial()) {
        charges.emplace(v, conjugate(at_vertex[static_cast<std::size_t>(v)]));
      }
    }
    sectors.push_back(
        {occ, frame_field(lat, code.tree(), group, charges)});
  }
  return sectors;
}

// ---- diagonal residual --------------------------------------------------

RationalPhase link_pairing(const WilsonLineProduct& flux,
                           const std::map<int, GroupElement>& d) {
  RationalPhase ph{};
  for (const auto& [l, g] : d) {
    ph = ph + pair_phase(flux.exponent(l), g);
  }
  return ph;
}

std::string shift_diff_string(const MatterShift& diff) {
  std::string out;
  for (const auto& [idx, k] : diff) {
    if (!out.empty()) out += " ";
    out += "X[" + std::to_string(idx.vertex) + "," +
           std::to_string(idx.species) + (idx.mode == 1 ? ",-" : "") + ":" +
           std::to_string(k) + "]";
  }
  return out;
}

std::string phase_diff_string(const MatterPhase& diff) {
  std::string out;
  for (const auto& [idx, ph] : diff) {
    if (!out.empty()) out += " ";
    out += "Z[" + std::to_string(idx.vertex) + "," +
           std::to_string(idx.species) + (idx.mode == 1 ? ",-" : "") + ":" +
           ph.to_string() + "]";
  }
  return out;
}

// Classifies the diagonal residual (electric decorations `d`, occupation
// phases `dz`) of a pair with matching X-type data `x`, evaluated exactly
// over the code basis.
KLVerdict diagonal_residual_verdict(const CodeInstance& code,
                                    const std::map<int, GroupElement>& d,
                                    const MatterPhase& dz,
                                    const MatterShift& x) {
  const GroupSpec& group = code.group();

  // Divergence-free flux directions: the residual must not read out any
  // holonomy sector.
  if (!d.empty()) {
    for (const WilsonLineProduct& gen :
         kernel_generators(code.lattice(), code.tree(), group)) {
      const RationalPhase ph = link_pairing(gen, d);
      if (!ph.is_zero()) {
        KLVerdict verdict;
        verdict.outcome = KLOutcome::Violation;
        verdict.witness = "diagonal residual reads holonomy sector " +
                          gen.to_string() + " (phase " + ph.to_string() + ")";
        return verdict;
      }
    }
  }

  // Matter sectors: the residual phase must be one constant across them.
  const std::vector<MatterSlot> slots = matter_slots(code);
  bool have_ref = false;
  RationalPhase ref{};
  for (const CodeSector& sector : enumerate_code_sectors(code, slots)) {
    RationalPhase ph = link_pairing(sector.frame, d);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::int64_t occ_after = sector.occ[i];
      auto xit = x.find(slots[i].idx);
      if (xit != x.end()) {
        occ_after += xit->second;
        if (slots[i].oscillator) {
          if (occ_after >= slots[i].dim) {
            KLVerdict verdict;
            verdict.outcome = KLOutcome::Violation;
            verdict.witness =
                "oscillator truncation clips the shared shift at " +
                slots[i].idx.to_string();
            return verdict;
          }
        } else {
          occ_after %= slots[i].dim;
        }
      }
      auto zit = dz.find(slots[i].idx);
      if (zit != dz.end()) ph = ph + zit->second.times(occ_after);
    }
    if (!have_ref) {
      have_ref = true;
      ref = ph;
    } else if (!(ph == ref)) {
      KLVerdict verdict;
      verdict.outcome = KLOutcome::Violation;
      verdict.witness = "diagonal residual " + phase_diff_string(dz) +
                        (dz.empty() || d.empty() ? "" : " ") +
                        (d.empty() ? "" : "U-type on links") +
                        " varies across code sectors (" + ref.to_string() +
                        " vs " + ph.to_string() + ")";
      return verdict;
    }
  }

  KLVerdict verdict;
  verdict.outcome = KLOutcome::IdenticalOnCode;
  verdict.relative_phase = ref;
  return verdict;
}

// ---- parsing helpers ----------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("[errors] bad integer '" + s + "' in " + what);
  }
}

std::vector<std::int64_t> parse_int_list(const std::string& s,
                                         const std::string& what) {
  std::vector<std::int64_t> out;
  for (const std::string& part : split(s, ',')) {
    out.push_back(parse_int(part, what));
  }
  return out;
}

RationalPhase parse_phase(const std::string& s) {
  const std::vector<std::string> parts = split(s, '/');
  if (parts.size() == 1) {
    return RationalPhase(parse_int(parts[0], "phase"), 1);
  }
  if (parts.size() == 2) {
    const std::int64_t den = parse_int(parts[1], "phase");
    if (den == 0) throw ParseError("[errors] zero denominator in phase");
    return RationalPhase(parse_int(parts[0], "phase"), den);
  }
  throw ParseError("[errors] bad phase literal '" + s + "'");
}

// Target of an X/Z token: vertex, species and optional mode suffix.
MatterIndex parse_matter_target(const std::string& s) {
  const std::vector<std::string> parts = split(s, ',');
  if (parts.size() < 2 || parts.size() > 3) {
    throw ParseError("[errors] matter target '" + s +
                     "' needs vertex,species[,mode]");
  }
  MatterIndex idx{static_cast<int>(parse_int(parts[0], "matter target")),
                  static_cast<int>(parse_int(parts[1], "matter target")), 0};
  if (parts.size() == 3) {
    if (parts[2] == "-") {
      idx.mode = 1;
    } else if (parts[2] != "+") {
      throw ParseError("[errors] matter mode must be '+' or '-', got '" +
                       parts[2] + "'");
    }
  }
  return idx;
}

}  // namespace

// ---- ErrorOp -----------------------------------------------------------

bool ErrorOp::is_identity() const {
  if (!links.is_identity()) return false;
  for (const auto& [l, g] : link_z) {
    (void)l;
    if (!g.is_identity()) return false;
  }
  for (const auto& [idx, k] : matter_x) {
    (void)idx;
    if (k != 0) return false;
  }
  for (const auto& [idx, ph] : matter_z) {
    (void)idx;
    if (!ph.is_zero()) return false;
  }
  return true;
}

std::string ErrorOp::to_string() const {
  std::string out;
  auto append = [&out](const std::string& tok) {
    if (tok.empty()) return;
    if (!out.empty()) out += " ";
    out += tok;
  };
  if (!links.is_identity()) append(links.to_string());
  for (const auto& [l, g] : link_z) {
    if (g.is_identity()) continue;
    std::string tok = "U[" + std::to_string(l) + ":";
    for (std::size_t i = 0; i < g.residues().size(); ++i) {
      if (i > 0) tok += ",";
      tok += std::to_string(g.residues()[i]);
    }
    append(tok + "]");
  }
  for (const auto& [idx, k] : matter_x) {
    if (k == 0) continue;
    append("X[" + std::to_string(idx.vertex) + "," +
           std::to_string(idx.species) + (idx.mode == 1 ? ",-" : "") + ":" +
           std::to_string(k) + "]");
  }
  for (const auto& [idx, ph] : matter_z) {
    if (ph.is_zero()) continue;
    append("Z[" + std::to_string(idx.vertex) + "," +
           std::to_string(idx.species) + (idx.mode == 1 ? ",-" : "") + ":" +
           ph.to_string() + "]");
  }
  return out.empty() ? "1" : out;
}

ErrorOp parse_error_literal(const GroupSpec& group, std::string_view text) {
  ErrorOp e(group);
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    if (token == "1") continue;
    if (token.size() < 4 || token[1] != '[' || token.back() != ']') {
      throw ParseError("[errors] unrecognized token '" + token + "'");
    }
    const char kind = token[0];
    const std::string body = token.substr(2, token.size() - 3);
    const std::vector<std::string> halves = split(body, ':');
    if (halves.size() != 2) {
      throw ParseError("[errors] token '" + token + "' needs target:value");
    }
    if (kind == 'W' || kind == 'U') {
      const int link = static_cast<int>(parse_int(halves[0], "link target"));
      const std::vector<std::int64_t> vals =
          parse_int_list(halves[1], "link value");
      if (vals.size() != group.rank()) {
        throw ParseError("[errors] token '" + token + "' needs " +
                         std::to_string(group.rank()) + " exponents");
      }
      if (kind == 'W') {
        e.links.multiply(link, group.character(vals));
      } else {
        const GroupElement g = group.element(vals);
        auto it = e.link_z.find(link);
        if (it == e.link_z.end()) {
          e.link_z.emplace(link, g);
        } else {
          it->second = compose(it->second, g);
        }
      }
    } else if (kind == 'X') {
      e.matter_x[parse_matter_target(halves[0])] +=
          parse_int(halves[1], "shift value");
    } else if (kind == 'Z') {
      const MatterIndex idx = parse_matter_target(halves[0]);
      auto it = e.matter_z.find(idx);
      if (it == e.matter_z.end()) {
        e.matter_z.emplace(idx, parse_phase(halves[1]));
      } else {
        it->second = it->second + parse_phase(halves[1]);
      }
    } else {
      throw ParseError("[errors] unrecognized token '" + token + "'");
    }
  }
  return e;
}

// ---- sequences ---------------------------------------------------------

OpSequence error_sequence(const ErrorOp& e, const CodeInstance& code) {
  const ResolvedError r = resolve_error(e, code);
  const bool fermionic = code.matter().kind() == MatterContent::Kind::Fermionic;
  OpSequence seq;
  for (const auto& [l, g] : r.link_z) seq.push_back(LinkPhaseOp{l, g});
  for (const auto& [l, chi] : e.links.exponents()) {
    seq.push_back(LinkShiftOp{l, chi});
  }
  for (const auto& [idx, k] : r.x) {
    if (fermionic) {
      seq.push_back(FermionOp{idx, FermionOpKind::PauliX});
    } else {
      seq.push_back(BosonOp{idx, BosonOpKind::CleanShift, k});
    }
  }
  for (const auto& [idx, ph] : r.z) {
    seq.push_back(BosonOp{idx, BosonOpKind::PhaseN, 0, ph});
  }
  return seq;
}

// ---- syndromes ---------------------------------------------------------

bool CodeSyndrome::operator==(const CodeSyndrome& other) const {
  return charges == other.charges && x_bits == other.x_bits &&
         occupations == other.occupations;
}

std::vector<std::int64_t> CodeSyndrome::key() const {
  std::vector<std::int64_t> k = charges.key();
  for (int b : x_bits) k.push_back(b);
  for (const auto& [idx, n] : occupations) {
    k.push_back(idx.vertex);
    k.push_back(idx.species);
    k.push_back(idx.mode);
    k.push_back(n);
  }
  return k;
}

std::string CodeSyndrome::to_string() const {
  if (!occupations.empty()) {
    std::string out;
    for (const auto& [idx, n] : occupations) {
      if (!out.empty()) out += " ";
      out += "n[" + std::to_string(idx.vertex) + "," +
             std::to_string(idx.species) + (idx.mode == 1 ? ",-" : "") + ":" +
             std::to_string(n) + "]";
    }
    return out;
  }
  std::string out;
  if (!x_bits.empty()) {
    out += "x=(";
    for (std::size_t i = 0; i < x_bits.size(); ++i) {
      if (i > 0) out += ",";
      out += std::to_string(x_bits[i]);
    }
    out += ") ";
  }
  return out + charges.to_string();
}

CodeSyndrome syndrome_of(const ErrorOp& e, const CodeInstance& code) {
  const ResolvedError r = resolve_error(e, code);
  const Lattice& lat = code.lattice();
  const int root = code.tree().root();

  switch (code.family()) {
    case CodeFamily::PureGaugeGL:
      return CodeSyndrome{
          gauss_map(e.links, lat, GaussScope::ExcludeRoot, root), {}, {}};
    case CodeFamily::BosonicGL: {
      MatterShift x = r.x;
      return CodeSyndrome{
          gauss_map_bosonic(e.links, x, code.matter(), lat, root), {}, {}};
    }
    case CodeFamily::FermionicGL: {
      return CodeSyndrome{gauss_map(e.links, lat, GaussScope::AllVertices, root),
                          toggle_bits(r, lat.num_vertices()),
                          {}};
    }
    case CodeFamily::BosonicVacuum: {
      MatterShift x = r.x;
      Syndrome net = gauss_map_bosonic(e.links, x, code.matter(), lat, root);
      if (!net.is_trivial()) {
        throw IncompatibleError(
            "[errors] vacuum-code error must be gauge-invariant; net charge " +
            net.to_string());
      }
      CodeSyndrome out{std::move(net), {}, {}};
      for (const auto& [idx, k] : r.x) out.occupations.emplace(idx, k);
      return out;
    }
    case CodeFamily::FermionicVacuum: {
      const Syndrome div = gauss_map(e.links, lat, GaussScope::AllVertices, root);
      const std::vector<int> bits = toggle_bits(r, lat.num_vertices());
      const Character& chi_f = code.matter().fermion_charge();
      std::vector<Character> net;
      for (int v = 0; v < lat.num_vertices(); ++v) {
        const int c = code.stagger().at(static_cast<std::size_t>(v));
        // A toggle moves the vacuum occupation c -> 1-c, carrying chiF^(1-2c).
        Character q = div.charge(v);
        if (bits[static_cast<std::size_t>(v)] == 1) {
          q = compose(q, power(chi_f, 1 - 2 * c));
        }
        if (!q.is_trivial()) {
          throw IncompatibleError(
              "[errors] vacuum-code error must be gauge-invariant; residual "
              "charge at vertex " + std::to_string(v));
        }
        net.push_back(q);
      }
      CodeSyndrome out{
          Syndrome(code.group(), std::move(net), GaussScope::AllVertices, root),
          {},
          {}};
      for (int v = 0; v < lat.num_vertices(); ++v) {
        if (bits[static_cast<std::size_t>(v)] == 1) {
          const int c = code.stagger().at(static_cast<std::size_t>(v));
          out.occupations.emplace(MatterIndex{v, 0, 0}, 1 - c);
        }
      }
      return out;
    }
  }
  throw FamilyMismatch("[errors] unknown code family");
}

// ---- Knill-Laflamme ----------------------------------------------------

std::string KLVerdict::to_string() const {
  switch (outcome) {
    case KLOutcome::OrthogonalCorrectable:
      return "orthogonal";
    case KLOutcome::IdenticalOnCode:
      return "identical (phase " + relative_phase.to_string() + ")";
    case KLOutcome::Violation:
      return "violation: " + witness;
  }
  return "?";
}

KLVerdict kl_check_pair(const ErrorOp& ea, const ErrorOp& eb,
                        const CodeInstance& code) {
  const ResolvedError ra = resolve_error(ea, code);
  const ResolvedError rb = resolve_error(eb, code);
  const CodeSyndrome sa = syndrome_of(ea, code);
  const CodeSyndrome sb = syndrome_of(eb, code);

  if (code.family() == CodeFamily::FermionicGL) {
    // Coarse charge-occupation measurements distinguish the pair as soon as
    // one vertex does.
    const int nv = code.lattice().num_vertices();
    bool any = false;
    for (int v = 0; v < nv && !any; ++v) {
      any = distinguishable_at_vertex(
          code, sa.x_bits[static_cast<std::size_t>(v)], sa.charges.charge(v),
          sb.x_bits[static_cast<std::size_t>(v)], sb.charges.charge(v));
    }
    if (any) return KLVerdict{KLOutcome::OrthogonalCorrectable, "", {}};
    if (sa.x_bits != sb.x_bits) {
      int v = 0;
      while (sa.x_bits[static_cast<std::size_t>(v)] ==
             sb.x_bits[static_cast<std::size_t>(v)]) {
        ++v;
      }
      KLVerdict verdict;
      verdict.outcome = KLOutcome::Violation;
      verdict.witness =
          "confusable charge-toggle residual at vertex " + std::to_string(v) +
          " (charge defect matches the fermion charge)";
      return verdict;
    }
  } else if (!(sa == sb)) {
    return KLVerdict{KLOutcome::OrthogonalCorrectable, "", {}};
  }

  // Equal syndromes. Any X-type mismatch leaves a logical residue.
  MatterShift dx;
  {
    const std::vector<MatterSlot> slots = matter_slots(code);
    std::map<MatterIndex, std::int64_t> diff;
    for (const auto& [idx, k] : rb.x) diff[idx] += k;
    for (const auto& [idx, k] : ra.x) diff[idx] -= k;
    for (const auto& [idx, k] : diff) {
      if (k == 0) continue;
      const MatterSlot* slot = find_slot(slots, idx);
      std::int64_t kk = k;
      if (!slot->oscillator) kk = ((kk % slot->dim) + slot->dim) % slot->dim;
      if (kk != 0) dx.emplace(idx, kk);
    }
  }
  const WilsonLineProduct kappa = ea.links.adjoint().times(eb.links);
  if (!dx.empty()) {
    KLVerdict verdict;
    verdict.outcome = KLOutcome::Violation;
    verdict.witness = "dressed occupation residual " + shift_diff_string(dx);
    if (!kappa.is_identity()) {
      verdict.witness += " with flux " + kappa.to_string();
    }
    return verdict;
  }
  if (!kappa.is_identity()) {
    // Equal syndromes and equal shifts put the flux residual in the Gauss
    // kernel: a product of system holonomies, i.e. a logical operator.
    KLVerdict verdict;
    verdict.outcome = KLOutcome::Violation;
    verdict.witness = "system holonomy residual " + kappa.to_string();
    return verdict;
  }

  // Purely diagonal residual.
  std::map<int, GroupElement> d;
  {
    std::map<int, GroupElement> diff;
    for (const auto& [l, g] : rb.link_z) diff.emplace(l, g);
    for (const auto& [l, g] : ra.link_z) {
      auto it = diff.find(l);
      if (it == diff.end()) {
        diff.emplace(l, inverse(g));
      } else {
        it->second = compose(it->second, inverse(g));
      }
    }
    for (const auto& [l, g] : diff) {
      if (!g.is_identity()) d.emplace(l, g);
    }
  }
  MatterPhase dz;
  {
    MatterPhase diff;
    for (const auto& [idx, ph] : rb.z) diff[idx] = ph;
    for (const auto& [idx, ph] : ra.z) {
      auto it = diff.find(idx);
      if (it == diff.end()) {
        diff[idx] = -ph;
      } else {
        it->second = it->second + (-ph);
      }
    }
    for (const auto& [idx, ph] : diff) {
      if (!ph.is_zero()) dz.emplace(idx, ph);
    }
  }
  return diagonal_residual_verdict(code, d, dz, ra.x);
}

// ---- error-set validation ----------------------------------------------

SetValidation validate_error_set(const std::vector<ErrorOp>& errors,
                                 const CodeInstance& code) {
  SetValidation out;
  out.correctable = true;

  std::map<std::vector<std::int64_t>, std::size_t> seen;
  for (const ErrorOp& e : errors) {
    seen.emplace(syndrome_of(e, code).key(), seen.size());
  }
  out.distinct_syndromes = seen.size();

  for (std::size_t i = 0; i < errors.size() && out.correctable; ++i) {
    for (std::size_t j = i + 1; j < errors.size(); ++j) {
      const KLVerdict verdict = kl_check_pair(errors[i], errors[j], code);
      if (verdict.outcome == KLOutcome::Violation) {
        out.correctable = false;
        const std::string la =
            errors[i].label.empty() ? errors[i].to_string() : errors[i].label;
        const std::string lb =
            errors[j].label.empty() ? errors[j].to_string() : errors[j].label;
        out.violation_witness =
            la + " vs " + lb + ": " + verdict.witness;
        break;
      }
    }
  }

  std::vector<Syndrome> base;
  switch (code.family()) {
    case CodeFamily::PureGaugeGL:
      base = enumerate_pure_base(code.group(), code.lattice(),
                                 code.tree().root());
      break;
    case CodeFamily::BosonicGL:
      base = enumerate_bosonic_base(code.group(), code.lattice(), code.matter(),
                                    code.tree().root());
      break;
    default:
      throw IncompatibleError(
          "[errors] base coverage is defined for the pure and bosonic "
          "Gauss-law families");
  }
  out.base_size = base.size();
  if (out.correctable) {
    std::size_t covered = 0;
    for (const Syndrome& s : base) {
      const CodeSyndrome wrapped{s, {}, {}};
      if (seen.count(wrapped.key()) > 0) ++covered;
    }
    out.maximal = covered == base.size() && out.distinct_syndromes == covered;
  }
  return out;
}

MaxSetResult max_set_from_section(const Section& sec,
                                  const CodeInstance& code) {
  MaxSetResult result;
  for (const SectionEntry& entry : sec.entries()) {
    ErrorOp e(code.group());
    e.links = entry.links;
    e.matter_x = entry.matter_x;
    e.label = entry.label;
    const CodeSyndrome realized = syndrome_of(e, code);
    if (!(realized.charges == entry.syndrome)) {
      throw NotASection("[errors] entry '" + entry.label +
                        "' declares syndrome " + entry.syndrome.to_string() +
                        " but realizes " + realized.charges.to_string());
    }
    result.errors.push_back(std::move(e));
  }
  result.validation = validate_error_set(result.errors, code);
  result.validation.truncated_base = sec.truncated_base();
  if (!result.validation.correctable) {
    throw KLViolationInside("[errors] section '" + sec.label() +
                            "' contains a violating pair: " +
                            result.validation.violation_witness);
  }
  return result;
}

// ---- fermionic coarse measurements -------------------------------------

bool distinguishable_at_vertex(const CodeInstance& code, int xa,
                               const Character& qa, int xb,
                               const Character& qb) {
  if (code.matter().kind() != MatterContent::Kind::Fermionic) {
    throw FamilyMismatch(
        "[errors] coarse charge-occupation bins need fermionic matter");
  }
  const Character diff = compose(conjugate(qa), qb);
  if (xa == xb) return !diff.is_trivial();
  const Character& chi_f = code.matter().fermion_charge();
  return !(diff == chi_f) && !(diff == conjugate(chi_f));
}

std::string VertexBin::to_string() const {
  std::string out = "(x=" + std::to_string(x) + ",q=";
  for (std::size_t i = 0; i < base_charge.exponents().size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(base_charge.exponents()[i]);
  }
  return out + ")";
}

std::string BinScheme::to_string() const {
  std::string out;
  for (std::size_t v = 0; v < vertex_bins.size(); ++v) {
    if (v > 0) out += " ";
    out += "v" + std::to_string(v) + ":{";
    for (std::size_t i = 0; i < vertex_bins[v].size(); ++i) {
      if (i > 0) out += ",";
      out += vertex_bins[v][i].to_string();
    }
    out += "}";
  }
  return out;
}

namespace {

void bron_kerbosch(std::uint64_t r, std::uint64_t p, std::uint64_t x,
                   const std::vector<std::uint64_t>& adj,
                   std::vector<std::uint64_t>& out) {
  if (p == 0 && x == 0) {
    out.push_back(r);
    return;
  }
  std::uint64_t rest = p;
  while (rest != 0) {
    const int v = std::countr_zero(rest);
    const std::uint64_t bit = std::uint64_t{1} << v;
    rest &= ~bit;
    bron_kerbosch(r | bit, p & adj[static_cast<std::size_t>(v)],
                  x & adj[static_cast<std::size_t>(v)], adj, out);
    p &= ~bit;
    x |= bit;
  }
}

}  // namespace

std::vector<BinScheme> fermionic_bin_schemes(
    const CodeInstance& code, const std::vector<int>& x_support) {
  if (code.family() != CodeFamily::FermionicGL) {
    throw FamilyMismatch(
        "[errors] bin schemes address the fermionic Gauss-law family");
  }
  const GroupSpec& group = code.group();
  const int order = static_cast<int>(group.order());
  if (2 * order > 64) {
    throw BaseNotEnumerable("[errors] dual group too large to enumerate bins");
  }
  const int nv = code.lattice().num_vertices();
  std::vector<int> support = x_support;
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  for (int v : support) {
    if (v < 0 || v >= nv) {
      throw IncompatibleError("[errors] bin support names missing vertex " +
                              std::to_string(v));
    }
  }

  // Distinguishability graph on labels (x, q); identical at every vertex.
  const int n = 2 * order;
  auto node_bin = [&](int node) {
    return VertexBin{node / order, group.character_at(node % order)};
  };
  std::vector<std::uint64_t> adj(static_cast<std::size_t>(n), 0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const VertexBin ba = node_bin(a);
      const VertexBin bb = node_bin(b);
      if (distinguishable_at_vertex(code, ba.x, ba.base_charge, bb.x,
                                    bb.base_charge)) {
        adj[static_cast<std::size_t>(a)] |= std::uint64_t{1} << b;
        adj[static_cast<std::size_t>(b)] |= std::uint64_t{1} << a;
      }
    }
  }
  std::vector<std::uint64_t> cliques;
  const std::uint64_t all =
      n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  bron_kerbosch(0, all, 0, adj, cliques);

  const std::uint64_t toggle_mask = ((std::uint64_t{1} << order) - 1) << order;
  std::vector<std::uint64_t> with_toggle;
  std::uint64_t uniform0 = 0;
  for (std::uint64_t c : cliques) {
    if ((c & toggle_mask) != 0) {
      with_toggle.push_back(c);
    } else if (std::popcount(c) == order) {
      uniform0 = c;
    }
  }

  auto clique_bins = [&](std::uint64_t c) {
    std::vector<VertexBin> bins;
    for (int node = 0; node < n; ++node) {
      if ((c >> node) & 1) bins.push_back(node_bin(node));
    }
    return bins;
  };

  std::vector<std::size_t> choice_count(static_cast<std::size_t>(nv), 1);
  std::size_t total = 1;
  for (int v : support) {
    choice_count[static_cast<std::size_t>(v)] = with_toggle.size();
    if (total > 4096 / std::max<std::size_t>(with_toggle.size(), 1)) {
      throw BaseNotEnumerable("[errors] bin scheme enumeration exceeds 4096");
    }
    total *= with_toggle.size();
  }

  std::vector<BinScheme> schemes;
  std::vector<std::size_t> pick(static_cast<std::size_t>(nv), 0);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    for (int v = nv - 1; v >= 0; --v) {
      const std::size_t cc = choice_count[static_cast<std::size_t>(v)];
      pick[static_cast<std::size_t>(v)] = rem % cc;
      rem /= cc;
    }
    BinScheme scheme;
    scheme.vertex_bins.resize(static_cast<std::size_t>(nv));
    for (int v = 0; v < nv; ++v) {
      const bool in_support =
          std::binary_search(support.begin(), support.end(), v);
      scheme.vertex_bins[static_cast<std::size_t>(v)] = clique_bins(
          in_support ? with_toggle[pick[static_cast<std::size_t>(v)]]
                     : uniform0);
    }
    schemes.push_back(std::move(scheme));
  }
  return schemes;
}

std::vector<std::uint8_t> coarse_projector_mask(const CodeInstance& code,
                                                int v, int x,
                                                const Character& base_charge) {
  if (code.family() != CodeFamily::FermionicGL) {
    throw FamilyMismatch(
        "[errors] coarse projectors address the fermionic Gauss-law family");
  }
  if (x != 0 && x != 1) {
    throw IncompatibleError("[errors] toggle label must be 0 or 1");
  }
  const Lattice& lat = code.lattice();
  if (v < 0 || v >= lat.num_vertices()) {
    throw IncompatibleError("[errors] coarse projector at missing vertex " +
                            std::to_string(v));
  }
  const GroupSpec& group = code.group();
  if (base_charge.exponents().size() != group.rank()) {
    throw SpecMismatch("[errors] base charge from a foreign group");
  }
  const auto layout = code.layout();
  const Character& chi_f = code.matter().fermion_charge();
  const int c = code.stagger().at(static_cast<std::size_t>(v));
  const int fermion_reg = layout->matter_register(MatterIndex{v, 0, 0});

  // Per-branch demanded total charge: an x = 1 error raises the occupation
  // (carrying chiF) or lowers it (carrying conj(chiF)).
  const Character demand_occ1 =
      x == 1 ? compose(base_charge, chi_f) : base_charge;
  const Character demand_occ0 =
      x == 1 ? compose(base_charge, conjugate(chi_f)) : base_charge;

  const std::int64_t dim = layout->total_dim();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(dim), 0);
  for (std::int64_t i = 0; i < dim; ++i) {
    Character h = group.trivial_character();
    for (int l : lat.out_links(v)) {
      h = compose(h, group.character_at(
                         layout->digit(i, layout->link_register(l))));
    }
    for (int l : lat.in_links(v)) {
      h = compose(h, conjugate(group.character_at(
                         layout->digit(i, layout->link_register(l)))));
    }
    const std::int64_t n = layout->digit(i, fermion_reg);
    h = compose(h, power(chi_f, n - c));
    const Character& demand = n == 1 ? demand_occ1 : demand_occ0;
    if (h == demand) mask[static_cast<std::size_t>(i)] = 1;
  }
  return mask;
}

// ---- recovery simulation -----------------------------------------------

namespace {

// Total charge (flux divergence times matter charge) a basis index carries
// at vertex v, in the convention the gauge-invariance mask uses.
Character measured_charge(const CodeInstance& code,
                          const std::vector<MatterSlot>& slots,
                          std::int64_t index, int v) {
  const auto layout = code.layout();
  const GroupSpec& group = code.group();
  const Lattice& lat = code.lattice();
  Character h = group.trivial_character();
  for (int l : lat.out_links(v)) {
    h = compose(h, group.character_at(
                       layout->digit(index, layout->link_register(l))));
  }
  for (int l : lat.in_links(v)) {
    h = compose(h, conjugate(group.character_at(
                       layout->digit(index, layout->link_register(l)))));
  }
  for (const MatterSlot& s : slots) {
    if (s.idx.vertex != v) continue;
    const std::int64_t n = layout->digit(index, layout->matter_register(s.idx));
    h = compose(h, power(s.unit, n - s.vacuum_occ));
  }
  return h;
}

}  // namespace

RoundReport simulate_round_state(const CodeInstance& code,
                                 const StateVector& initial, const ErrorOp& e,
                                 const Section& sec) {
  if (code.family() != CodeFamily::PureGaugeGL &&
      code.family() != CodeFamily::BosonicGL) {
    throw IncompatibleError(
        "[errors] section recovery simulation covers the pure and bosonic "
        "Gauss-law families");
  }
  const auto layout = code.layout();
  const auto& mask = code.code_mask();
  const std::int64_t dim = layout->total_dim();
  for (std::int64_t i = 0; i < dim; ++i) {
    if (std::abs(initial.amp(i)) > 1e-12 && mask[static_cast<std::size_t>(i)] == 0) {
      throw IncompatibleError(
          "[errors] simulation input leaves the code space");
    }
  }

  RoundReport report;
  StateVector state = initial;
  apply_sequence(state, error_sequence(e, code));
  if (state.norm() < 1e-12) {
    report.state_annihilated = true;
    report.note = "error annihilated the state";
    return report;
  }

  // The errored state is charge-sharp: classify its syndrome from any basis
  // support, verifying sharpness across the support.
  const std::vector<MatterSlot> slots = matter_slots(code);
  const GaussScope scope = code.family() == CodeFamily::PureGaugeGL
                               ? GaussScope::ExcludeRoot
                               : GaussScope::AllVertices;
  const int nv = code.lattice().num_vertices();
  std::optional<Syndrome> measured;
  for (std::int64_t i = 0; i < dim; ++i) {
    if (std::abs(state.amp(i)) <= 1e-12) continue;
    std::vector<Character> charges;
    charges.reserve(static_cast<std::size_t>(nv));
    for (int v = 0; v < nv; ++v) {
      charges.push_back(measured_charge(code, slots, i, v));
    }
    Syndrome here(code.group(), std::move(charges), scope, code.tree().root());
    if (!measured.has_value()) {
      measured = std::move(here);
    } else if (!(*measured == here)) {
      report.note = "syndrome measurement is not sharp on the errored state";
      return report;
    }
  }
  report.syndrome = measured->to_string();

  const SectionEntry* entry = sec.find(*measured);
  if (entry == nullptr) {
    report.note = "measured syndrome missing from section '" + sec.label() + "'";
    return report;
  }
  report.recovery = entry->label.empty() ? "(unlabelled)" : entry->label;

  ErrorOp recovery(code.group());
  recovery.links = entry->links;
  recovery.matter_x = entry->matter_x;
  apply_sequence(state, adjoint_sequence(error_sequence(recovery, code)));

  report.fidelity = std::abs(initial.inner(state));
  report.success = initial.distance(state) <= 1e-10;
  if (!report.success) {
    if (std::abs(report.fidelity - 1.0) < 1e-9) {
      report.note = "recovered up to a global phase";
    } else {
      report.note = "logical failure: recovered state differs from the input";
    }
  }
  return report;
}

RoundReport simulate_round(const CodeInstance& code, std::int64_t codeword,
                           const ErrorOp& e, const Section& sec) {
  const auto layout = code.layout();
  if (codeword < 0 || codeword >= layout->total_dim() ||
      code.code_mask()[static_cast<std::size_t>(codeword)] == 0) {
    throw IncompatibleError("[errors] index " + std::to_string(codeword) +
                            " is not a codeword");
  }
  return simulate_round_state(
      code, StateVector::basis_state(layout, codeword), e, sec);
}

std::string FermionDressing::to_string() const {
  if (!admissible) {
    return "inadmissible at vertex " + std::to_string(blocking_vertex);
  }
  return "dressed " + dressed.to_string();
}

FermionDressing fermionic_vacuum_admissible(const WilsonLineProduct& w,
                                            const CodeInstance& code) {
  if (code.family() != CodeFamily::FermionicVacuum) {
    throw FamilyMismatch(
        "[errors] vacuum dressing addresses the fermionic vacuum family");
  }
  if (!(w.group() == code.group())) {
    throw SpecMismatch("[errors] flux pattern over a foreign group");
  }
  const Lattice& lat = code.lattice();
  const Syndrome div =
      gauss_map(w, lat, GaussScope::AllVertices, code.tree().root());
  const Character& chi_f = code.matter().fermion_charge();

  FermionDressing out(code.group());
  out.dressed.links = w;
  for (int v = 0; v < lat.num_vertices(); ++v) {
    const Character& q = div.charge(v);
    if (q.is_trivial()) continue;
    const int c = code.stagger().at(static_cast<std::size_t>(v));
    // Screening toggle charge: creation chiF on empty sites, annihilation
    // conj(chiF) on occupied ones; the divergence must be its inverse.
    const Character required = power(chi_f, c == 0 ? -1 : 1);
    if (!(q == required)) {
      out.admissible = false;
      out.blocking_vertex = v;
      return out;
    }
    out.dressed.matter_x[MatterIndex{v, 0, 0}] = 1;
  }
  out.admissible = true;
  out.blocking_vertex = -1;
  return out;
}

}  // namespace gqec
