#include "gqec/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

#include "gqec/exceptions.hpp"

namespace gqec {

namespace {

void require_bosonic_vacuum(const CodeInstance& code, const char* what) {
  if (code.family() != CodeFamily::BosonicVacuum) {
    throw FamilyMismatch(std::string("[equivalence] ") + what +
                         " addresses the bosonic vacuum family");
  }
}

std::vector<std::int64_t> occupation_key(
    const std::map<MatterIndex, std::int64_t>& occ) {
  std::vector<std::int64_t> key;
  key.reserve(occ.size() * 4);
  for (const auto& [idx, k] : occ) {
    key.push_back(idx.vertex);
    key.push_back(idx.species);
    key.push_back(idx.mode);
    key.push_back(k);
  }
  return key;
}

std::string occupation_string(const std::map<MatterIndex, std::int64_t>& occ) {
  if (occ.empty()) return "vacuum";
  std::string out;
  for (const auto& [idx, k] : occ) {
    if (!out.empty()) out += " ";
    out += "n[" + std::to_string(idx.vertex) + "," +
           std::to_string(idx.species) + (idx.mode == 1 ? ",-" : "") + ":" +
           std::to_string(k) + "]";
  }
  return out;
}

// Occupation profile of one basis state (nonzero matter digits only).
std::map<MatterIndex, std::int64_t> state_occupations(
    const RegisterLayout& layout, std::int64_t index) {
  std::map<MatterIndex, std::int64_t> occ;
  for (int r = 0; r < layout.num_registers(); ++r) {
    const RegisterInfo& info = layout.reg(r);
    if (info.type == RegisterInfo::Type::Link) continue;
    const std::int64_t n = layout.digit(index, r);
    if (n != 0) occ.emplace(info.matter, n);
  }
  return occ;
}

// Eigenvalue of a diagonal sequence on one basis state.
std::complex<double> diagonal_eigenvalue(
    std::shared_ptr<const RegisterLayout> layout, const OpSequence& seq,
    std::int64_t index) {
  StateVector s = StateVector::basis_state(layout, index);
  apply_sequence(s, seq);
  return s.amp(index);
}

// The matter charge phase at a vertex: the occupation-pinning stabilizer
// content of the vacuum code, exp(2 pi i <charge(g), n_part - n_anti>).
OpSequence charge_phase_sequence(const CodeInstance& code, int v,
                                 const GroupElement& g) {
  OpSequence seq;
  const auto& species = code.matter().species();
  for (std::size_t s = 0; s < species.size(); ++s) {
    const RationalPhase theta = pair_phase(species[s].charge, g);
    seq.push_back(BosonOp{MatterIndex{v, static_cast<int>(s), 0},
                          BosonOpKind::PhaseN, 1, theta});
    if (species[s].oscillator_pair) {
      seq.push_back(BosonOp{MatterIndex{v, static_cast<int>(s), 1},
                            BosonOpKind::PhaseN, 1, theta.times(-1)});
    }
  }
  return seq;
}

}  // namespace

ErrorOp theta(const ErrorOp& e_vac, const CodeInstance& code_vac) {
  require_bosonic_vacuum(code_vac, "coarse-graining");
  if (!(e_vac.links.group() == code_vac.group())) {
    throw SpecMismatch("[equivalence] error over a foreign group");
  }
  ErrorOp out(code_vac.group());
  out.links = e_vac.links;
  out.link_z = e_vac.link_z;
  out.label = e_vac.label;
  return out;
}

ErrorOp dress_flux(const WilsonLineProduct& w, const CodeInstance& code_vac) {
  require_bosonic_vacuum(code_vac, "flux dressing");
  if (!(w.group() == code_vac.group())) {
    throw SpecMismatch("[equivalence] flux pattern over a foreign group");
  }
  const Lattice& lat = code_vac.lattice();
  const Syndrome div =
      gauss_map(w, lat, GaussScope::AllVertices, code_vac.tree().root());
  ErrorOp out(code_vac.group());
  out.links = w;
  for (int v = 0; v < lat.num_vertices(); ++v) {
    const Character target = conjugate(div.charge(v));
    if (target.is_trivial()) continue;
    const auto shift = solve_charge_as_shifts(code_vac.matter(), v, target);
    if (!shift.has_value()) {
      throw IncompatibleMatter(
          "[equivalence] no occupation shift screens the divergence at "
          "vertex " + std::to_string(v));
    }
    for (const auto& [idx, k] : *shift) out.matter_x[idx] += k;
  }
  return out;
}

void VacuumSection::add(VacuumSectionEntry entry) {
  const auto key = occupation_key(entry.occupations);
  if (index_.count(key) != 0) {
    throw NotASection("[equivalence] duplicate occupation profile " +
                      occupation_string(entry.occupations) + " in table '" +
                      label_ + "'");
  }
  index_.emplace(key, entries_.size());
  entries_.push_back(std::move(entry));
}

const VacuumSectionEntry* VacuumSection::find(
    const std::map<MatterIndex, std::int64_t>& occupations) const {
  const auto it = index_.find(occupation_key(occupations));
  if (it == index_.end()) return nullptr;
  return &entries_[it->second];
}

VacuumSection dress_section(const Section& sec, const CodeInstance& code_vac) {
  require_bosonic_vacuum(code_vac, "section dressing");
  VacuumSection out(sec.label());
  for (const SectionEntry& entry : sec.entries()) {
    if (!entry.matter_x.empty()) {
      throw IncompatibleError(
          "[equivalence] only flux-only sections can be dressed");
    }
    VacuumSectionEntry dressed{{}, dress_flux(entry.links, code_vac),
                               entry.label};
    dressed.occupations = syndrome_of(dressed.error, code_vac).occupations;
    out.add(std::move(dressed));
  }
  if (sec.truncated_base()) out.mark_truncated();
  return out;
}

Section theta_section(const VacuumSection& vsec, const CodeInstance& code_vac) {
  require_bosonic_vacuum(code_vac, "section coarse-graining");
  Section out(vsec.label());
  for (const VacuumSectionEntry& entry : vsec.entries()) {
    const ErrorOp stripped = theta(entry.error, code_vac);
    out.add(SectionEntry{
        gauss_map(stripped.links, code_vac.lattice(), GaussScope::ExcludeRoot,
                  code_vac.tree().root()),
        stripped.links,
        {},
        entry.label});
  }
  if (vsec.truncated_base()) out.mark_truncated();
  return out;
}

RoundReport simulate_vacuum_round_state(const CodeInstance& code_vac,
                                        const StateVector& initial,
                                        const ErrorOp& e,
                                        const VacuumSection& vsec) {
  require_bosonic_vacuum(code_vac, "recovery simulation");
  const auto layout = code_vac.layout();
  const auto& mask = code_vac.code_mask();
  const std::int64_t dim = layout->total_dim();
  for (std::int64_t i = 0; i < dim; ++i) {
    if (std::abs(initial.amp(i)) > 1e-12 &&
        mask[static_cast<std::size_t>(i)] == 0) {
      throw IncompatibleError(
          "[equivalence] simulation input leaves the code space");
    }
  }

  RoundReport report;
  StateVector state = initial;
  apply_sequence(state, error_sequence(e, code_vac));
  if (state.norm() < 1e-12) {
    report.state_annihilated = true;
    report.note = "error annihilated the state";
    return report;
  }

  // The errored state carries a sharp occupation profile; read it off the
  // basis support, verifying sharpness.
  std::optional<std::map<MatterIndex, std::int64_t>> measured;
  for (std::int64_t i = 0; i < dim; ++i) {
    if (std::abs(state.amp(i)) <= 1e-12) continue;
    auto here = state_occupations(*layout, i);
    if (!measured.has_value()) {
      measured = std::move(here);
    } else if (!(*measured == here)) {
      report.note = "occupation measurement is not sharp on the errored state";
      return report;
    }
  }
  report.syndrome = occupation_string(*measured);

  const VacuumSectionEntry* entry = vsec.find(*measured);
  if (entry == nullptr) {
    report.note = "measured occupations missing from table '" + vsec.label() +
                  "'";
    return report;
  }
  report.recovery = entry->label.empty() ? "(unlabelled)" : entry->label;

  apply_sequence(state, adjoint_sequence(error_sequence(entry->error,
                                                        code_vac)));

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

RoundReport simulate_vacuum_round(const CodeInstance& code_vac,
                                  std::int64_t codeword, const ErrorOp& e,
                                  const VacuumSection& vsec) {
  const auto layout = code_vac.layout();
  if (codeword < 0 || codeword >= layout->total_dim() ||
      code_vac.code_mask()[static_cast<std::size_t>(codeword)] == 0) {
    throw IncompatibleError("[equivalence] index " + std::to_string(codeword) +
                            " is not a codeword");
  }
  return simulate_vacuum_round_state(
      code_vac, StateVector::basis_state(layout, codeword), e, vsec);
}

std::int64_t TMap::apply(std::int64_t vacuum_index) const {
  if (vacuum_index < 0 ||
      vacuum_index >= static_cast<std::int64_t>(to_gauge.size()) ||
      to_gauge[static_cast<std::size_t>(vacuum_index)] < 0) {
    throw IncompatibleError("[equivalence] index " +
                            std::to_string(vacuum_index) +
                            " is not a physical vacuum-code state");
  }
  return to_gauge[static_cast<std::size_t>(vacuum_index)];
}

std::int64_t TMap::invert(std::int64_t gauge_index) const {
  if (gauge_index < 0 ||
      gauge_index >= static_cast<std::int64_t>(to_vacuum.size())) {
    throw IncompatibleError("[equivalence] gauge index " +
                            std::to_string(gauge_index) + " out of range");
  }
  return to_vacuum[static_cast<std::size_t>(gauge_index)];
}

KernelWitness kernel_witness(const CodeInstance& code_vac) {
  require_bosonic_vacuum(code_vac, "kernel diagnostics");
  const auto& species = code_vac.matter().species();

  // Single-vertex occupation registers (vertex 0 stands in for any vertex).
  std::vector<MatterIndex> regs;
  std::vector<std::int64_t> dims;
  for (std::size_t s = 0; s < species.size(); ++s) {
    regs.push_back(MatterIndex{0, static_cast<int>(s), 0});
    dims.push_back(species[s].oscillator_pair ? species[s].cutoff + 1
                                              : species[s].finite_dimension());
    if (species[s].oscillator_pair) {
      regs.push_back(MatterIndex{0, static_cast<int>(s), 1});
      dims.push_back(species[s].cutoff + 1);
    }
  }

  // An oscillator pair hosts the canonical degeneracy outright: one
  // particle plus one antiparticle carries the same net charge as the
  // empty site, for any charge and any cutoff >= 1.
  for (std::size_t s = 0; s < species.size(); ++s) {
    if (species[s].oscillator_pair && species[s].cutoff >= 1) {
      KernelWitness out;
      out.trivial = false;
      out.config_b.emplace(MatterIndex{0, static_cast<int>(s), 0}, 1);
      out.config_b.emplace(MatterIndex{0, static_cast<int>(s), 1}, 1);
      return out;
    }
  }

  std::int64_t total = 1;
  for (std::int64_t d : dims) {
    total *= d;
    if (total > (std::int64_t{1} << 20)) {
      throw BaseNotEnumerable(
          "[equivalence] occupation profiles too numerous to scan");
    }
  }

  const GroupSpec& group = code_vac.group();
  std::map<std::vector<std::int64_t>, std::vector<std::int64_t>> seen;
  std::vector<std::int64_t> occ(regs.size(), 0);
  KernelWitness out;
  for (std::int64_t step = 0; step < total; ++step) {
    Character charge = group.trivial_character();
    for (std::size_t r = 0; r < regs.size(); ++r) {
      const Character& unit = species[regs[r].species].charge;
      charge = compose(
          charge, power(unit, regs[r].mode == 1 ? -occ[r] : occ[r]));
    }
    const auto [it, fresh] = seen.emplace(charge.exponents(), occ);
    if (!fresh) {
      out.trivial = false;
      for (std::size_t r = 0; r < regs.size(); ++r) {
        if (it->second[r] != 0) out.config_a.emplace(regs[r], it->second[r]);
        if (occ[r] != 0) out.config_b.emplace(regs[r], occ[r]);
      }
      return out;
    }
    // Odometer increment.
    std::size_t r = 0;
    for (; r < regs.size(); ++r) {
      if (++occ[r] < dims[r]) break;
      occ[r] = 0;
    }
    if (r == regs.size()) break;
  }
  return out;
}

std::string KernelWitness::to_string() const {
  if (trivial) return "trivial kernel";
  return "equal-charge occupation profiles " + occupation_string(config_b) +
         " vs " + occupation_string(config_a);
}

TMap build_T(const CodeInstance& code_vac, const CodeInstance& code_gl) {
  require_bosonic_vacuum(code_vac, "the basis bijection");
  if (code_gl.family() != CodeFamily::PureGaugeGL) {
    throw FamilyMismatch(
        "[equivalence] the bijection targets the pure-gauge family");
  }
  if (!(code_vac.group() == code_gl.group())) {
    throw SpecMismatch("[equivalence] codes over different groups");
  }
  if (code_vac.lattice().num_vertices() != code_gl.lattice().num_vertices() ||
      !(code_vac.lattice().links() == code_gl.lattice().links())) {
    throw SpecMismatch("[equivalence] codes over different lattices");
  }
  const KernelWitness kernel = kernel_witness(code_vac);
  if (!kernel.trivial) {
    throw KernelNontrivial("[equivalence] " + kernel.to_string() +
                           "; coarse-grain before building the bijection");
  }
  if (code_vac.matter().species().size() != 1) {
    throw KernelNontrivial(
        "[equivalence] the bijection needs a single matter species");
  }
  if (!code_vac.has_dense() || !code_gl.has_dense()) {
    throw DimensionCap("[equivalence] dense layouts required for the "
                       "bijection");
  }

  TMap t;
  t.vacuum_layout = code_vac.layout();
  t.gauge_layout = code_gl.layout();
  const std::int64_t dim_vac = t.vacuum_layout->total_dim();
  const std::int64_t dim_gl = t.gauge_layout->total_dim();
  t.to_gauge.assign(static_cast<std::size_t>(dim_vac), -1);
  t.to_vacuum.assign(static_cast<std::size_t>(dim_gl), -1);

  const auto& physical = code_vac.gauss_mask();
  const int num_links = code_vac.lattice().num_links();
  std::vector<std::int64_t> digits(
      static_cast<std::size_t>(t.gauge_layout->num_registers()), 0);
  for (std::int64_t i = 0; i < dim_vac; ++i) {
    if (physical[static_cast<std::size_t>(i)] == 0) continue;
    for (int l = 0; l < num_links; ++l) {
      digits[static_cast<std::size_t>(t.gauge_layout->link_register(l))] =
          t.vacuum_layout->digit(i, t.vacuum_layout->link_register(l));
    }
    const std::int64_t j = t.gauge_layout->index_of(digits);
    if (t.to_vacuum[static_cast<std::size_t>(j)] != -1) {
      throw IncompatibleMatter(
          "[equivalence] two physical states share flux " +
          t.gauge_layout->basis_label(j));
    }
    t.to_gauge[static_cast<std::size_t>(i)] = j;
    t.to_vacuum[static_cast<std::size_t>(j)] = i;
  }
  for (std::int64_t j = 0; j < dim_gl; ++j) {
    if (t.to_vacuum[static_cast<std::size_t>(j)] == -1) {
      throw IncompatibleMatter(
          "[equivalence] no physical state dresses flux " +
          t.gauge_layout->basis_label(j));
    }
  }
  return t;
}

std::string EquivalenceReport::to_string() const {
  std::ostringstream out;
  for (const EquivalenceCheck& check : checks) {
    out << check.label << ": " << (check.pass ? "pass" : "FAIL")
        << " (max deviation " << check.max_deviation << ")";
    if (!check.note.empty()) out << " — " << check.note;
    out << "\n";
  }
  out << (pass ? "equivalence verified" : "equivalence FAILED");
  return out.str();
}

EquivalenceReport verify_equivalence(const CodeInstance& code_vac,
                                     const CodeInstance& code_gl,
                                     const Section& sec) {
  constexpr double kTol = 1e-10;
  EquivalenceReport report;

  // Frame alignment: both codes must reference the same tree frame for
  // their sections to describe the same recovery.
  {
    EquivalenceCheck check;
    check.label = "frame alignment";
    check.pass = code_vac.tree().root() == code_gl.tree().root() &&
                 code_vac.tree().tree_links() == code_gl.tree().tree_links();
    if (!check.pass) {
      int offender = -1;
      const auto& a = code_vac.tree().tree_links();
      const auto& b = code_gl.tree().tree_links();
      for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i] != b[i]) {
          offender = a[i];
          break;
        }
      }
      check.note = offender >= 0
                       ? "tree Wilson line through link " +
                             std::to_string(offender) +
                             " differs between the codes"
                       : "tree roots differ";
    }
    report.checks.push_back(std::move(check));
  }

  const TMap t = build_T(code_vac, code_gl);
  const std::int64_t dim_vac = t.vacuum_layout->total_dim();
  const std::int64_t dim_gl = t.gauge_layout->total_dim();

  // Basis bijection: the code masks must map onto each other.
  {
    EquivalenceCheck check;
    check.label = "code mask bijection";
    check.pass = true;
    for (std::int64_t i = 0; i < dim_vac; ++i) {
      if (t.to_gauge[static_cast<std::size_t>(i)] < 0) continue;
      const std::int64_t j = t.to_gauge[static_cast<std::size_t>(i)];
      if (code_vac.code_mask()[static_cast<std::size_t>(i)] !=
          code_gl.code_mask()[static_cast<std::size_t>(j)]) {
        check.pass = false;
        check.note = "mask mismatch at vacuum state " +
                     t.vacuum_layout->basis_label(i);
        break;
      }
    }
    report.checks.push_back(std::move(check));
  }

  // Stabilizer intertwining: the occupation-pinning charge phase at each
  // vertex conjugates onto the gauge code's vertex star (with inverted
  // parameter), and the vacuum stars themselves act trivially on every
  // physical state.
  {
    EquivalenceCheck check;
    check.label = "stabilizer intertwining";
    check.pass = true;
    const GroupSpec& group = code_vac.group();
    for (int v = 0; v < code_vac.lattice().num_vertices() && check.pass;
         ++v) {
      for (std::size_t r = 0; r < group.rank() && check.pass; ++r) {
        std::vector<std::int64_t> unit(group.rank(), 0);
        unit[r] = 1;
        const GroupElement g = group.element(unit);
        const OpSequence pin = charge_phase_sequence(code_vac, v, g);
        const OpSequence star_vac = star_operator_sequence(code_vac, v, g);
        const OpSequence star_gl =
            star_operator_sequence(code_gl, v, inverse(g));
        for (std::int64_t j = 0; j < dim_gl; ++j) {
          const std::int64_t i = t.to_vacuum[static_cast<std::size_t>(j)];
          const std::complex<double> lhs =
              diagonal_eigenvalue(t.vacuum_layout, pin, i);
          const std::complex<double> rhs =
              diagonal_eigenvalue(t.gauge_layout, star_gl, j);
          const std::complex<double> inv =
              diagonal_eigenvalue(t.vacuum_layout, star_vac, i);
          check.max_deviation = std::max(
              {check.max_deviation, std::abs(lhs - rhs), std::abs(inv - 1.0)});
        }
        if (check.max_deviation > kTol) {
          check.pass = false;
          check.note = "pinning phase at vertex " + std::to_string(v) +
                       " fails to match the gauge star";
        }
      }
    }
    report.checks.push_back(std::move(check));
  }

  // Section intertwining: every dressed representative conjugates onto its
  // bare flux, checked on the full physical basis.
  const VacuumSection vsec = dress_section(sec, code_vac);
  {
    EquivalenceCheck check;
    check.label = "section intertwining";
    check.pass = true;
    for (std::size_t k = 0; k < sec.entries().size() && check.pass; ++k) {
      ErrorOp bare(code_gl.group());
      bare.links = sec.entries()[k].links;
      const OpSequence dressed_seq =
          error_sequence(vsec.entries()[k].error, code_vac);
      const OpSequence bare_seq = error_sequence(bare, code_gl);
      for (std::int64_t j = 0; j < dim_gl; ++j) {
        const std::int64_t i = t.to_vacuum[static_cast<std::size_t>(j)];
        StateVector sv =
            StateVector::basis_state(t.vacuum_layout, i);
        apply_sequence(sv, dressed_seq);
        StateVector sg = StateVector::basis_state(t.gauge_layout, j);
        apply_sequence(sg, bare_seq);
        // Push the vacuum image through T and compare amplitudes.
        double dev = 0.0;
        for (std::int64_t i2 = 0; i2 < dim_vac; ++i2) {
          const std::complex<double>& amp = sv.amp(i2);
          if (std::abs(amp) <= 1e-14) continue;
          const std::int64_t j2 = t.to_gauge[static_cast<std::size_t>(i2)];
          if (j2 < 0) {
            dev = 1.0;
            break;
          }
          dev = std::max(dev, std::abs(amp - sg.amp(j2)));
        }
        check.max_deviation = std::max(check.max_deviation, dev);
        if (check.max_deviation > kTol) {
          check.pass = false;
          check.note = "first offending operator: " +
                       (vsec.entries()[k].label.empty()
                            ? vsec.entries()[k].error.to_string()
                            : vsec.entries()[k].label);
          break;
        }
      }
    }
    report.checks.push_back(std::move(check));
  }

  // Recovery intertwining: a full error/measure/recover round commutes
  // with T on every codeword and section member.
  {
    EquivalenceCheck check;
    check.label = "recovery intertwining";
    check.pass = true;
    for (std::int64_t cw : code_vac.code_basis()) {
      if (!check.pass) break;
      const std::int64_t gw = t.apply(cw);
      for (std::size_t k = 0; k < sec.entries().size(); ++k) {
        ErrorOp bare(code_gl.group());
        bare.links = sec.entries()[k].links;
        const ErrorOp& dressed = vsec.entries()[k].error;

        // Vacuum-side round.
        StateVector sv = StateVector::basis_state(t.vacuum_layout, cw);
        apply_sequence(sv, error_sequence(dressed, code_vac));
        const auto occ = syndrome_of(dressed, code_vac).occupations;
        const VacuumSectionEntry* ventry = vsec.find(occ);
        // Gauge-side round.
        StateVector sg = StateVector::basis_state(t.gauge_layout, gw);
        apply_sequence(sg, error_sequence(bare, code_gl));
        const SectionEntry* gentry =
            sec.find(syndrome_of(bare, code_gl).charges);
        if (ventry == nullptr || gentry == nullptr) {
          check.pass = false;
          check.note = "syndrome lookup failed for " +
                       vsec.entries()[k].error.to_string();
          break;
        }
        apply_sequence(
            sv, adjoint_sequence(error_sequence(ventry->error, code_vac)));
        ErrorOp grec(code_gl.group());
        grec.links = gentry->links;
        apply_sequence(sg,
                       adjoint_sequence(error_sequence(grec, code_gl)));

        double dev = 0.0;
        for (std::int64_t i2 = 0; i2 < dim_vac; ++i2) {
          const std::complex<double>& amp = sv.amp(i2);
          if (std::abs(amp) <= 1e-14) continue;
          const std::int64_t j2 = t.to_gauge[static_cast<std::size_t>(i2)];
          if (j2 < 0) {
            dev = 1.0;
            break;
          }
          dev = std::max(dev, std::abs(amp - sg.amp(j2)));
        }
        // Both rounds must also restore their codewords.
        dev = std::max(dev, std::abs(sv.amp(cw) - 1.0));
        dev = std::max(dev, std::abs(sg.amp(gw) - 1.0));
        check.max_deviation = std::max(check.max_deviation, dev);
        if (check.max_deviation > kTol) {
          check.pass = false;
          check.note = "round diverges for " +
                       (vsec.entries()[k].label.empty()
                            ? vsec.entries()[k].error.to_string()
                            : vsec.entries()[k].label);
          break;
        }
      }
    }
    report.checks.push_back(std::move(check));
  }

  report.pass = true;
  for (const EquivalenceCheck& check : report.checks) {
    report.pass = report.pass && check.pass;
  }
  return report;
}

}  // namespace gqec
