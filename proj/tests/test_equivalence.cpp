#include <doctest.h>

#include <cstdint>
#include <string>
#include <vector>

#include "gqec/equivalence.hpp"
#include "gqec/exceptions.hpp"

using namespace gqec;

namespace {

struct Fixture {
  Lattice lat;
  GroupSpec group;
  SpanningTree tree;
  CodeInstance code;
};

Fixture make(int n, std::vector<std::int64_t> factors, CodeFamily family,
             MatterContent matter = MatterContent::none()) {
  Lattice lat = Lattice::ring(n);
  GroupSpec group(std::move(factors));
  SpanningTree tree = SpanningTree::build(lat, 0);
  CodeInstance code = build_code(lat, group, tree, matter, family);
  return Fixture{std::move(lat), std::move(group), std::move(tree),
                 std::move(code)};
}

Fixture vac2() {
  GroupSpec g({2});
  return make(3, {2}, CodeFamily::BosonicVacuum,
              MatterContent::bosonic({BosonSpecies{g.character({1})}}));
}

Fixture gl2() { return make(3, {2}, CodeFamily::PureGaugeGL); }

Fixture vac3() {
  GroupSpec g({3});
  return make(3, {3}, CodeFamily::BosonicVacuum,
              MatterContent::bosonic({BosonSpecies{g.character({1})}}));
}

Fixture gl3() { return make(3, {3}, CodeFamily::PureGaugeGL); }

// Oscillator-pair matter: the canonical example of a degenerate charge map.
Fixture osc2() {
  GroupSpec g({2});
  return make(3, {2}, CodeFamily::BosonicVacuum,
              MatterContent::bosonic({BosonSpecies{g.character({1}), true, 3}}));
}

ErrorOp err(const Fixture& f, const std::string& text) {
  return parse_error_literal(f.group, text);
}

}  // namespace

TEST_CASE("coarse-graining strips matter and dressing screens flux") {
  Fixture v = vac2();

  // theta keeps link data (flux and electric decorations) and drops the
  // matter content.
  ErrorOp dressed = err(v, "Z[0,0:1/2] X[0,0:1] X[1,0:1] U[1:1] W[0:1]");
  ErrorOp bare = theta(dressed, v.code);
  CHECK(bare.links == err(v, "W[0:1]").links);
  CHECK(bare.link_z.size() == 1);
  CHECK(bare.link_z.count(1) == 1);
  CHECK(bare.matter_x.empty());
  CHECK(bare.matter_z.empty());
  CHECK(theta(err(v, "1"), v.code).is_identity());

  Fixture g = gl2();
  CHECK_THROWS_AS(theta(err(g, "W[0:1]"), g.code), FamilyMismatch);
  CHECK_THROWS_AS(theta(parse_error_literal(GroupSpec({3}), "W[0:1]"), v.code),
                  SpecMismatch);

  // dress_flux screens every charged vertex; for the self-conjugate Z2
  // charge a single link costs one particle at each endpoint.
  ErrorOp screened = dress_flux(err(v, "W[0:1]").links, v.code);
  CHECK(screened.links == err(v, "W[0:1]").links);
  CHECK(screened.matter_x ==
        MatterShift{{MatterIndex{0, 0, 0}, 1}, {MatterIndex{1, 0, 0}, 1}});
  CHECK(syndrome_of(screened, v.code).occupations == screened.matter_x);
  CHECK(theta(screened, v.code).matter_x.empty());

  // Round trip over every flux pattern: dress then strip is the identity
  // on the link data, and every dressed error is gauge invariant.
  for (int bits = 0; bits < 8; ++bits) {
    WilsonLineProduct w(v.group);
    for (int l = 0; l < 3; ++l) {
      if ((bits >> l) & 1) w.multiply(l, v.group.character({1}));
    }
    ErrorOp d = dress_flux(w, v.code);
    CHECK(d.links == w);
    CHECK(theta(d, v.code).links == w);
    CHECK_NOTHROW(syndrome_of(d, v.code));
  }

  // Order-3 charge: the two endpoints screen with different occupation
  // shifts (conjugate targets).
  Fixture v3 = vac3();
  ErrorOp d3 = dress_flux(err(v3, "W[0:1]").links, v3.code);
  CHECK(d3.matter_x ==
        MatterShift{{MatterIndex{0, 0, 0}, 2}, {MatterIndex{1, 0, 0}, 1}});

  // A species of order 2 inside Z4 could never screen an order-4
  // divergence; such codes are refused at construction.
  GroupSpec z4({4});
  CHECK_THROWS_AS(
      make(3, {4}, CodeFamily::BosonicVacuum,
           MatterContent::bosonic({BosonSpecies{z4.character({2})}})),
      IncompatibleMatter);
}

TEST_CASE("recovery tables dress and strip between the two codes") {
  Fixture v = vac2();
  Fixture g = gl2();
  Section sec = tree_frame_section(g.lat, g.tree, g.group);
  REQUIRE(sec.size() == 4);

  // Dressing keys every representative by its occupation profile.
  VacuumSection vsec = dress_section(sec, v.code);
  CHECK(vsec.size() == 4);
  CHECK(vsec.label() == sec.label());
  for (const VacuumSectionEntry& entry : vsec.entries()) {
    CHECK(syndrome_of(entry.error, v.code).occupations == entry.occupations);
    CHECK(vsec.find(entry.occupations) == &entry);
  }
  // The trivial flux dresses to the empty profile.
  const VacuumSectionEntry* identity = vsec.find({});
  REQUIRE(identity != nullptr);
  CHECK(identity->error.is_identity());

  // The screening identity, checked against the raw divergence: the
  // occupation at each vertex inverts the flux charge there (order-3
  // charge keeps the two directions distinct).
  Fixture v3 = vac3();
  Fixture g3 = gl3();
  Section sec3 = tree_frame_section(g3.lat, g3.tree, g3.group);
  REQUIRE(sec3.size() == 9);
  VacuumSection vsec3 = dress_section(sec3, v3.code);
  const Character rho = v3.group.character({1});
  for (const VacuumSectionEntry& entry : vsec3.entries()) {
    const Syndrome div = gauss_map(entry.error.links, v3.lat,
                                   GaussScope::AllVertices, v3.tree.root());
    for (int vert = 0; vert < 3; ++vert) {
      const auto it = entry.occupations.find(MatterIndex{vert, 0, 0});
      const std::int64_t n = it == entry.occupations.end() ? 0 : it->second;
      CHECK(power(rho, n) == conjugate(div.charge(vert)));
    }
  }

  // Matter-bearing representatives have no bare image.
  Section mixed("mixed");
  SectionEntry bad{gauss_map(err(g, "W[0:1]").links, g.lat,
                             GaussScope::ExcludeRoot, g.tree.root()),
                   err(g, "W[0:1]").links,
                   MatterShift{{MatterIndex{0, 0, 0}, 1}},
                   "bad"};
  mixed.add(std::move(bad));
  CHECK_THROWS_AS(dress_section(mixed, v.code), IncompatibleError);

  // Stripping recovers a pure-gauge section covering the same syndromes,
  // and that section passes the full correctability screen.
  Section back = theta_section(vsec, v.code);
  CHECK(back.size() == sec.size());
  for (const SectionEntry& entry : sec.entries()) {
    const SectionEntry* match = back.find(entry.syndrome);
    REQUIRE(match != nullptr);
    CHECK(match->links == entry.links);
  }
  MaxSetResult lifted = max_set_from_section(back, g.code);
  CHECK(lifted.validation.correctable);
  CHECK(lifted.validation.maximal);

  // Duplicate occupation keys are rejected.
  VacuumSection dup("dup");
  dup.add(VacuumSectionEntry{{}, err(v, "1"), "a"});
  CHECK_THROWS_AS(dup.add(VacuumSectionEntry{{}, err(v, "1"), "b"}),
                  NotASection);
}

TEST_CASE("vacuum recovery rounds follow the occupation table") {
  Fixture v = vac2();
  Fixture g = gl2();
  VacuumSection vsec =
      dress_section(tree_frame_section(g.lat, g.tree, g.group), v.code);

  REQUIRE(v.code.code_dimension() == 2);
  for (std::int64_t cw : v.code.code_basis()) {
    for (const VacuumSectionEntry& entry : vsec.entries()) {
      RoundReport r = simulate_vacuum_round(v.code, cw, entry.error, vsec);
      CHECK(r.success);
      CHECK(r.fidelity == doctest::Approx(1.0));
      CHECK(r.note.empty());
    }
  }

  // Superpositions recover too.
  {
    StateVector plus =
        StateVector::basis_state(v.code.layout(), v.code.code_basis()[0]);
    plus.amp(v.code.code_basis()[1]) = 1.0;
    plus.normalize();
    RoundReport r = simulate_vacuum_round_state(
        v.code, plus, vsec.entries()[1].error, vsec);
    CHECK(r.success);
  }

  // A residual diagonal phase on the screened occupations survives
  // recovery only as a global phase.
  RoundReport phase = simulate_vacuum_round(
      v.code, v.code.code_basis()[0],
      err(v, "Z[0,0:1/2] X[0,0:1] X[1,0:1] W[0:1]"), vsec);
  CHECK_FALSE(phase.success);
  CHECK(phase.fidelity == doctest::Approx(1.0));
  CHECK(phase.note == "recovered up to a global phase");

  // The fully dressed loop has trivial divergence, needs no matter, and
  // reads as the empty profile: the table cannot see it.
  ErrorOp loop = dress_flux(err(v, "W[0:1] W[1:1] W[2:1]").links, v.code);
  CHECK(loop.matter_x.empty());
  RoundReport failed =
      simulate_vacuum_round(v.code, v.code.code_basis()[0], loop, vsec);
  CHECK_FALSE(failed.success);
  CHECK(failed.note == "logical failure: recovered state differs from the input");

  // Profiles outside the table are reported, not guessed.
  VacuumSection small("identity only");
  small.add(VacuumSectionEntry{{}, err(v, "1"), "1"});
  RoundReport missing = simulate_vacuum_round(
      v.code, v.code.code_basis()[0],
      dress_flux(err(v, "W[0:1]").links, v.code), small);
  CHECK_FALSE(missing.success);
  CHECK(missing.note ==
        "measured occupations missing from table 'identity only'");

  CHECK_THROWS_AS(simulate_vacuum_round(v.code, 1, err(v, "1"), vsec),
                  IncompatibleError);
}

TEST_CASE("the basis bijection pairs screened states with flux patterns") {
  Fixture v = vac2();
  Fixture g = gl2();
  TMap t = build_T(v.code, g.code);

  CHECK(t.vacuum_layout->total_dim() == 64);
  CHECK(t.gauge_layout->total_dim() == 8);
  REQUIRE(t.to_gauge.size() == 64);
  REQUIRE(t.to_vacuum.size() == 8);

  // Exactly one physical vacuum state over each flux pattern.
  int physical = 0;
  for (std::int64_t i = 0; i < 64; ++i) {
    if (t.to_gauge[static_cast<std::size_t>(i)] >= 0) ++physical;
  }
  CHECK(physical == 8);
  for (std::int64_t j = 0; j < 8; ++j) {
    CHECK(t.apply(t.invert(j)) == j);
  }
  for (std::int64_t i = 0; i < 64; ++i) {
    if (t.to_gauge[static_cast<std::size_t>(i)] >= 0) {
      CHECK(t.invert(t.apply(i)) == i);
      // Physical states are exactly the Gauss-invariant ones.
      CHECK(v.code.gauss_mask()[static_cast<std::size_t>(i)] == 1);
    } else {
      CHECK(v.code.gauss_mask()[static_cast<std::size_t>(i)] == 0);
      CHECK_THROWS_AS(t.apply(i), IncompatibleError);
    }
  }

  // The bijection preserves the link digits it is built from.
  for (std::int64_t j = 0; j < 8; ++j) {
    const std::int64_t i = t.invert(j);
    for (int l = 0; l < 3; ++l) {
      CHECK(t.vacuum_layout->digit(i, t.vacuum_layout->link_register(l)) ==
            t.gauge_layout->digit(j, t.gauge_layout->link_register(l)));
    }
  }

  // Code masks correspond through the bijection.
  for (std::int64_t j = 0; j < 8; ++j) {
    CHECK(g.code.code_mask()[static_cast<std::size_t>(j)] ==
          v.code.code_mask()[static_cast<std::size_t>(t.invert(j))]);
  }

  Fixture g3 = gl3();
  CHECK_THROWS_AS(build_T(v.code, g3.code), SpecMismatch);
  CHECK_THROWS_AS(build_T(v.code, v.code), FamilyMismatch);
  CHECK_THROWS_AS(build_T(g.code, g.code), FamilyMismatch);
}

TEST_CASE("kernel diagnostics flag degenerate occupation charges") {
  // A single finite species that generates the duals has a trivial kernel.
  CHECK(kernel_witness(vac2().code).trivial);
  CHECK(kernel_witness(vac3().code).trivial);
  CHECK(kernel_witness(vac2().code).to_string() == "trivial kernel");

  // An oscillator pair always carries the canonical degeneracy: one
  // particle plus one antiparticle has the net charge of the empty site.
  Fixture o = osc2();
  KernelWitness w = kernel_witness(o.code);
  CHECK_FALSE(w.trivial);
  CHECK(w.config_a.empty());
  CHECK(w.config_b ==
        MatterShift{{MatterIndex{0, 0, 0}, 1}, {MatterIndex{0, 0, 1}, 1}});
  CHECK(w.to_string() == "equal-charge occupation profiles n[0,0:1] "
                         "n[0,0,-:1] vs vacuum");

  // Two species with the same charge collide by pigeonhole.
  GroupSpec z2({2});
  Fixture two = make(3, {2}, CodeFamily::BosonicVacuum,
                     MatterContent::bosonic({BosonSpecies{z2.character({1})},
                                             BosonSpecies{z2.character({1})}}));
  KernelWitness w2 = kernel_witness(two.code);
  CHECK_FALSE(w2.trivial);
  CHECK(w2.config_a == MatterShift{{MatterIndex{0, 0, 0}, 1}});
  CHECK(w2.config_b == MatterShift{{MatterIndex{0, 1, 0}, 1}});

  // Degenerate charges block the bijection.
  Fixture g = gl2();
  CHECK_THROWS_AS(build_T(o.code, g.code), KernelNontrivial);
  CHECK_THROWS_AS(build_T(two.code, g.code), KernelNontrivial);

  CHECK_THROWS_AS(kernel_witness(g.code), FamilyMismatch);
}

TEST_CASE("dense verification confirms the vacuum and gauge codes agree") {
  Fixture v = vac2();
  Fixture g = gl2();
  Section sec = tree_frame_section(g.lat, g.tree, g.group);

  EquivalenceReport report = verify_equivalence(v.code, g.code, sec);
  CHECK(report.pass);
  REQUIRE(report.checks.size() == 5);
  const char* labels[] = {"frame alignment", "code mask bijection",
                          "stabilizer intertwining", "section intertwining",
                          "recovery intertwining"};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(report.checks[i].label == labels[i]);
    CHECK(report.checks[i].pass);
    CHECK(report.checks[i].max_deviation <= 1e-10);
  }
  CHECK(report.to_string().find("equivalence verified") != std::string::npos);

  // A table holding only the identity still verifies (fewer members).
  Section only("identity only");
  only.add(SectionEntry{gauss_map(WilsonLineProduct(g.group), g.lat,
                                  GaussScope::ExcludeRoot, g.tree.root()),
                        WilsonLineProduct(g.group),
                        {},
                        "1"});
  CHECK(verify_equivalence(v.code, g.code, only).pass);

  // Order-3 run: phases are no longer real, so this exercises the
  // conjugation conventions end to end.
  Fixture v3 = vac3();
  Fixture g3 = gl3();
  EquivalenceReport r3 = verify_equivalence(
      v3.code, g3.code, tree_frame_section(g3.lat, g3.tree, g3.group));
  CHECK(r3.pass);

  // A gauge code framed on a different spanning tree is flagged by the
  // frame check even though the state-level bijection still works.
  SpanningTree other = SpanningTree::from_links(g.lat, 0, {1, 2});
  CodeInstance gl_other = build_code(g.lat, g.group, other,
                                     MatterContent::none(),
                                     CodeFamily::PureGaugeGL);
  Section sec_other = tree_frame_section(g.lat, other, g.group);
  EquivalenceReport mismatch =
      verify_equivalence(v.code, gl_other, sec_other);
  CHECK_FALSE(mismatch.pass);
  CHECK(mismatch.checks[0].label == "frame alignment");
  CHECK_FALSE(mismatch.checks[0].pass);
  CHECK(mismatch.checks[0].note.find("link") != std::string::npos);
  CHECK(mismatch.to_string().find("equivalence FAILED") != std::string::npos);
}
