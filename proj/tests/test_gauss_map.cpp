#include <doctest.h>

#include "gqec/exceptions.hpp"
#include "gqec/gauss_map.hpp"

using namespace gqec;

TEST_CASE("syndrome equality respects the comparison scope") {
  GroupSpec g({2});
  Character one = g.trivial_character();
  Character x = g.character({1});

  Syndrome a(g, {x, x, one}, GaussScope::ExcludeRoot, 0);
  Syndrome b(g, {one, x, one}, GaussScope::ExcludeRoot, 0);
  CHECK(a == b);  // root entry ignored
  Syndrome c(g, {one, x, one}, GaussScope::AllVertices, 0);
  Syndrome d(g, {x, x, one}, GaussScope::AllVertices, 0);
  CHECK_FALSE(c == d);
  CHECK_THROWS_AS((void)(a == c), SpecMismatch);  // scope mismatch
  CHECK(a.key() == std::vector<std::int64_t>{1, 0});
  CHECK(c.key() == std::vector<std::int64_t>{0, 1, 0});
  CHECK(a.to_string() == "([1],1,0)");
  CHECK(Syndrome(g, {one, one, one}, GaussScope::ExcludeRoot, 0).is_trivial());
}

TEST_CASE("the divergence pairs tails against heads") {
  Lattice r = Lattice::ring(3);
  GroupSpec g({3});
  WilsonLineProduct w(g);
  w.multiply(1, g.character({1}));  // link 1 runs 1 -> 2

  Syndrome s = gauss_map(w, r, GaussScope::AllVertices);
  CHECK(s.charge(0).is_trivial());
  CHECK(s.charge(1) == g.character({1}));
  CHECK(s.charge(2) == g.character({2}));
}

TEST_CASE("bosonic shifts add matter charge to the divergence") {
  Lattice r = Lattice::ring(3);
  GroupSpec g({3});
  Character rho = g.character({1});
  MatterContent matter = MatterContent::bosonic({BosonSpecies{rho}});

  WilsonLineProduct w(g);
  MatterShift x{{MatterIndex{1, 0, 0}, 2}};
  Syndrome s = gauss_map_bosonic(w, x, matter, r);
  CHECK(s.scope() == GaussScope::AllVertices);
  CHECK(s.charge(1) == g.character({2}));
  CHECK(s.charge(0).is_trivial());

  // Oscillator pairs: the antiparticle mode counts with opposite sign.
  MatterContent osc =
      MatterContent::bosonic({BosonSpecies{rho, true, 3}});
  MatterShift y{{MatterIndex{2, 0, 0}, 1}, {MatterIndex{2, 0, 1}, 1}};
  CHECK(gauss_map_bosonic(w, y, osc, r).is_trivial());

  MatterShift bad{{MatterIndex{7, 0, 0}, 1}};
  CHECK_THROWS_AS(gauss_map_bosonic(w, bad, matter, r), IncompatibleError);
}

TEST_CASE("pure-gauge bases enumerate neutral profiles") {
  Lattice r = Lattice::ring(3);
  GroupSpec z2({2});
  auto base2 = enumerate_pure_base(z2, r);
  CHECK(base2.size() == 4);  // |G|^(nv-1)
  auto base3 = enumerate_pure_base(GroupSpec({3}), r);
  CHECK(base3.size() == 9);
  for (const Syndrome& s : base3) {
    Character total = GroupSpec({3}).trivial_character();
    for (int v = 0; v < 3; ++v) total = compose(total, s.charge(v));
    CHECK(total.is_trivial());  // root entry restores neutrality
  }
}

TEST_CASE("bosonic bases cover every profile when charges generate") {
  Lattice r = Lattice::ring(3);
  GroupSpec z2({2});
  MatterContent matter =
      MatterContent::bosonic({BosonSpecies{z2.character({1})}});
  auto base = enumerate_bosonic_base(z2, r, matter);
  CHECK(base.size() == 8);  // |G|^nv, no neutrality constraint

  GroupSpec z4({4});
  MatterContent weak =
      MatterContent::bosonic({BosonSpecies{z4.character({2})}});
  CHECK_THROWS_AS(enumerate_bosonic_base(z4, r, weak), IncompatibleMatter);
}

TEST_CASE("tree-frame sections invert the divergence") {
  Lattice r = Lattice::ring(3);
  SpanningTree t = SpanningTree::build(r, 0);
  GroupSpec g({3});
  Section sec = tree_frame_section(r, t, g);
  CHECK(sec.size() == 9);
  CHECK_FALSE(sec.truncated_base());
  for (const SectionEntry& e : sec.entries()) {
    CHECK(gauss_map(e.links, r, GaussScope::ExcludeRoot) == e.syndrome);
    for (int l : e.links.support()) CHECK(t.contains(l));
    CHECK(e.matter_x.empty());
  }
  // Lookup by syndrome works and misses return null.
  const SectionEntry* hit = sec.find(sec.entries()[3].syndrome);
  REQUIRE(hit != nullptr);
  CHECK(hit->syndrome == sec.entries()[3].syndrome);
}

TEST_CASE("matter-flip sections realize charges without flux") {
  Lattice r = Lattice::ring(3);
  GroupSpec z2({2});
  MatterContent matter =
      MatterContent::bosonic({BosonSpecies{z2.character({1})}});
  Section sec = matter_flip_section(r, z2, matter);
  CHECK(sec.size() == 8);
  WilsonLineProduct no_flux(z2);
  for (const SectionEntry& e : sec.entries()) {
    CHECK(e.links.is_identity());
    CHECK(gauss_map_bosonic(no_flux, e.matter_x, matter, r) == e.syndrome);
  }
}

TEST_CASE("charge targets decompose over species exponents") {
  GroupSpec z6({6});
  MatterContent duo = MatterContent::bosonic(
      {BosonSpecies{z6.character({2})}, BosonSpecies{z6.character({3})}});
  auto x = solve_charge_as_shifts(duo, 1, z6.character({1}));
  REQUIRE(x.has_value());
  WilsonLineProduct no_flux(z6);
  Syndrome s = gauss_map_bosonic(no_flux, *x, duo, Lattice::ring(3));
  CHECK(s.charge(1) == z6.character({1}));

  GroupSpec z4({4});
  MatterContent weak =
      MatterContent::bosonic({BosonSpecies{z4.character({2})}});
  CHECK_FALSE(solve_charge_as_shifts(weak, 0, z4.character({1})).has_value());
}

TEST_CASE("sections reject duplicate syndromes") {
  GroupSpec g({2});
  Lattice r = Lattice::ring(3);
  SpanningTree t = SpanningTree::build(r, 0);
  Section sec = tree_frame_section(r, t, g);
  SectionEntry dup = sec.entries()[0];
  CHECK_THROWS_AS(sec.add(dup), NotASection);
}

TEST_CASE("flux fibers over a syndrome differ exactly by holonomies") {
  Lattice r = Lattice::ring(3);
  SpanningTree t = SpanningTree::build(r, 0);
  for (std::int64_t order : {2, 3}) {
    GroupSpec g({order});
    const std::int64_t total = order * order * order;
    std::vector<WilsonLineProduct> configs;
    std::vector<Syndrome> divs;
    for (std::int64_t c = 0; c < total; ++c) {
      WilsonLineProduct w(g);
      std::int64_t rem = c;
      for (int l = 0; l < 3; ++l) {
        w.multiply(l, g.character_at(rem % order));
        rem /= order;
      }
      configs.push_back(w);
      divs.push_back(gauss_map(w, r, GaussScope::ExcludeRoot));
    }

    // The divergence is a homomorphism, so fibers are kernel cosets of
    // uniform size |G|^loop_rank.
    auto composed = [&](const Syndrome& x, const Syndrome& y) {
      std::vector<Character> charges;
      for (int v = 0; v < 3; ++v) {
        charges.push_back(compose(x.charge(v), y.charge(v)));
      }
      return Syndrome(g, std::move(charges), GaussScope::ExcludeRoot, 0);
    };
    std::map<std::vector<std::int64_t>, int> fiber_sizes;
    for (std::int64_t a = 0; a < total; ++a) {
      fiber_sizes[divs[a].key()] += 1;
      for (std::int64_t b = 0; b < total; ++b) {
        WilsonLineProduct ab = configs[a].times(configs[b]);
        CHECK(gauss_map(ab, r, GaussScope::ExcludeRoot) ==
              composed(divs[a], divs[b]));
      }
    }
    CHECK(fiber_sizes.size() == static_cast<std::size_t>(order * order));
    for (const auto& [key, size] : fiber_sizes) CHECK(size == order);

    // Same fiber <=> the difference is a product of system holonomies.
    for (std::int64_t a = 0; a < total; ++a) {
      for (std::int64_t b = 0; b < total; ++b) {
        WilsonLineProduct diff = configs[a].adjoint().times(configs[b]);
        if (divs[a] == divs[b]) {
          WilsonLineProduct rebuilt(g);
          for (int l : t.system_links()) {
            rebuilt.multiply(system_holonomy(r, t, l, diff.exponent(l)));
          }
          CHECK(rebuilt == diff);
        } else {
          CHECK_FALSE(gauss_map(diff, r, GaussScope::ExcludeRoot).is_trivial());
        }
      }
    }
  }
}

TEST_CASE("dressed-line transport determines flux and vacuum occupations") {
  Lattice r = Lattice::ring(3);
  GroupSpec z2({2});
  Character rho = z2.character({1});
  MatterContent matter = MatterContent::bosonic({BosonSpecies{rho}});

  DressedLineData none;
  CHECK(none.is_identity());
  CHECK(induced_flux(none, matter, z2).is_identity());
  CHECK(vacuum_occupations(none, matter, r).empty());
  for (const Syndrome& s : gauss_map_vacuum(none, matter, r)) {
    CHECK(s.is_trivial());
  }

  // One quantum forward along link 0 (v0 -> v1): antiparticle content at
  // the tail, a particle at the head, flux rho in between.
  DressedLineData line;
  line.add(0, 0, 1, 0);
  CHECK(induced_flux(line, matter, z2).exponent(0) == rho);
  const auto occ = vacuum_occupations(line, matter, r);
  CHECK(occ == std::map<MatterIndex, std::int64_t>{
                   {MatterIndex{0, 0, 0}, 1}, {MatterIndex{1, 0, 0}, 1}});
  const auto syn = gauss_map_vacuum(line, matter, r);
  REQUIRE(syn.size() == 1);
  CHECK(syn[0].charge(0) == rho);
  CHECK(syn[0].charge(1) == rho);
  CHECK(syn[0].charge(2).is_trivial());

  // The detected charge screens the flux divergence exactly.
  const Syndrome div =
      gauss_map(induced_flux(line, matter, z2), r, GaussScope::AllVertices);
  for (int v = 0; v < r.num_vertices(); ++v) {
    CHECK(compose(div.charge(v), syn[0].charge(v)).is_trivial());
  }

  // Two lines sharing an endpoint: charges add (and cancel mod 2 at the
  // shared vertex).
  DressedLineData second;
  second.add(1, 0, 1, 0);
  DressedLineData joint = line;
  joint.compose(second);
  const auto syn_a = gauss_map_vacuum(line, matter, r)[0];
  const auto syn_b = gauss_map_vacuum(second, matter, r)[0];
  const auto syn_ab = gauss_map_vacuum(joint, matter, r)[0];
  for (int v = 0; v < r.num_vertices(); ++v) {
    CHECK(syn_ab.charge(v) == compose(syn_a.charge(v), syn_b.charge(v)));
  }
  CHECK(vacuum_occupations(joint, matter, r) ==
        std::map<MatterIndex, std::int64_t>{{MatterIndex{0, 0, 0}, 1},
                                            {MatterIndex{2, 0, 0}, 1}});

  // Forward and backward transport cancel registerwise.
  DressedLineData balanced;
  balanced.add(0, 0, 2, 2);
  CHECK(induced_flux(balanced, matter, z2).is_identity());
  CHECK(vacuum_occupations(balanced, matter, r).empty());

  // Oscillator pairs keep particle and antiparticle counts separate.
  MatterContent osc = MatterContent::bosonic({BosonSpecies{rho, true, 3}});
  const auto osc_occ = vacuum_occupations(line, osc, r);
  CHECK(osc_occ == std::map<MatterIndex, std::int64_t>{
                       {MatterIndex{0, 0, 1}, 1}, {MatterIndex{1, 0, 0}, 1}});
  const auto osc_syn = gauss_map_vacuum(line, osc, r);
  CHECK(osc_syn[0].charge(0) == conjugate(rho));
  CHECK(osc_syn[0].charge(1) == rho);
  DressedLineData round_trip;
  round_trip.add(0, 0, 1, 1);
  CHECK(induced_flux(round_trip, osc, z2).is_identity());
  CHECK(vacuum_occupations(round_trip, osc, r) ==
        std::map<MatterIndex, std::int64_t>{{MatterIndex{0, 0, 0}, 1},
                                            {MatterIndex{0, 0, 1}, 1},
                                            {MatterIndex{1, 0, 0}, 1},
                                            {MatterIndex{1, 0, 1}, 1}});

  DressedLineData bad;
  bad.add(9, 0, 1, 0);
  CHECK_THROWS_AS(vacuum_occupations(bad, matter, r), IncompatibleError);
  DressedLineData bad_species;
  bad_species.add(0, 3, 1, 0);
  CHECK_THROWS_AS(vacuum_occupations(bad_species, matter, r),
                  IncompatibleError);
  DressedLineData negative;
  negative.hops[{0, 0}] = DressedLineData::Hop{-1, 0};
  CHECK_THROWS_AS(vacuum_occupations(negative, matter, r), IncompatibleError);
}
