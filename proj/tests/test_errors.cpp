#include <doctest.h>

#include <complex>
#include <random>
#include <vector>

#include "gqec/errors.hpp"
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

Fixture pure2() { return make(3, {2}, CodeFamily::PureGaugeGL); }

Fixture bos2() {
  GroupSpec g({2});
  return make(3, {2}, CodeFamily::BosonicGL,
              MatterContent::bosonic({BosonSpecies{g.character({1})}}));
}

Fixture ferm2() {
  GroupSpec g({2});
  return make(4, {2}, CodeFamily::FermionicGL,
              MatterContent::fermionic(g.character({1})));
}

Fixture ferm3() {
  GroupSpec g({3});
  return make(4, {3}, CodeFamily::FermionicGL,
              MatterContent::fermionic(g.character({1})));
}

Fixture vac2() {
  GroupSpec g({2});
  return make(3, {2}, CodeFamily::BosonicVacuum,
              MatterContent::bosonic({BosonSpecies{g.character({1})}}));
}

Fixture fvac2() {
  GroupSpec g({2});
  return make(4, {2}, CodeFamily::FermionicVacuum,
              MatterContent::fermionic(g.character({1})));
}

ErrorOp err(const Fixture& f, const std::string& text) {
  return parse_error_literal(f.group, text);
}

// Dense reference: the code-restricted matrix of Ea^dag Eb, classified as
// zero / one scalar / anything else.
enum class DenseKind { Zero, Scalar, Other };
struct DenseKL {
  DenseKind kind;
  std::complex<double> scalar;
};

DenseKL dense_kl(const CodeInstance& code, const ErrorOp& ea,
                 const ErrorOp& eb) {
  constexpr double tol = 1e-10;
  const auto layout = code.layout();
  const auto& basis = code.code_basis();
  const OpSequence forward = error_sequence(eb, code);
  const OpSequence backward = adjoint_sequence(error_sequence(ea, code));

  std::complex<double> scalar{0.0, 0.0};
  bool any = false;
  bool scalar_ok = true;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    StateVector s = StateVector::basis_state(layout, basis[j]);
    apply_sequence(s, forward);
    apply_sequence(s, backward);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const std::complex<double> m = s.amp(basis[i]);
      if (std::abs(m) > tol) any = true;
      if (i == j) {
        if (!any && std::abs(m) <= tol) continue;
        if (std::abs(scalar) <= tol && std::abs(m) > tol) {
          scalar = m;
        } else if (std::abs(m - scalar) > 1e-8) {
          scalar_ok = false;
        }
      } else if (std::abs(m) > tol) {
        scalar_ok = false;
      }
    }
  }
  if (!any) return {DenseKind::Zero, {}};
  if (!scalar_ok || std::abs(scalar) <= 1e-10) return {DenseKind::Other, {}};
  // Every diagonal entry must equal the shared scalar.
  for (std::size_t j = 0; j < basis.size(); ++j) {
    StateVector s = StateVector::basis_state(layout, basis[j]);
    apply_sequence(s, forward);
    apply_sequence(s, backward);
    if (std::abs(s.amp(basis[j]) - scalar) > 1e-8) {
      return {DenseKind::Other, {}};
    }
  }
  return {DenseKind::Scalar, scalar};
}

void check_against_dense(const CodeInstance& code, const ErrorOp& ea,
                         const ErrorOp& eb) {
  const KLVerdict verdict = kl_check_pair(ea, eb, code);
  const DenseKL dense = dense_kl(code, ea, eb);
  switch (verdict.outcome) {
    case KLOutcome::OrthogonalCorrectable:
      CHECK(dense.kind == DenseKind::Zero);
      break;
    case KLOutcome::IdenticalOnCode: {
      CHECK(dense.kind == DenseKind::Scalar);
      const std::complex<double> expect =
          verdict.relative_phase.to_complex();
      CHECK(std::abs(dense.scalar - expect) < 1e-8);
      break;
    }
    case KLOutcome::Violation:
      CHECK(dense.kind == DenseKind::Other);
      break;
  }
}

}  // namespace

TEST_CASE("error literals parse, print, and reject malformed tokens") {
  GroupSpec z2({2});
  ErrorOp e = parse_error_literal(z2, "W[0:1] U[1:1] X[1,0:1] Z[2,0:1/2]");
  CHECK(e.links.exponent(0) == z2.character({1}));
  CHECK(e.link_z.at(1) == z2.element({1}));
  CHECK(e.matter_x.at(MatterIndex{1, 0, 0}) == 1);
  CHECK(e.matter_z.at(MatterIndex{2, 0, 0}) == RationalPhase(1, 2));
  CHECK(e.to_string() == "W[0:1] U[1:1] X[1,0:1] Z[2,0:1/2]");

  CHECK(parse_error_literal(z2, "1").is_identity());
  CHECK(parse_error_literal(z2, "  ").is_identity());
  // Tokens accumulate: W twice on one link composes, X adds shifts.
  CHECK(parse_error_literal(z2, "W[0:1] W[0:1]").links.is_identity());
  CHECK(parse_error_literal(z2, "X[0,0:1] X[0,0:2]")
            .matter_x.at(MatterIndex{0, 0, 0}) == 3);
  // Antiparticle-mode suffix.
  CHECK(parse_error_literal(z2, "X[0,0,-:2]").matter_x.at(
            MatterIndex{0, 0, 1}) == 2);
  CHECK(parse_error_literal(z2, "Z[0,0:3]").matter_z.at(MatterIndex{0, 0, 0}) ==
        RationalPhase(3, 1));

  CHECK_THROWS_AS(parse_error_literal(z2, "Q[0:1]"), ParseError);
  CHECK_THROWS_AS(parse_error_literal(z2, "W[0]"), ParseError);
  CHECK_THROWS_AS(parse_error_literal(z2, "W[0:1,0]"), ParseError);
  CHECK_THROWS_AS(parse_error_literal(z2, "X[0:1]"), ParseError);
  CHECK_THROWS_AS(parse_error_literal(z2, "X[0,0,*:1]"), ParseError);
  CHECK_THROWS_AS(parse_error_literal(z2, "Z[0,0:1/0]"), ParseError);
  CHECK_THROWS_AS(parse_error_literal(z2, "W[a:1]"), ParseError);

  GroupSpec z6({3, 2});
  ErrorOp multi = parse_error_literal(z6, "W[2:2,1] U[0:1,0]");
  CHECK(multi.links.exponent(2) == z6.character({2, 1}));
  CHECK(multi.link_z.at(0) == z6.element({1, 0}));
}

TEST_CASE("error data is validated against the code") {
  Fixture p = pure2();
  CHECK_THROWS_AS(
      error_sequence(parse_error_literal(GroupSpec({3}), "W[0:1]"), p.code),
      SpecMismatch);
  CHECK_THROWS_AS(error_sequence(err(p, "W[5:1]"), p.code), IncompatibleError);
  CHECK_THROWS_AS(error_sequence(err(p, "U[3:1]"), p.code), IncompatibleError);
  CHECK_THROWS_AS(error_sequence(err(p, "X[0,0:1]"), p.code),
                  IncompatibleError);
  CHECK_THROWS_AS(error_sequence(err(p, "Z[0,0:1/2]"), p.code),
                  IncompatibleError);

  Fixture b = bos2();
  CHECK_THROWS_AS(error_sequence(err(b, "X[0,1:1]"), b.code),
                  IncompatibleError);  // no species 1
  CHECK_THROWS_AS(error_sequence(err(b, "X[0,0,-:1]"), b.code),
                  IncompatibleError);  // finite species has no mode 1
  CHECK_THROWS_AS(error_sequence(err(b, "X[7,0:1]"), b.code),
                  IncompatibleError);

  // Oscillator pairs: shifts must stay within the truncation and forward.
  GroupSpec z2({2});
  Fixture osc = make(
      3, {2}, CodeFamily::BosonicVacuum,
      MatterContent::bosonic({BosonSpecies{z2.character({1}), true, 2}}));
  CHECK_THROWS_AS(error_sequence(err(osc, "X[0,0:3]"), osc.code),
                  OccupationOutOfRange);
  CHECK_THROWS_AS(error_sequence(err(osc, "X[0,0:-1]"), osc.code),
                  IncompatibleError);

  // Fermion toggles reduce mod 2: a double toggle is the identity.
  Fixture f = ferm2();
  CodeSyndrome s = syndrome_of(err(f, "X[0,0:2]"), f.code);
  CHECK(s.charges.is_trivial());
  CHECK(s.x_bits == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("syndromes dispatch by code family") {
  Fixture p = pure2();
  Character chi = p.group.character({1});

  CodeSyndrome flip0 = syndrome_of(err(p, "W[0:1]"), p.code);
  CHECK(flip0.charges.charge(0) == chi);
  CHECK(flip0.charges.charge(1) == chi);
  CHECK(flip0.charges.charge(2).is_trivial());
  CHECK(flip0.charges.scope() == GaussScope::ExcludeRoot);
  // Electric decorations are syndrome-silent.
  CHECK(syndrome_of(err(p, "W[0:1] U[1:1]"), p.code) == flip0);
  CHECK(syndrome_of(err(p, "W[0:1] W[1:1] W[2:1]"), p.code).charges
            .is_trivial());

  Fixture b = bos2();
  CodeSyndrome flip1 = syndrome_of(err(b, "X[1,0:1]"), b.code);
  CHECK(flip1.charges.charge(0).is_trivial());
  CHECK(flip1.charges.charge(1) == chi);
  CHECK(flip1.charges.charge(2).is_trivial());
  CHECK(flip1.charges.scope() == GaussScope::AllVertices);
  // A flux line ending on a matter flip screens the shared endpoint.
  CHECK(syndrome_of(err(b, "W[0:1] X[0,0:1]"), b.code) == flip1);

  Fixture f = ferm2();
  CodeSyndrome fs = syndrome_of(err(f, "X[0,0:1] X[1,0:1] W[1:1]"), f.code);
  CHECK(fs.x_bits == std::vector<int>{1, 1, 0, 0});
  CHECK(fs.charges.charge(1) == f.group.character({1}));
  CHECK(fs.charges.charge(2) == f.group.character({1}));
  CHECK(fs.to_string() == "x=(1,1,0,0) (0,1,1,0)");

  // Vacuum codes accept only gauge-invariant errors and report the
  // occupations they imprint.
  Fixture v = vac2();
  CHECK_THROWS_AS(syndrome_of(err(v, "X[0,0:1]"), v.code), IncompatibleError);
  CHECK_THROWS_AS(syndrome_of(err(v, "W[0:1]"), v.code), IncompatibleError);
  CodeSyndrome vs = syndrome_of(err(v, "X[0,0:1] X[1,0:1] W[0:1]"), v.code);
  CHECK(vs.occupations.at(MatterIndex{0, 0, 0}) == 1);
  CHECK(vs.occupations.at(MatterIndex{1, 0, 0}) == 1);
  CHECK(vs.to_string() == "n[0,0:1] n[1,0:1]");

  Fixture fv = fvac2();
  CHECK_THROWS_AS(syndrome_of(err(fv, "X[0,0:1]"), fv.code),
                  IncompatibleError);
  CodeSyndrome fvs = syndrome_of(err(fv, "X[0,0:1] X[1,0:1] W[0:1]"), fv.code);
  CHECK(fvs.occupations.at(MatterIndex{0, 0, 0}) == 1);  // even site filled
  CHECK(fvs.occupations.at(MatterIndex{1, 0, 0}) == 0);  // odd site emptied
}

TEST_CASE("symbolic syndromes match dense stabilizer phases") {
  auto star_eigenvalue = [](const CodeInstance& code, const StateVector& s,
                            int v, const GroupElement& g) {
    std::int64_t pivot = -1;
    for (std::int64_t i = 0; i < s.dim(); ++i) {
      if (std::abs(s.amp(i)) > 1e-9) {
        pivot = i;
        break;
      }
    }
    REQUIRE(pivot >= 0);
    StateVector t = s;
    apply_sequence(t, star_operator_sequence(code, v, g));
    return t.amp(pivot) / s.amp(pivot);
  };

  for (bool bosonic : {false, true}) {
    Fixture f = bosonic ? bos2() : pure2();
    std::vector<std::string> texts = {"W[0:1]", "W[1:1] U[0:1]",
                                      "W[0:1] W[2:1]"};
    if (bosonic) {
      texts.push_back("X[2,0:1]");
      texts.push_back("W[1:1] X[1,0:1] Z[0,0:1/2]");
    }
    for (const std::string& text : texts) {
      const ErrorOp e = err(f, text);
      const CodeSyndrome s = syndrome_of(e, f.code);
      for (std::int64_t cw : f.code.code_basis()) {
        StateVector psi = StateVector::basis_state(f.code.layout(), cw);
        apply_sequence(psi, error_sequence(e, f.code));
        for (int v = 0; v < f.lat.num_vertices(); ++v) {
          for (const GroupElement& g : f.group.elements()) {
            const std::complex<double> expect =
                pair_phase(s.charges.charge(v), g).to_complex();
            CHECK(std::abs(star_eigenvalue(f.code, psi, v, g) - expect) <
                  1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("pairwise classification separates orthogonal, identical, and "
          "violating pairs") {
  Fixture p = pure2();

  CHECK(kl_check_pair(err(p, "W[0:1]"), err(p, "W[1:1]"), p.code).outcome ==
        KLOutcome::OrthogonalCorrectable);
  CHECK(kl_check_pair(err(p, "W[0:1]"), err(p, "W[0:1]"), p.code).outcome ==
        KLOutcome::IdenticalOnCode);

  // A closed flux loop shares the trivial syndrome with the identity but
  // acts as the holonomy logical.
  KLVerdict loop =
      kl_check_pair(err(p, "1"), err(p, "W[0:1] W[1:1] W[2:1]"), p.code);
  CHECK(loop.outcome == KLOutcome::Violation);
  CHECK(loop.witness.find("holonomy") != std::string::npos);
  CHECK(loop.witness.find("W[0:1]") != std::string::npos);

  // A lone electric decoration reads the holonomy sector (the Z logical).
  KLVerdict electric = kl_check_pair(err(p, "1"), err(p, "U[0:1]"), p.code);
  CHECK(electric.outcome == KLOutcome::Violation);
  CHECK(electric.witness.find("holonomy sector") != std::string::npos);

  // Two decorations whose loop pairings cancel act as one scalar.
  KLVerdict pair_u =
      kl_check_pair(err(p, "1"), err(p, "U[0:1] U[1:1]"), p.code);
  CHECK(pair_u.outcome == KLOutcome::IdenticalOnCode);
  CHECK(pair_u.relative_phase.is_zero());

  Fixture b = bos2();
  // Same syndrome via different occupation moves: a dressed logical.
  KLVerdict dressed = kl_check_pair(err(b, "X[1,0:1]"),
                                    err(b, "W[0:1] X[0,0:1]"), b.code);
  CHECK(dressed.outcome == KLOutcome::Violation);
  CHECK(dressed.witness.find("occupation residual") != std::string::npos);
  // Occupation phases that differ across matter sectors violate.
  KLVerdict zvaries = kl_check_pair(err(b, "X[1,0:1]"),
                                    err(b, "X[1,0:1] Z[1,0:1/2]"), b.code);
  CHECK(zvaries.outcome == KLOutcome::Violation);
  CHECK(zvaries.witness.find("Z[1,0:1/2]") != std::string::npos);

  // Vacuum pair with a constant decoration: identical up to the phase the
  // occupied site contributes.
  Fixture v = vac2();
  KLVerdict vphase =
      kl_check_pair(err(v, "X[0,0:1] X[1,0:1] W[0:1]"),
                    err(v, "X[0,0:1] X[1,0:1] W[0:1] Z[0,0:1/2]"), v.code);
  CHECK(vphase.outcome == KLOutcome::IdenticalOnCode);
  CHECK(vphase.relative_phase == RationalPhase(1, 2));

  // Dense cross-checks over assorted pairs per family.
  check_against_dense(p.code, err(p, "W[0:1]"), err(p, "W[1:1]"));
  check_against_dense(p.code, err(p, "1"), err(p, "U[0:1]"));
  check_against_dense(p.code, err(p, "1"), err(p, "U[0:1] U[1:1]"));
  check_against_dense(p.code, err(p, "W[0:1]"), err(p, "W[0:1] U[1:1]"));
  check_against_dense(p.code, err(p, "1"), err(p, "W[0:1] W[1:1] W[2:1]"));
  check_against_dense(b.code, err(b, "X[1,0:1]"), err(b, "W[0:1] X[0,0:1]"));
  check_against_dense(b.code, err(b, "X[1,0:1]"),
                      err(b, "X[1,0:1] Z[1,0:1/2]"));
  check_against_dense(b.code, err(b, "W[0:1] X[0,0:1] Z[2,0:1/2]"),
                      err(b, "W[0:1] X[0,0:1] Z[2,0:1/2]"));
  check_against_dense(v.code, err(v, "X[0,0:1] X[1,0:1] W[0:1]"),
                      err(v, "X[0,0:1] X[1,0:1] W[0:1] Z[0,0:1/2]"));
}

TEST_CASE("fermionic pairs classify by coarse distinguishability") {
  Fixture f = ferm2();
  const Character chi_f = f.group.character({1});
  const Character one = f.group.trivial_character();

  // Equal toggle labels: any base-charge difference separates them.
  CHECK(distinguishable_at_vertex(f.code, 0, one, 0, chi_f));
  CHECK_FALSE(distinguishable_at_vertex(f.code, 0, one, 0, one));
  // Opposite labels: the difference must dodge chiF and its conjugate.
  CHECK_FALSE(distinguishable_at_vertex(f.code, 0, one, 1, chi_f));
  CHECK(distinguishable_at_vertex(f.code, 0, one, 1, one));

  Fixture f3 = ferm3();
  const Character q1 = f3.group.character({1});
  CHECK(distinguishable_at_vertex(f3.code, 0, q1, 1, q1));
  CHECK_FALSE(distinguishable_at_vertex(f3.code, 0, q1,
                                        1, f3.group.character({2})));

  // Toggles at different vertices measure apart.
  CHECK(kl_check_pair(err(f, "X[0,0:1]"), err(f, "X[1,0:1]"), f.code)
            .outcome == KLOutcome::OrthogonalCorrectable);
  CHECK(kl_check_pair(err(f, "W[0:1]"), err(f, "W[1:1]"), f.code).outcome ==
        KLOutcome::OrthogonalCorrectable);

  // Occupation toggle versus phased toggle: the phase residual varies with
  // the local occupation, the classic on-site violation.
  KLVerdict xy = kl_check_pair(err(f, "X[1,0:1]"),
                               err(f, "X[1,0:1] Z[1,0:1/2]"), f.code);
  CHECK(xy.outcome == KLOutcome::Violation);
  CHECK(xy.witness.find("Z[1,0:1/2]") != std::string::npos);

  // A toggle pair and the flux line between them fall into one coarse bin
  // at every vertex: a confusable residual, not a correctable pair.
  KLVerdict confusable =
      kl_check_pair(err(f, "X[0,0:1] X[1,0:1]"), err(f, "W[0:1]"), f.code);
  CHECK(confusable.outcome == KLOutcome::Violation);
  CHECK(confusable.witness.find("confusable") != std::string::npos);

  check_against_dense(f.code, err(f, "X[0,0:1]"), err(f, "X[1,0:1]"));
  check_against_dense(f.code, err(f, "X[1,0:1]"),
                      err(f, "X[1,0:1] Z[1,0:1/2]"));
  check_against_dense(f.code, err(f, "X[0,0:1] X[1,0:1]"), err(f, "W[0:1]"));
  check_against_dense(f.code, err(f, "W[0:1]"), err(f, "W[0:1]"));
  check_against_dense(f.code, err(f, "W[0:1]"), err(f, "W[1:1]"));
  // Jordan-Wigner strings cancel between matching toggles.
  check_against_dense(f.code, err(f, "X[0,0:1] X[2,0:1] W[0:1] W[1:1]"),
                      err(f, "X[0,0:1] X[2,0:1] W[0:1] W[1:1] Z[2,0:1/2]"));

  Fixture fv = fvac2();
  check_against_dense(fv.code, err(fv, "X[0,0:1] X[1,0:1] W[0:1]"),
                      err(fv, "X[0,0:1] X[1,0:1] W[0:1] Z[1,0:1/2]"));
}

TEST_CASE("section tables lift to maximal correctable sets") {
  Fixture p = pure2();

  MaxSetResult frame =
      max_set_from_section(tree_frame_section(p.lat, p.tree, p.group), p.code);
  CHECK(frame.validation.correctable);
  CHECK(frame.validation.maximal);
  CHECK(frame.validation.base_size == 4);
  CHECK(frame.validation.distinct_syndromes == 4);

  // Explicit single-flip table: one link flip per nontrivial syndrome.
  auto table_from = [&](const std::vector<std::string>& texts,
                        const std::string& label) {
    Section sec(label);
    for (const std::string& text : texts) {
      ErrorOp e = err(p, text);
      sec.add(SectionEntry{syndrome_of(e, p.code).charges, e.links,
                           e.matter_x, text});
    }
    return sec;
  };
  MaxSetResult single = max_set_from_section(
      table_from({"1", "W[0:1]", "W[1:1]", "W[2:1]"}, "single-flip"), p.code);
  CHECK(single.validation.correctable);
  CHECK(single.validation.maximal);

  // Double-flip table: the complementary representative in each fiber.
  MaxSetResult dbl = max_set_from_section(
      table_from({"1", "W[1:1] W[2:1]", "W[0:1] W[2:1]", "W[0:1] W[1:1]"},
                 "double-flip"),
      p.code);
  CHECK(dbl.validation.correctable);
  CHECK(dbl.validation.maximal);

  // Mixing representatives from one fiber is not correctable: the pair
  // differs by the Wilson loop.
  SetValidation mixed = validate_error_set(
      {err(p, "W[0:1]"), err(p, "W[1:1] W[2:1]")}, p.code);
  CHECK_FALSE(mixed.correctable);
  CHECK(mixed.violation_witness.find("holonomy") != std::string::npos);
  CHECK(mixed.violation_witness.find("W[0:1] W[1:1] W[2:1]") !=
        std::string::npos);

  // An undersized but clean set is correctable without being maximal.
  SetValidation partial =
      validate_error_set({err(p, "1"), err(p, "W[0:1]")}, p.code);
  CHECK(partial.correctable);
  CHECK_FALSE(partial.maximal);
  CHECK(partial.base_size == 4);

  // Declared syndromes must match the realized ones.
  Section lying("lying");
  lying.add(SectionEntry{syndrome_of(err(p, "W[1:1]"), p.code).charges,
                         err(p, "W[0:1]").links, {}, "mislabelled"});
  CHECK_THROWS_AS(max_set_from_section(lying, p.code), NotASection);

  Fixture b = bos2();
  MaxSetResult flips = max_set_from_section(
      matter_flip_section(b.lat, b.group, b.code.matter(), 0), b.code);
  CHECK(flips.validation.correctable);
  CHECK(flips.validation.maximal);
  CHECK(flips.validation.base_size == 8);

  Fixture f = ferm2();
  CHECK_THROWS_AS(
      validate_error_set({err(f, "1"), err(f, "W[0:1]")}, f.code),
      IncompatibleError);
}

TEST_CASE("recovery rounds restore codewords") {
  Fixture p = pure2();
  Section sec = tree_frame_section(p.lat, p.tree, p.group);

  for (const SectionEntry& entry : sec.entries()) {
    ErrorOp e(p.group);
    e.links = entry.links;
    for (std::int64_t cw : p.code.code_basis()) {
      RoundReport r = simulate_round(p.code, cw, e, sec);
      CHECK(r.success);
      CHECK(r.fidelity > 1.0 - 1e-10);
      CHECK(r.syndrome == entry.syndrome.to_string());
    }
  }

  // Decorated error, same syndrome: recovery strips the flux but the
  // decoration survives as a codeword-dependent phase.
  {
    RoundReport r0 = simulate_round(p.code, p.code.code_basis()[0],
                                    err(p, "W[0:1] U[1:1]"), sec);
    CHECK(r0.success);
    RoundReport r1 = simulate_round(p.code, p.code.code_basis()[1],
                                    err(p, "W[0:1] U[1:1]"), sec);
    CHECK_FALSE(r1.success);
    CHECK(r1.fidelity > 1.0 - 1e-9);
    CHECK(r1.note.find("global phase") != std::string::npos);
  }

  // The Wilson loop hides in the trivial syndrome and defeats recovery.
  {
    RoundReport r = simulate_round(p.code, p.code.code_basis()[0],
                                   err(p, "W[0:1] W[1:1] W[2:1]"), sec);
    CHECK_FALSE(r.success);
    CHECK(r.fidelity < 1e-9);
    CHECK(r.note.find("logical failure") != std::string::npos);
  }

  // Syndromes outside the table are reported, not silently dropped.
  {
    Section partial("identity-only");
    ErrorOp id(p.group);
    partial.add(SectionEntry{syndrome_of(id, p.code).charges, id.links, {},
                             "1"});
    RoundReport r = simulate_round(p.code, p.code.code_basis()[0],
                                   err(p, "W[0:1]"), partial);
    CHECK_FALSE(r.success);
    CHECK(r.note.find("missing from section") != std::string::npos);
  }

  CHECK_THROWS_AS(simulate_round(p.code, 1, err(p, "W[0:1]"), sec),
                  IncompatibleError);  // index 1 is not a codeword

  // Bosonic family: matter-flip recoveries over the whole code basis.
  Fixture b = bos2();
  Section bsec = matter_flip_section(b.lat, b.group, b.code.matter(), 0);
  for (const SectionEntry& entry : bsec.entries()) {
    ErrorOp e(b.group);
    e.links = entry.links;
    e.matter_x = entry.matter_x;
    for (std::int64_t cw : b.code.code_basis()) {
      CHECK(simulate_round(b.code, cw, e, bsec).success);
    }
  }
  // Equal-syndrome flux realization recovered by the matter flip: the
  // residual dressed hop is an honest logical failure.
  RoundReport hop = simulate_round(b.code, b.code.code_basis()[0],
                                   err(b, "W[0:1] X[0,0:1]"), bsec);
  CHECK_FALSE(hop.success);
  CHECK(hop.note.find("logical failure") != std::string::npos);

  // Seeded random rounds across the section stay deterministic and clean.
  std::mt19937_64 rng(123);
  for (int round = 0; round < 25; ++round) {
    const SectionEntry& entry =
        bsec.entries()[rng() % bsec.entries().size()];
    ErrorOp e(b.group);
    e.links = entry.links;
    e.matter_x = entry.matter_x;
    const std::int64_t cw =
        b.code.code_basis()[rng() % b.code.code_basis().size()];
    CHECK(simulate_round(b.code, cw, e, bsec).success);
  }
}

TEST_CASE("bin schemes enumerate maximal coarse measurements") {
  Fixture f = ferm2();

  std::vector<BinScheme> plain = fermionic_bin_schemes(f.code, {});
  REQUIRE(plain.size() == 1);
  for (const auto& bins : plain[0].vertex_bins) {
    CHECK(bins.size() == 2);  // every base charge, toggle-free
    for (const VertexBin& bin : bins) CHECK(bin.x == 0);
  }

  std::vector<BinScheme> at1 = fermionic_bin_schemes(f.code, {1});
  CHECK(at1.size() == 3);
  std::vector<BinScheme> at02 = fermionic_bin_schemes(f.code, {0, 2});
  CHECK(at02.size() == 9);

  // Every listed family is pairwise distinguishable and maximal: no label
  // outside it is distinguishable from all members.
  auto check_maximal = [&](const CodeInstance& code, const BinScheme& scheme) {
    const GroupSpec& g = code.group();
    for (const auto& bins : scheme.vertex_bins) {
      for (std::size_t i = 0; i < bins.size(); ++i) {
        for (std::size_t j = i + 1; j < bins.size(); ++j) {
          CHECK(distinguishable_at_vertex(code, bins[i].x, bins[i].base_charge,
                                          bins[j].x, bins[j].base_charge));
        }
      }
      for (int x = 0; x < 2; ++x) {
        for (const Character& q : g.characters()) {
          bool member = false;
          for (const VertexBin& bin : bins) {
            member = member || (bin.x == x && bin.base_charge == q);
          }
          if (member) continue;
          bool separates_all = true;
          for (const VertexBin& bin : bins) {
            separates_all =
                separates_all && distinguishable_at_vertex(
                                     code, bin.x, bin.base_charge, x, q);
          }
          CHECK_FALSE(separates_all);
        }
      }
    }
  };
  for (const BinScheme& scheme : at1) check_maximal(f.code, scheme);

  // Order-3 fermion charge: toggled families cap below the group order.
  Fixture f3 = ferm3();
  std::vector<BinScheme> mixed = fermionic_bin_schemes(f3.code, {2});
  CHECK(mixed.size() == 4);  // one all-toggled family, three two-label ones
  int full = 0;
  int pairs = 0;
  for (const BinScheme& scheme : mixed) {
    check_maximal(f3.code, scheme);
    const auto& bins = scheme.vertex_bins[2];
    if (bins.size() == 3) {
      ++full;
      for (const VertexBin& bin : bins) CHECK(bin.x == 1);
    } else {
      REQUIRE(bins.size() == 2);
      ++pairs;
      CHECK(bins[0].base_charge == bins[1].base_charge);
      CHECK(bins[0].x + bins[1].x == 1);
    }
  }
  CHECK(full == 1);
  CHECK(pairs == 3);

  CHECK_THROWS_AS(fermionic_bin_schemes(f.code, {9}), IncompatibleError);
  Fixture p = pure2();
  CHECK_THROWS_AS(fermionic_bin_schemes(p.code, {}), FamilyMismatch);
}

TEST_CASE("coarse projectors tile the code and match distinguishability") {
  Fixture f = ferm2();
  const auto layout = f.code.layout();
  const std::int64_t dim = layout->total_dim();

  // The all-trivial toggle-free labels conjoin to exactly the code mask.
  std::vector<std::uint8_t> conj(static_cast<std::size_t>(dim), 1);
  for (int v = 0; v < f.lat.num_vertices(); ++v) {
    const auto m =
        coarse_projector_mask(f.code, v, 0, f.group.trivial_character());
    for (std::int64_t i = 0; i < dim; ++i) {
      conj[static_cast<std::size_t>(i)] &= m[static_cast<std::size_t>(i)];
    }
  }
  CHECK(conj == f.code.code_mask());

  // Mask overlap at a vertex reproduces the symbolic distinguishability.
  auto overlap = [&](int xa, const Character& qa, int xb, const Character& qb) {
    const auto ma = coarse_projector_mask(f.code, 0, xa, qa);
    const auto mb = coarse_projector_mask(f.code, 0, xb, qb);
    for (std::int64_t i = 0; i < dim; ++i) {
      if (ma[static_cast<std::size_t>(i)] && mb[static_cast<std::size_t>(i)]) {
        return true;
      }
    }
    return false;
  };
  for (int xa = 0; xa < 2; ++xa) {
    for (int xb = 0; xb < 2; ++xb) {
      for (const Character& qa : f.group.characters()) {
        for (const Character& qb : f.group.characters()) {
          if (xa == xb && qa == qb) continue;
          CHECK(overlap(xa, qa, xb, qb) ==
                !distinguishable_at_vertex(f.code, xa, qa, xb, qb));
        }
      }
    }
  }

  // Errored codewords land inside the projector labelled by their syndrome.
  for (const std::string& text :
       {std::string("X[0,0:1] X[1,0:1]"), std::string("W[1:1]"),
        std::string("X[2,0:1] W[1:1] W[2:1]")}) {
    const ErrorOp e = err(f, text);
    const CodeSyndrome s = syndrome_of(e, f.code);
    for (std::int64_t cw : f.code.code_basis()) {
      StateVector psi = StateVector::basis_state(layout, cw);
      apply_sequence(psi, error_sequence(e, f.code));
      for (int v = 0; v < f.lat.num_vertices(); ++v) {
        const auto m = coarse_projector_mask(
            f.code, v, s.x_bits[static_cast<std::size_t>(v)],
            s.charges.charge(v));
        for (std::int64_t i = 0; i < dim; ++i) {
          if (std::abs(psi.amp(i)) > 1e-12) {
            CHECK(m[static_cast<std::size_t>(i)] == 1);
          }
        }
      }
    }
  }

  // Order-3 charge: a mixed family's two projectors stay disjoint.
  Fixture f3 = ferm3();
  const std::int64_t dim3 = f3.code.layout()->total_dim();
  const Character q1 = f3.group.character({1});
  const auto m0 = coarse_projector_mask(f3.code, 0, 0, q1);
  const auto m1 = coarse_projector_mask(f3.code, 0, 1, q1);
  bool disjoint = true;
  for (std::int64_t i = 0; i < dim3; ++i) {
    disjoint = disjoint && !(m0[static_cast<std::size_t>(i)] &&
                             m1[static_cast<std::size_t>(i)]);
  }
  CHECK(disjoint);
  // ... while the chiF-shifted toggle-free label overlaps the toggled one.
  const auto mclash = coarse_projector_mask(f3.code, 0, 0,
                                            f3.group.character({2}));
  bool clash = false;
  for (std::int64_t i = 0; i < dim3; ++i) {
    clash = clash || (mclash[static_cast<std::size_t>(i)] &&
                      m1[static_cast<std::size_t>(i)]);
  }
  CHECK(clash);

  CHECK_THROWS_AS(
      coarse_projector_mask(f.code, 9, 0, f.group.trivial_character()),
      IncompatibleError);
  CHECK_THROWS_AS(
      coarse_projector_mask(f.code, 0, 2, f.group.trivial_character()),
      IncompatibleError);
}

TEST_CASE("flux dresses into the fermionic vacuum only where sites can "
          "screen it") {
  Fixture fv = fvac2();
  const Character chi = fv.group.character({1});

  // Trivial flux: admissible with no matter content.
  FermionDressing none =
      fermionic_vacuum_admissible(WilsonLineProduct(fv.group), fv.code);
  CHECK(none.admissible);
  CHECK(none.dressed.is_identity());

  // A single link between opposite-parity neighbors is screened by a
  // creation at the (even) tail and an annihilation at the (odd) head.
  WilsonLineProduct hop(fv.group);
  hop.multiply(0, chi);
  FermionDressing single = fermionic_vacuum_admissible(hop, fv.code);
  CHECK(single.admissible);
  CHECK(single.dressed.links == hop);
  CHECK(single.dressed.matter_x ==
        MatterShift{{MatterIndex{0, 0, 0}, 1}, {MatterIndex{1, 0, 0}, 1}});
  CHECK_NOTHROW(syndrome_of(single.dressed, fv.code));

  // Self-conjugate fermion charge: every flux pattern is screenable, and
  // undressing returns the flux (a bijection on the admissible set).
  for (int bits = 0; bits < 16; ++bits) {
    WilsonLineProduct w(fv.group);
    for (int l = 0; l < 4; ++l) {
      if ((bits >> l) & 1) w.multiply(l, chi);
    }
    FermionDressing d = fermionic_vacuum_admissible(w, fv.code);
    CHECK(d.admissible);
    CHECK(d.dressed.links == w);
    CHECK_NOTHROW(syndrome_of(d.dressed, fv.code));
  }

  // Order-4 fermion charge: the orientation must match the staggering.
  GroupSpec z4({4});
  Lattice lat = Lattice::ring(4);
  SpanningTree tree = SpanningTree::build(lat, 0);
  CodeInstance code4 =
      build_code(lat, z4, tree, MatterContent::fermionic(z4.character({1})),
                 CodeFamily::FermionicVacuum);
  const Character chi4 = z4.character({1});

  WilsonLineProduct forward(z4);
  forward.multiply(0, chi4);  // divergence chi4 at the even tail: unscreenable
  FermionDressing blocked = fermionic_vacuum_admissible(forward, code4);
  CHECK_FALSE(blocked.admissible);
  CHECK(blocked.blocking_vertex == 0);
  CHECK(blocked.to_string().find("vertex 0") != std::string::npos);

  WilsonLineProduct backward(z4);
  backward.multiply(0, power(chi4, 3));  // conj divergence: screenable
  FermionDressing good = fermionic_vacuum_admissible(backward, code4);
  CHECK(good.admissible);
  CHECK(good.dressed.matter_x ==
        MatterShift{{MatterIndex{0, 0, 0}, 1}, {MatterIndex{1, 0, 0}, 1}});

  // chi^2 divergence cannot be screened by a single toggle of charge chi.
  WilsonLineProduct doubled(z4);
  doubled.multiply(0, power(chi4, 2));
  FermionDressing twice = fermionic_vacuum_admissible(doubled, code4);
  CHECK_FALSE(twice.admissible);
  CHECK(twice.blocking_vertex == 0);
  // ... and the naive toggle candidate is rejected as non-invariant.
  ErrorOp naive(z4);
  naive.links = doubled;
  naive.matter_x[MatterIndex{0, 0, 0}] = 1;
  naive.matter_x[MatterIndex{1, 0, 0}] = 1;
  CHECK_THROWS_AS(syndrome_of(naive, code4), IncompatibleError);

  Fixture v = vac2();
  CHECK_THROWS_AS(
      fermionic_vacuum_admissible(WilsonLineProduct(v.group), v.code),
      FamilyMismatch);
  CHECK_THROWS_AS(
      fermionic_vacuum_admissible(WilsonLineProduct(GroupSpec({3})), fv.code),
      SpecMismatch);
}
