#pragma once

#include <stdexcept>
#include <string>

// Exception taxonomy for the gauge-code library. Each condition gets its own
// type so callers and tests can catch precisely; all derive from
// std::runtime_error and carry a human-readable message with a bracketed
// context prefix, e.g. "[lattice] disconnected: vertex 3 unreachable".
namespace gqec {

#define GQEC_DEFINE_EXCEPTION(Name)                            \
  class Name : public std::runtime_error {                     \
   public:                                                     \
    explicit Name(const std::string& msg)                      \
        : std::runtime_error(msg) {}                           \
  }

// Group / element mismatches (operands from different groups, bad residues).
GQEC_DEFINE_EXCEPTION(SpecMismatch);

// Lattice construction and validation.
GQEC_DEFINE_EXCEPTION(TooSmall);
GQEC_DEFINE_EXCEPTION(NotBipartite);
GQEC_DEFINE_EXCEPTION(OddVertexCount);
GQEC_DEFINE_EXCEPTION(Disconnected);

// Spanning-tree construction.
GQEC_DEFINE_EXCEPTION(InvalidExplicitTree);

// Charge configurations / frame fields.
GQEC_DEFINE_EXCEPTION(RootChargeSupplied);
GQEC_DEFINE_EXCEPTION(LinkInTree);

// State-space operations.
GQEC_DEFINE_EXCEPTION(NotGaugeInvariant);
GQEC_DEFINE_EXCEPTION(OccupationOutOfRange);
GQEC_DEFINE_EXCEPTION(CutoffExceeded);
GQEC_DEFINE_EXCEPTION(DimensionCap);

// Sections and syndrome tables.
GQEC_DEFINE_EXCEPTION(NotASection);
GQEC_DEFINE_EXCEPTION(BaseNotEnumerable);

// Code construction.
GQEC_DEFINE_EXCEPTION(IncompatibleMatter);
GQEC_DEFINE_EXCEPTION(FamilyMismatch);

// Error operators.
GQEC_DEFINE_EXCEPTION(IncompatibleError);
GQEC_DEFINE_EXCEPTION(KLViolationInside);

// Code equivalence maps.
GQEC_DEFINE_EXCEPTION(KernelNontrivial);

// Text format parsing (spec files, section files, error literals).
GQEC_DEFINE_EXCEPTION(ParseError);

#undef GQEC_DEFINE_EXCEPTION

}  // namespace gqec
