#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gqec/codes.hpp"
#include "gqec/errors.hpp"

// Plain-text artifact formats: flat key/value model descriptions, error
// literal lists, and section tables. All parsers report locations as
// "name:line:col" inside ParseError messages; '#' starts a comment and
// blank lines are skipped everywhere.
namespace gqec {

// A parsed model description. Recognized keys:
//   group          = Z2 | Z3 | Z3xZ2 | ...       (required)
//   geometry       = ring(N) | torus(Lx,Ly) | explicit   (required)
//   links          = "t h, t h, ..."             (explicit geometry only)
//   vertices       = N                  (explicit geometry; default max+1)
//   root           = v                           (default 0)
//   tree           = bfs | "l,l,..."             (default bfs)
//   family         = pure-gauge | bosonic-gl | fermionic-gl |
//                    bosonic-vacuum | fermionic-vacuum     (required)
//   species        = count                       (bosonic families)
//   charge.<i>     = character exponents, comma-separated  (per species)
//   kind.<i>       = finite | oscillator         (default finite)
//   cutoff.<i>     = N                           (oscillator species only)
//   fermion-charge = character exponents         (fermionic families)
//   dimension-cap  = N                       (dense materialization bound)
struct SpecModel {
  GroupSpec group;
  Lattice lattice;
  int root;
  std::optional<std::vector<int>> tree_links;
  CodeFamily family;
  MatterContent matter;
  std::int64_t dimension_cap;
};

SpecModel parse_spec_text(const std::string& text, const std::string& name);
SpecModel load_spec_file(const std::string& path);

// Spanning tree (BFS or the explicit link list) plus code assembly.
CodeInstance build_from_spec(const SpecModel& model);

// Error list: one error literal per line. Each op's label is the literal.
std::vector<ErrorOp> parse_error_lines(const std::string& text,
                                       const std::string& name,
                                       const GroupSpec& group);
std::vector<ErrorOp> load_error_file(const std::string& path,
                                     const GroupSpec& group);

// The matter shift-tuple register order used by section tables: ascending
// (vertex, species, mode), oscillator pairs contributing two modes.
std::vector<MatterIndex> matter_order(const MatterContent& matter,
                                      int num_vertices);

// Section tables, one entry per line:
//   syndrome-tuple -> link-exponent-tuple [; matter-x-tuple]
// The syndrome tuple lists every vertex's charge exponents, the link tuple
// every link's flux exponents, and the optional matter tuple occupation
// shifts in `matter_order`. Multi-factor exponents appear as nested
// "(a,b)" groups. A "# label: <text>" comment names the table. Syndrome
// scope follows the family: all vertices for Gauss-law matter codes, root
// excluded for pure-gauge (and for the flux tables vacuum codes dress).
// Matter tuples are rejected for pure-gauge and vacuum families.
std::string section_to_text(const Section& sec, const CodeInstance& code);
Section parse_section_text(const std::string& text, const std::string& name,
                           const CodeInstance& code);
Section load_section_file(const std::string& path, const CodeInstance& code);

}  // namespace gqec
