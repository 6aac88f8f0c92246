#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gqec/gauss_map.hpp"
#include "gqec/hilbert.hpp"
#include "gqec/lattice.hpp"
#include "gqec/matter.hpp"
#include "gqec/qrf.hpp"

// Stabilizer codes carved out of lattice gauge state spaces. Gauss-law (GL)
// families keep every basis state whose total charge is trivial at each
// vertex; vacuum families additionally pin the matter occupations to the
// local vacuum (bosonic: zero quanta; fermionic: the staggered half-filled
// configuration), leaving exactly the divergence-free flux loop space.
namespace gqec {

enum class CodeFamily {
  PureGaugeGL,
  BosonicGL,
  FermionicGL,
  BosonicVacuum,
  FermionicVacuum,
};

std::string to_string(CodeFamily family);
bool family_is_vacuum(CodeFamily family);
bool family_is_fermionic(CodeFamily family);
bool family_has_matter(CodeFamily family);

class CodeInstance;

// Assembles a code. Checks matter/family compatibility (IncompatibleMatter),
// that bosonic species charges generate the dual group (IncompatibleMatter),
// and for fermionic families derives the staggered coloring from the tree
// root (NotBipartite / OddVertexCount). The dense basis, masks and related
// structures are materialized only when the total register dimension fits
// `dim_cap`; the instance is still fully usable symbolically beyond that,
// and dense accessors then throw DimensionCap.
CodeInstance build_code(const Lattice& lattice, const GroupSpec& group,
                        const SpanningTree& tree, const MatterContent& matter,
                        CodeFamily family,
                        std::int64_t dim_cap = kDefaultDimensionCap);

class CodeInstance {
 public:
  const Lattice& lattice() const { return lattice_; }
  const GroupSpec& group() const { return group_; }
  const SpanningTree& tree() const { return tree_; }
  const MatterContent& matter() const { return matter_; }
  CodeFamily family() const { return family_; }

  bool is_vacuum() const { return family_is_vacuum(family_); }
  bool is_fermionic() const { return family_is_fermionic(family_); }
  bool has_matter() const { return matter_.has_matter(); }

  // Staggered vacuum occupation per vertex; empty unless fermionic.
  const std::vector<int>& stagger() const { return stagger_; }

  // Exact code dimension, |G|^loop_rank times the dressed matter count for
  // GL matter families (closed form; matches the dense mask count).
  std::int64_t code_dimension() const { return dimension_; }

  // Dense structures; throw DimensionCap when the state space exceeded the
  // build cap (use has_dense() to query).
  bool has_dense() const { return layout_ != nullptr; }
  std::shared_ptr<const RegisterLayout> layout() const;
  // 1 on basis states with trivial total charge at every vertex.
  const std::vector<std::uint8_t>& gauss_mask() const;
  // Code-space support: gauss_mask, further restricted to vacuum matter
  // occupations for vacuum families.
  const std::vector<std::uint8_t>& code_mask() const;
  const std::vector<std::int64_t>& code_basis() const;

 private:
  friend CodeInstance build_code(const Lattice&, const GroupSpec&,
                                 const SpanningTree&, const MatterContent&,
                                 CodeFamily, std::int64_t);
  CodeInstance(Lattice lattice, GroupSpec group, SpanningTree tree,
               MatterContent matter, CodeFamily family);

  Lattice lattice_;
  GroupSpec group_;
  SpanningTree tree_;
  MatterContent matter_;
  CodeFamily family_;
  std::vector<int> stagger_;
  std::int64_t dimension_ = 1;
  std::shared_ptr<const RegisterLayout> layout_;
  std::vector<std::uint8_t> gauss_mask_;
  std::vector<std::uint8_t> code_mask_;
  std::vector<std::int64_t> code_basis_;
};

// Count of matter occupation configurations whose total charge over the
// whole lattice is trivial (these are the configurations a flux pattern can
// dress into local neutrality). Throws FamilyMismatch for matterless codes.
std::int64_t dressed_matter_dimension(const CodeInstance& code);

// The gauge transformation at vertex v with parameter g as an explicit
// diagonal phase sequence: electric phases on incident links plus the matter
// charge phase at v.
OpSequence star_operator_sequence(const CodeInstance& code, int v,
                                  const GroupElement& g);

// One diagonal stabilizer: a labelled phase sequence with eigenvalue 1
// exactly on the code space (jointly across all generators).
struct StabilizerGenerator {
  std::string label;
  OpSequence ops;
  // True for generators implied by the others (the pure-gauge star at the
  // tree root: the global product of stars is the identity).
  bool redundant = false;
};

// Vertex stars over the group's factor generators; vacuum families add the
// occupation-pinning number phases (finite species: the charge phases
// u^g; oscillator modes and fermions: the finest diagonal phase the
// truncated register supports).
std::vector<StabilizerGenerator> stabilizer_generators(const CodeInstance& code);

// Minimal-weight undetectable X-type datum found by the bounded search:
// flux insertions plus occupation shifts with trivial total charge at every
// vertex. Weight counts touched registers.
struct XWitness {
  explicit XWitness(GroupSpec group) : links(std::move(group)) {}
  WilsonLineProduct links;
  MatterShift matter_x;
  int weight = 0;
  std::string to_string() const;
};

struct CodeParameters {
  int num_links = 0;
  int num_matter_registers = 0;
  std::int64_t dimension = 1;
  double log_dim_group_base = 0.0;  // log_|G| of the dimension
  double log_dim_base_two = 0.0;
  int d_z = 0;  // 1 whenever the dimension exceeds 1 (witness supplied)
  std::string d_z_witness;
  std::optional<int> d_x;  // empty: no undetectable X-type datum up to wmax
  std::optional<XWitness> d_x_witness;
  int wmax = 0;
};

// Register counts, exact and logarithmic dimension, a single-register
// diagonal logical witness (d_z), and a bounded minimal-weight search for
// undetectable X-type data (d_x). Purely symbolic: works beyond the dense
// cap.
CodeParameters code_parameters(const CodeInstance& code, int wmax = 6);

}  // namespace gqec
