#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gqec/errors.hpp"

// Brute-force reference computations, written directly against the defining
// group averages and operator products. Nothing here calls the symbolic
// classifiers or the operator-sequence engine: projector diagonals, error
// images, and cycle labels are recomputed from the register layout and the
// character pairing alone, so agreement between the two sides of a test is
// evidence rather than tautology.
namespace gqec {

inline constexpr std::int64_t kOracleDimensionCap = 4096;

// Diagonal of the code-space projector: the average of every gauge
// transformation's diagonal phase (one group element per vertex, full group
// power) times, for vacuum families, the occupation-pinning averages over
// each matter register. Entries land on 0 or 1 up to rounding. Throws
// DimensionCap above 4096 total dimensions.
std::vector<std::complex<double>> dense_projector(const CodeInstance& code);

// Number of (approximately) unit entries on the projector diagonal.
std::int64_t projector_rank(const std::vector<std::complex<double>>& diag);

// Worst |p^2 - p| over the diagonal: the idempotence defect.
double projector_idempotence_defect(
    const std::vector<std::complex<double>>& diag);

enum class OracleOutcome { Zero, Scalar, BlockScalar, Violation };

struct OracleVerdict {
  OracleOutcome outcome = OracleOutcome::Zero;
  // Scalar: M equals scalar times the identity on the code space.
  std::complex<double> scalar{0.0, 0.0};
  // Residual of the accepted classification (or the best rejected one for
  // violations).
  double deviation = 0.0;
  std::string detail;
  std::string to_string() const;
};

// Builds M = P Ea^dag Eb P densely on the projector's basis and classifies
// it: zero, a scalar multiple of the identity, the identity on the matter
// labels tensor an arbitrary block on the cycle holonomies (the subsystem
// form), or a violation. Tolerance 1e-10. Throws DimensionCap above 4096.
OracleVerdict kl_oracle(const ErrorOp& ea, const ErrorOp& eb,
                        const CodeInstance& code);

struct DistanceScan {
  bool found = false;
  int weight = 0;       // set when found
  int searched_up_to = 0;
  std::string witness;  // a minimal-weight logical representative
  std::string to_string() const;  // e.g. "3", or ">4" when nothing was found
};

// Exhaustive search for the lightest X-type operator (flux insertions,
// cyclic occupation shifts, string-dressed toggles) that maps the code
// space onto itself while acting on it nontrivially. Weight counts touched
// registers; supports are scanned in increasing weight up to wmax.
DistanceScan distance_oracle(const CodeInstance& code, int wmax);

}  // namespace gqec
