#pragma once

#include <stdexcept>
#include <vector>

#include "bitmatrix.hpp"
#include "rng.hpp"

namespace bmf {

// Raised when a request exceeds what a solver is configured to handle
// exactly (as opposed to being malformed); callers can catch it and fall
// back to a heuristic path.
class capability_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One Boolean least-squares subproblem: choose h in {0,1}^r minimizing the
// number of observed positions where (OR of the columns selected by h)
// disagrees with x. Column pointers must outlive the instance.
struct BoolLSInstance {
  std::vector<const BitVec*> cols;
  const BitVec* x = nullptr;
  const BitVec* mask = nullptr;

  BoolLSInstance(const BoolMatrix& w, const BitVec& target, const BitVec& m);
  BoolLSInstance(std::vector<const BitVec*> columns, const BitVec& target, const BitVec& m);

  std::size_t rank() const { return cols.size(); }
  std::size_t dim() const { return x->size(); }
};

struct BoolLSResult {
  BitVec h;      // length rank
  BitVec cover;  // OR of the selected columns, length dim
  std::uint64_t error = 0;
};

struct LocalSearchParams {
  std::size_t t = 0;      // improvement budget; 0 means "use the rank"
  std::size_t q_max = 0;  // largest perturbation size; 0 means max(2, ceil(log2 rank))
};

constexpr std::size_t kDefaultExactRankLimit = 20;

// Error of a fixed selection h, and its full evaluation.
std::uint64_t selection_error(const BoolLSInstance& inst, const BitVec& h);
BoolLSResult evaluate_selection(const BoolLSInstance& inst, const BitVec& h);

// Globally optimal h via branch and bound over the 2^r selections. Among
// equal-error optima, returns the one with the fewest set bits, then the
// lexicographically smallest (bit 0 most significant, 0 before 1). Throws
// capability_error when rank exceeds exact_rank_limit.
BoolLSResult solve_exact(const BoolLSInstance& inst,
                         std::size_t exact_rank_limit = kDefaultExactRankLimit);

// Starts from the empty selection and repeatedly sets the single additional
// bit that lowers the error the most (strict improvement, lowest index on
// ties); never clears a bit. Runs in O(rank^2) error evaluations.
BoolLSResult solve_greedy(const BoolLSInstance& inst);

// Randomized local search around `start`: tries XOR perturbations of every
// size in [2, q_max], recursing with a reduced budget after each accepted
// improvement. Returns `start` unchanged when rank < 2.
BoolLSResult local_search(const BoolLSInstance& inst, const BoolLSResult& start, Rng& rng,
                          const LocalSearchParams& params = {});

// Greedy followed by local search; the standard inexact per-column solver.
BoolLSResult solve_greedy_ls(const BoolLSInstance& inst, Rng& rng,
                             const LocalSearchParams& params = {});

}  // namespace bmf
