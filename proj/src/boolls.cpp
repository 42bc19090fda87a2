#include "boolls.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

namespace bmf {

namespace {

void validate(const BoolLSInstance& inst) {
  if (inst.cols.empty()) throw std::invalid_argument("BoolLS: need at least one column");
  if (!inst.x || !inst.mask) throw std::invalid_argument("BoolLS: null target or mask");
  const std::size_t d = inst.x->size();
  if (inst.mask->size() != d) throw std::invalid_argument("BoolLS: mask length mismatch");
  for (const BitVec* c : inst.cols)
    if (!c || c->size() != d) throw std::invalid_argument("BoolLS: column length mismatch");
}

std::uint64_t error_with_scratch(const BoolLSInstance& inst, const BitVec& h, BitVec& scratch) {
  scratch.clear();
  h.for_each_set([&](std::size_t k) { scratch |= *inst.cols[k]; });
  return masked_hamming(*inst.mask, *inst.x, scratch);
}

// True if a should be preferred over b among equal-error selections:
// fewer set bits first, then lexicographic with bit 0 most significant and
// 0 preferred over 1.
bool tie_prefer(const BitVec& a, const BitVec& b) {
  const std::uint64_t ca = a.count(), cb = b.count();
  if (ca != cb) return ca < cb;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t t = 0; t < wa.size(); ++t) {
    if (wa[t] == wb[t]) continue;
    // lowest differing bit index decides; the vector with 0 there wins
    const unsigned bit = static_cast<unsigned>(std::countr_zero(wa[t] ^ wb[t]));
    return ((wa[t] >> bit) & 1u) == 0;
  }
  return false;
}

std::size_t default_q_max(std::size_t rank) {
  // max(2, ceil(log2 rank)); always <= rank for rank >= 2
  return std::max<std::size_t>(2, std::bit_width(rank - 1));
}

}  // namespace

BoolLSInstance::BoolLSInstance(const BoolMatrix& w, const BitVec& target, const BitVec& m)
    : x(&target), mask(&m) {
  cols.reserve(w.cols());
  for (std::size_t k = 0; k < w.cols(); ++k) cols.push_back(&w.col(k));
  validate(*this);
}

BoolLSInstance::BoolLSInstance(std::vector<const BitVec*> columns, const BitVec& target,
                               const BitVec& m)
    : cols(std::move(columns)), x(&target), mask(&m) {
  validate(*this);
}

std::uint64_t selection_error(const BoolLSInstance& inst, const BitVec& h) {
  BitVec scratch(inst.dim());
  return error_with_scratch(inst, h, scratch);
}

BoolLSResult evaluate_selection(const BoolLSInstance& inst, const BitVec& h) {
  BoolLSResult r;
  r.h = h;
  r.cover = BitVec(inst.dim());
  h.for_each_set([&](std::size_t k) { r.cover |= *inst.cols[k]; });
  r.error = masked_hamming(*inst.mask, *inst.x, r.cover);
  return r;
}

BoolLSResult solve_exact(const BoolLSInstance& inst, std::size_t exact_rank_limit) {
  const std::size_t r = inst.rank();
  if (r > exact_rank_limit)
    throw capability_error("exact BoolLS: rank " + std::to_string(r) +
                           " exceeds the configured limit " + std::to_string(exact_rank_limit) +
                           "; use the greedy solver instead");
  const std::size_t dim = inst.dim();

  // Small ranks are enumerated flat; above that, order columns by how many
  // observed target ones they can cover so the bound starts pruning early.
  const bool prune = r > 12;
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  if (prune) {
    std::vector<std::uint64_t> gain(r);
    for (std::size_t k = 0; k < r; ++k) {
      const auto& cw = inst.cols[k]->words();
      const auto& xw = inst.x->words();
      const auto& mw = inst.mask->words();
      std::uint64_t g = 0;
      for (std::size_t t = 0; t < cw.size(); ++t)
        g += static_cast<std::uint64_t>(std::popcount(mw[t] & xw[t] & cw[t]));
      gain[k] = g;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return gain[a] > gain[b]; });
  }

  // suffix[d] = OR of the columns still undecided at depth d; everything a
  // partial selection could still cover.
  std::vector<BitVec> suffix(r + 1, BitVec(dim));
  for (std::size_t d = r; d-- > 0;) {
    suffix[d] = suffix[d + 1];
    suffix[d] |= *inst.cols[order[d]];
  }

  struct Best {
    bool init = false;
    std::uint64_t error = 0;
    BitVec h;
  } best;
  auto consider = [&](const BitVec& cand, std::uint64_t err) {
    if (!best.init || err < best.error || (err == best.error && tie_prefer(cand, best.h))) {
      best.init = true;
      best.error = err;
      best.h = cand;
    }
  };

  if (prune) {
    // Seed with the greedy answer so the bound has something to cut against.
    BoolLSResult g = solve_greedy(inst);
    consider(g.h, g.error);
  }

  BitVec h(r);
  std::vector<BitVec> covers(r + 1, BitVec(dim));
  const auto& xw = inst.x->words();
  const auto& mw = inst.mask->words();

  auto dfs = [&](auto&& self, std::size_t d) -> void {
    const BitVec& cover = covers[d];
    if (d == r) {
      consider(h, masked_hamming(*inst.mask, *inst.x, cover));
      return;
    }
    if (prune && best.init) {
      // Lower bound: zeros already wrongly covered, plus ones that no
      // remaining column can reach. Prune only on strict excess so that
      // tie-breaking still sees every optimal leaf.
      const auto& cw = cover.words();
      const auto& sw = suffix[d].words();
      std::uint64_t lb = 0;
      for (std::size_t t = 0; t < cw.size(); ++t) {
        lb += static_cast<std::uint64_t>(std::popcount(mw[t] & ~xw[t] & cw[t]));
        lb += static_cast<std::uint64_t>(std::popcount(mw[t] & xw[t] & ~(cw[t] | sw[t])));
      }
      if (lb > best.error) return;
    }
    const std::size_t k = order[d];
    covers[d + 1] = cover;
    covers[d + 1] |= *inst.cols[k];
    h.set(k);
    self(self, d + 1);
    h.reset(k);
    covers[d + 1] = cover;
    self(self, d + 1);
  };
  dfs(dfs, 0);

  return evaluate_selection(inst, best.h);
}

BoolLSResult solve_greedy(const BoolLSInstance& inst) {
  const std::size_t r = inst.rank();
  BoolLSResult res;
  res.h = BitVec(r);
  res.cover = BitVec(inst.dim());
  res.error = masked_hamming(*inst.mask, *inst.x, res.cover);
  for (;;) {
    std::size_t best_k = r;
    std::uint64_t best_err = res.error;
    for (std::size_t k = 0; k < r; ++k) {
      if (res.h.get(k)) continue;
      const std::uint64_t e = masked_or_mismatch(*inst.mask, *inst.x, res.cover, *inst.cols[k]);
      if (e < best_err) {
        best_err = e;
        best_k = k;
      }
    }
    if (best_k == r) break;
    res.h.set(best_k);
    res.cover |= *inst.cols[best_k];
    res.error = best_err;
  }
  return res;
}

BoolLSResult local_search(const BoolLSInstance& inst, const BoolLSResult& start, Rng& rng,
                          const LocalSearchParams& params) {
  const std::size_t r = inst.rank();
  if (r < 2) return start;

  const std::size_t budget = params.t ? params.t : r;
  std::size_t q_max = params.q_max ? params.q_max : default_q_max(r);
  if (q_max < 2 || q_max > r)
    throw std::invalid_argument("local_search: q_max must lie in [2, rank]");

  BitVec h = start.h;
  BitVec scratch(inst.dim());
  std::uint64_t err = error_with_scratch(inst, h, scratch);

  BitVec u(r), cand(r);
  auto improve = [&](auto&& self, std::size_t t) -> void {
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t q = 2; q <= q_max; ++q) {
        // Draw a perturbation with exactly q distinct set bits by redrawing
        // duplicates; cheap at the ranks used here.
        u.clear();
        std::size_t bits = 0;
        while (bits < q) {
          const std::size_t idx = rng.below(r);
          if (!u.get(idx)) {
            u.set(idx);
            ++bits;
          }
        }
        cand = h;
        cand ^= u;
        const std::uint64_t e = error_with_scratch(inst, cand, scratch);
        if (e < err) {
          h = cand;
          err = e;
          self(self, t - 1);  // restart the scan around the improved point
        }
      }
    }
  };
  improve(improve, budget);

  return evaluate_selection(inst, h);
}

BoolLSResult solve_greedy_ls(const BoolLSInstance& inst, Rng& rng,
                             const LocalSearchParams& params) {
  BoolLSResult g = solve_greedy(inst);
  if (inst.rank() < 2) return g;
  return local_search(inst, g, rng, params);
}

}  // namespace bmf
