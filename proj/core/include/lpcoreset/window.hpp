#pragma once

#include <vector>

#include "lpcoreset/common.hpp"
#include "lpcoreset/sampling.hpp"

namespace lpcoreset {

struct WindowConfig {
  double p = 2.0;
  double epsilon = 0.25;
  double delta = 0.1;
  double c = 1.0;
  Index window = 0;          // maximum queryable window size W
  Index n_max = Index(1) << 20;  // stream-length cap funding the error budget
  uint64_t seed = 0;

  void validate() const;
  int merge_layers() const;      // ceil(log2 n_max)
  double merge_epsilon() const;  // epsilon / merge_layers
  double merge_delta() const;    // delta / n_max
};

/// Sliding-window lp coresets by merge-and-reduce over dyadic suffix blocks.
///
/// Every arriving row becomes a level-0 block; whenever two blocks share a
/// level they are concatenated and re-sampled by the online coreset driver
/// with the per-merge budget (eps', delta'). The reduce step feeds the block
/// in reverse arrival order, so each suffix of a sealed block (a prefix of
/// the reversed stream) is itself covered; queries that cut a block in half
/// therefore keep exactly the entries at or after the window edge. Expired
/// blocks are pruned lazily at insert time.
class WindowTree {
public:
  WindowTree(Index dim, const WindowConfig& config);

  /// Timestamps must be strictly increasing; use the 1-based row position.
  void insert(const Vector& row, Index timestamp);
  void insert(const Vector& row) { insert(row, rows_seen_ + 1); }

  /// Coreset of the last `window` rows (window <= config.window).
  Coreset query(Index window) const;

  Index rows_seen() const { return rows_seen_; }
  Index live_rows() const;
  Index max_live_rows() const { return max_live_rows_; }
  Index merges_performed() const { return merges_; }
  int levels() const { return static_cast<int>(blocks_.size()); }
  const WindowConfig& config() const { return config_; }

  /// Largest merge-layer count any live entry has passed through; the
  /// distortion composed over a chain of L reduces is (1+eps')^L - 1.
  int max_merge_depth() const { return max_depth_; }

private:
  struct Block {
    Index start = 0;  // inclusive timestamps
    Index end = 0;
    int depth = 0;  // reduce operations applied on the deepest input chain
    std::vector<CoresetEntry> entries;  // ascending by index
  };

  Block reduce(Block&& older, Block&& newer);
  void prune();

  Index dim_;
  WindowConfig config_;
  std::vector<std::vector<Block>> blocks_;  // blocks_[level], oldest first
  Index rows_seen_ = 0;
  Index last_timestamp_ = 0;
  Index max_live_rows_ = 0;
  Index merges_ = 0;
  int max_depth_ = 0;
};

}  // namespace lpcoreset
