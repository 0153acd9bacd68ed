#include "lpcoreset/window.hpp"

#include <algorithm>
#include <cmath>

namespace lpcoreset {

void WindowConfig::validate() const {
  if (!(p > 0.0)) throw ConfigError("WindowConfig: p must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("WindowConfig: epsilon must be in (0,1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("WindowConfig: delta must be in (0,1)");
  }
  if (window < 1) throw ConfigError("WindowConfig: window must be >= 1");
  if (n_max < 2) throw ConfigError("WindowConfig: n_max must be >= 2");
}

int WindowConfig::merge_layers() const {
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(n_max))));
}

double WindowConfig::merge_epsilon() const {
  return epsilon / static_cast<double>(merge_layers());
}

double WindowConfig::merge_delta() const {
  return delta / static_cast<double>(n_max);
}

WindowTree::WindowTree(Index dim, const WindowConfig& config)
    : dim_(dim), config_(config) {
  config_.validate();
}

WindowTree::Block WindowTree::reduce(Block&& older, Block&& newer) {
  Block merged;
  merged.start = older.start;
  merged.end = newer.end;
  merged.depth = std::max(older.depth, newer.depth) + 1;

  std::vector<CoresetEntry> combined = std::move(older.entries);
  combined.insert(combined.end(), newer.entries.begin(), newer.entries.end());

  OnlineCoresetOptions options;
  options.config.p = config_.p;
  options.config.epsilon = config_.merge_epsilon();
  options.config.delta = config_.merge_delta();
  options.config.c = config_.c;
  options.config.seed = CounterRng::derive_key(
      config_.seed + static_cast<uint64_t>(merges_), "window-merge");
  merges_ += 1;

  // Reverse arrival order: prefixes of the reduced stream are suffixes of the
  // block, which is what a window edge inside the block needs.
  OnlineCoresetBuilder builder(dim_, options);
  std::vector<int> kept_counts(combined.size());
  for (size_t j = combined.size(); j-- > 0;) {
    kept_counts[j] = builder.push(combined[j].scale * combined[j].row);
  }
  const Coreset reduced = builder.take();

  // Map the builder's reversed positions back onto the combined entries.
  size_t cursor = 0;
  for (size_t j = combined.size(); j-- > 0;) {
    if (kept_counts[j] == 0) continue;
    const CoresetEntry& fresh = reduced.entries[cursor++];
    const CoresetEntry& source = combined[j];
    merged.entries.push_back(CoresetEntry{
        source.index, source.row, source.scale * fresh.scale,
        source.probability * fresh.probability});
  }
  std::reverse(merged.entries.begin(), merged.entries.end());
  max_depth_ = std::max(max_depth_, merged.depth);
  return merged;
}

void WindowTree::prune() {
  const Index cutoff = last_timestamp_ - static_cast<Index>(config_.window) + 1;
  for (auto& level : blocks_) {
    level.erase(std::remove_if(level.begin(), level.end(),
                               [&](const Block& b) { return b.end < cutoff; }),
                level.end());
    // Entries older than any future window edge are dead weight even inside
    // a block that still straddles the edge.
    for (Block& b : level) {
      if (b.start >= cutoff) continue;
      b.entries.erase(std::remove_if(b.entries.begin(), b.entries.end(),
                                     [&](const CoresetEntry& e) {
                                       return e.index < cutoff;
                                     }),
                      b.entries.end());
    }
  }
}

void WindowTree::insert(const Vector& row, Index timestamp) {
  if (row.size() != dim_) throw InvalidInputError("WindowTree: dimension mismatch");
  if (!all_finite(row)) throw InvalidInputError("WindowTree: non-finite row");
  if (timestamp <= last_timestamp_) {
    throw InvalidInputError("WindowTree: timestamps must be strictly increasing");
  }
  last_timestamp_ = timestamp;
  rows_seen_ += 1;

  Block block;
  block.start = block.end = timestamp;
  block.entries.push_back(CoresetEntry{timestamp, row, 1.0, 1.0});

  if (blocks_.empty()) blocks_.emplace_back();
  blocks_[0].push_back(std::move(block));

  for (size_t level = 0; level < blocks_.size(); ++level) {
    if (blocks_[level].size() < 2) break;
    Block older = std::move(blocks_[level][0]);
    Block newer = std::move(blocks_[level][1]);
    blocks_[level].clear();
    if (level + 1 >= blocks_.size()) blocks_.emplace_back();
    blocks_[level + 1].push_back(reduce(std::move(older), std::move(newer)));
  }

  prune();
  max_live_rows_ = std::max(max_live_rows_, live_rows());
}

Index WindowTree::live_rows() const {
  Index total = 0;
  for (const auto& level : blocks_) {
    for (const Block& b : level) total += static_cast<Index>(b.entries.size());
  }
  return total;
}

Coreset WindowTree::query(Index window) const {
  if (rows_seen_ == 0) throw ConfigError("WindowTree: query before any insert");
  if (window < 1 || window > static_cast<Index>(config_.window)) {
    throw ConfigError("WindowTree: window exceeds the configured maximum");
  }
  const Index lo = last_timestamp_ - window + 1;

  Coreset out;
  out.p = config_.p;
  out.dim = dim_;
  out.source_rows = std::min(window, rows_seen_);
  out.seed = config_.seed;
  out.epsilon = config_.epsilon;
  out.delta = config_.delta;

  for (const auto& level : blocks_) {
    for (const Block& b : level) {
      if (b.end < lo) continue;
      for (const CoresetEntry& e : b.entries) {
        // Inside the boundary block only the suffix at or after the window
        // edge participates; its validity is the reverse-order reduce
        // property.
        if (e.index >= lo) out.entries.push_back(e);
      }
    }
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const CoresetEntry& lhs, const CoresetEntry& rhs) {
              return lhs.index < rhs.index;
            });
  return out;
}

}  // namespace lpcoreset
