#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "copri/diagnostics.hpp"

namespace copri {

// Object handles discovered while resolving one method access, indexed by the
// 1-based segment position they belong to. Entries must arrive outermost
// first with no gaps; each entry is pushed at most once per access.
class ContextStack {
 public:
  struct Entry {
    std::size_t segment_index = 0;
    std::uint64_t handle = 0;
  };

  void push(std::size_t segment_index, std::uint64_t handle, int line = 0,
            int column = 0) {
    std::size_t expected = entries_.size() + 1;
    if (segment_index != expected)
      fail(ErrorKind::StackOrder,
           "context for level " + std::to_string(segment_index) +
               " pushed out of order (expected level " + std::to_string(expected) + ")",
           line, column);
    entries_.push_back({segment_index, handle});
  }

  bool has(std::size_t segment_index) const {
    return segment_index >= 1 && segment_index <= entries_.size();
  }

  std::uint64_t handle_at(std::size_t segment_index, int line = 0, int column = 0) const {
    if (!has(segment_index))
      fail(ErrorKind::EmptyStack,
           "no resolved object for level " + std::to_string(segment_index), line, column);
    return entries_[segment_index - 1].handle;
  }

  std::size_t depth() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

}  // namespace copri
