#pragma once

#include <cstdint>
#include <vector>

namespace ospmatch {

// One set partition of {0..n-1}: cells as bitmasks, ordered by smallest member.
using SetPartition = std::vector<std::uint64_t>;

// Every partition of {0..n-1} into at least two cells, ordered by cell count
// and then by restricted-growth-string lexicographic order. Cached per n;
// thread-safe. n is capped at 9 (Bell numbers grow too fast beyond that).
const std::vector<SetPartition>& multi_cell_partitions(std::size_t n);

}  // namespace ospmatch
