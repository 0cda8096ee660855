#include "spahr/linalg.hpp"

namespace spahr {

void validate_index_set(const IndexSet& set, Index bound) {
  std::vector<char> seen(static_cast<std::size_t>(std::max<Index>(bound, 0)), 0);
  for (Index i : set) {
    if (i < 0 || i >= bound)
      throw DimensionError("index " + std::to_string(i) + " outside [0, " +
                           std::to_string(bound) + ")");
    if (seen[i]) throw DimensionError("duplicate index " + std::to_string(i));
    seen[i] = 1;
  }
}

}  // namespace spahr
