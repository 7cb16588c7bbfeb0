#include "ressm/model/layout.hpp"

#include "ressm/core/error.hpp"

#include <string>

namespace ressm::model {

HierLayout::HierLayout(std::vector<std::vector<int>> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) throw ValidationError("layout: need at least one group");
  for (int r = 0; r < groups(); ++r) {
    if (counts_[r].empty()) {
      throw ValidationError("layout: group " + std::to_string(r) +
                            " has no subjects");
    }
    group_first_subject_.push_back(static_cast<int>(subjects_.size()));
    int in_group = 0;
    for (int i = 0; i < subjects(r); ++i) {
      const int j_ri = counts_[r][i];
      if (j_ri < 1) {
        throw ValidationError("layout: subject (" + std::to_string(r) + "," +
                              std::to_string(i) + ") has no segments");
      }
      const int u = static_cast<int>(subjects_.size());
      subjects_.push_back({r, i, static_cast<int>(segments_.size()), j_ri});
      for (int j = 0; j < j_ri; ++j) segments_.push_back({r, i, j, u});
      in_group += j_ri;
    }
    group_segments_.push_back(in_group);
  }
}

HierLayout HierLayout::balanced(int groups, int subjects_per_group,
                                int segments_per_subject) {
  return HierLayout(std::vector<std::vector<int>>(
      static_cast<std::size_t>(groups),
      std::vector<int>(static_cast<std::size_t>(subjects_per_group),
                       segments_per_subject)));
}

}  // namespace ressm::model
