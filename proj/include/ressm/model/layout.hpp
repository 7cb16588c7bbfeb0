#pragma once

#include "ressm/core/linalg.hpp"

#include <vector>

namespace ressm::model {

struct SegmentRef {
  int r = 0;
  int i = 0;
  int j = 0;
  int subject = 0;  // flat subject index
};

struct SubjectRef {
  int r = 0;
  int i = 0;
  int first_segment = 0;  // flat index of segment j = 0
  int segment_count = 0;  // J_ri
};

/// Group / subject / segment bookkeeping. Units are stored flat in
/// (r, i, j) lexicographic order so per-unit state lives in plain vectors.
class HierLayout {
 public:
  HierLayout() = default;
  /// counts[r][i] = J_ri.
  explicit HierLayout(std::vector<std::vector<int>> counts);
  static HierLayout balanced(int groups, int subjects_per_group,
                             int segments_per_subject);

  int groups() const { return static_cast<int>(counts_.size()); }
  int subjects(int r) const { return static_cast<int>(counts_[r].size()); }
  int segments(int r, int i) const { return counts_[r][i]; }
  int total_subjects() const { return static_cast<int>(subjects_.size()); }
  int total_segments() const { return static_cast<int>(segments_.size()); }

  int subject_index(int r, int i) const { return group_first_subject_[r] + i; }
  int segment_index(int r, int i, int j) const {
    return subjects_[subject_index(r, i)].first_segment + j;
  }
  const SegmentRef& segment(int s) const { return segments_[s]; }
  const SubjectRef& subject(int u) const { return subjects_[u]; }
  int group_first_subject(int r) const { return group_first_subject_[r]; }
  /// Sum over i of J_ri.
  int group_segment_count(int r) const { return group_segments_[r]; }

  const std::vector<std::vector<int>>& counts() const { return counts_; }
  bool operator==(const HierLayout& other) const {
    return counts_ == other.counts_;
  }

 private:
  std::vector<std::vector<int>> counts_;
  std::vector<SegmentRef> segments_;
  std::vector<SubjectRef> subjects_;
  std::vector<int> group_first_subject_;
  std::vector<int> group_segments_;
};

/// Observed signals: one P x K matrix per segment, flat in layout order.
struct HierDataset {
  HierLayout layout;
  Index P = 0;
  Index K = 0;
  std::vector<Matrix> Y;

  const Matrix& segment(int r, int i, int j) const {
    return Y[layout.segment_index(r, i, j)];
  }
};

}  // namespace ressm::model
