#include "ressm/ident/sign_tracking.hpp"

#include "ressm/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace ressm::ident {
namespace {

void flip_segment(model::ChainState& st, int s, Index q) {
  st.theta_seg[s].col(q) *= -1.0;
  st.M[s].row(q) *= -1.0;
  conjugate_dynamics(st.a_seg[s], q);
}

void flip_subject(model::ChainState& st, const model::HierLayout& layout,
                  int u, Index q) {
  st.theta_sub[u].col(q) *= -1.0;
  conjugate_dynamics(st.a_sub[u], q);
  const auto& sub = layout.subject(u);
  for (int s = sub.first_segment; s < sub.first_segment + sub.segment_count;
       ++s) {
    flip_segment(st, s, q);
  }
}

void flip_group(model::ChainState& st, const model::HierLayout& layout, int r,
                Index q) {
  st.theta_grp[r].col(q) *= -1.0;
  conjugate_dynamics(st.a_grp[r], q);
  for (int i = 0; i < layout.subjects(r); ++i) {
    flip_subject(st, layout, layout.subject_index(r, i), q);
  }
}

// Cosine of two columns, or NaN when either has zero norm.
double column_cosine(const Matrix& child, const Matrix& parent, Index q) {
  const double nc = child.col(q).squaredNorm();
  const double np = parent.col(q).squaredNorm();
  if (nc == 0.0 || np == 0.0) return std::nan("");
  const double c = child.col(q).dot(parent.col(q)) / std::sqrt(nc * np);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

std::string to_string(Level level) {
  switch (level) {
    case Level::kSegment: return "segment";
    case Level::kSubject: return "subject";
    case Level::kGroup: return "group";
  }
  return "segment";
}

int SignAudit::flips() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(),
                                        [](const SignRecord& r) { return r.flipped; }));
}

double cosine(const Vector& x, const Vector& y) {
  const double nx = x.squaredNorm();
  const double ny = y.squaredNorm();
  if (nx == 0.0 || ny == 0.0) {
    throw ValidationError("cosine: zero vector");
  }
  return std::clamp(x.dot(y) / std::sqrt(nx * ny), -1.0, 1.0);
}

void conjugate_dynamics(Matrix& a, Index q) {
  const Index dim = a.rows();
  a.row(q) *= -1.0;
  for (Index h = 0; h < a.cols() / dim; ++h) a.col(h * dim + q) *= -1.0;
}

int apply_sign_tracking(model::ChainState& st, const model::HierLayout& layout,
                        double rho0, int iteration, SignAudit& audit) {
  const Index Q = st.theta_pop.cols();
  int flips = 0;
  auto check = [&](const Matrix& child, const Matrix& parent, Index q,
                   SignRecord rec) {
    const double c = column_cosine(child, parent, q);
    if (std::isnan(c)) return false;
    rec.iteration = iteration;
    rec.q = static_cast<int>(q);
    rec.cosine = c;
    rec.flipped = c < rho0;
    audit.records.push_back(rec);
    flips += rec.flipped ? 1 : 0;
    return rec.flipped;
  };

  for (int s = 0; s < layout.total_segments(); ++s) {
    const auto& ref = layout.segment(s);
    for (Index q = 0; q < Q; ++q) {
      if (check(st.theta_seg[s], st.theta_sub[ref.subject], q,
                {0, Level::kSegment, ref.r, ref.i, ref.j})) {
        flip_segment(st, s, q);
      }
    }
  }
  for (int u = 0; u < layout.total_subjects(); ++u) {
    const auto& sub = layout.subject(u);
    for (Index q = 0; q < Q; ++q) {
      if (check(st.theta_sub[u], st.theta_grp[sub.r], q,
                {0, Level::kSubject, sub.r, sub.i, -1})) {
        flip_subject(st, layout, u, q);
      }
    }
  }
  Matrix group_mean = Matrix::Zero(st.theta_pop.rows(), Q);
  for (const auto& t : st.theta_grp) group_mean += t;
  group_mean /= static_cast<double>(layout.groups());
  for (int r = 0; r < layout.groups(); ++r) {
    for (Index q = 0; q < Q; ++q) {
      if (check(st.theta_grp[r], group_mean, q,
                {0, Level::kGroup, r, -1, -1})) {
        flip_group(st, layout, r, q);
      }
    }
  }
  return flips;
}

}  // namespace ressm::ident
