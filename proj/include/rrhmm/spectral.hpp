#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rrhmm/hmm_core.hpp"
#include "rrhmm/moments.hpp"

namespace rrhmm {

inline constexpr double kDefaultNormalizerFloor = 1e-12;
inline constexpr double kDefaultRankThreshold = 1e-6;

//! Observable representation (b1, b_inf, {B_x}) learned in a k-dimensional
//! subspace of the future-event space spanned by the columns of U.
struct ObservableModel {
  int k = 0;
  Matrix U;
  Vector b1;
  Vector b_inf;
  std::vector<Matrix> B;  // one k x k operator per base symbol
  double normalizer_floor = kDefaultNormalizerFloor;
  EventSpace events;
  std::optional<std::uint64_t> sample_count;

  int n_base() const { return static_cast<int>(B.size()); }
  //! Sum of all operators; similar to S * R for exact moments.
  Matrix operator_sum() const;
};

struct LearnOptions {
  double rcond = 1e-10;
  double degenerate_ratio = 1e-12;
  double normalizer_floor = kDefaultNormalizerFloor;
};

ObservableModel learn(const MomentEstimates& moments, int k, const LearnOptions& options = {});

struct RankSelection {
  Vector singular_values;
  int chosen_k = 0;
  double threshold_used = 0.0;
};

RankSelection select_rank(const MomentEstimates& moments, double threshold = kDefaultRankThreshold);

//! Largest deviation from the identities B_x = M W_x M^-1, b1 = M pi_l and
//! b_inf^T = 1^T R M^-1 where M = U^T Obar R. Throws NotInvertible when M is
//! not square or sigma_k(M) < 1e-10.
double similarity_check(const ObservableModel& model, const RrHmmParams& params);

}  // namespace rrhmm
