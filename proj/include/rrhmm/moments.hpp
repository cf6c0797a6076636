#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rrhmm/hmm_core.hpp"

namespace rrhmm {

//! Events are tuples of `window` consecutive base symbols, indexed
//! lexicographically with the earliest symbol most significant.
class EventSpace {
 public:
  static constexpr std::int64_t kMaxEvents = 10'000;

  EventSpace() = default;
  EventSpace(int n_base, int window);

  int window() const { return window_; }
  int n_base() const { return n_base_; }
  int n_events() const { return n_events_; }

  int encode(std::span<const Symbol> tuple) const;
  std::vector<Symbol> decode(int event) const;

  bool operator==(const EventSpace&) const = default;

 private:
  int n_base_ = 0;
  int window_ = 1;
  int n_events_ = 0;
};

//! P1 over past events, P21(future, past), P3[x](future, past) for each base
//! symbol x in the middle.
struct MomentEstimates {
  Vector P1;
  Matrix P21;
  std::vector<Matrix> P3;
  //! Absent for exact (infinite-sample) moments.
  std::optional<std::uint64_t> sample_count;
  EventSpace events;

  bool is_population() const { return !sample_count.has_value(); }
};

//! Integer co-occurrence counts; shards merge exactly before normalizing.
struct MomentCounts {
  EventSpace events;
  std::uint64_t total = 0;
  std::vector<std::uint64_t> c1;
  std::vector<std::uint64_t> c21;               // future * n_events + past
  std::vector<std::vector<std::uint64_t>> c3;   // [x][future * n_events + past]

  explicit MomentCounts(EventSpace events);
  void add(int past, Symbol middle, int future_after_middle, int future_from_middle);
  MomentCounts& merge(const MomentCounts& other);
  MomentEstimates normalize() const;
};

MomentCounts count_triples(std::span<const Triple> data, int n);
MomentCounts count_stacked(std::span<const Symbol> sequence, int n, int window);

MomentEstimates estimate_moments(std::span<const Triple> data, int n);

//! Sliding windows over one sequence: at each position t the past event is
//! s[t-w..t-1], the middle symbol s[t], the future event s[t+1..t+w]; P21 pairs
//! the block s[t..t+w-1] with the same past.
MomentEstimates estimate_moments_stacked(std::span<const Symbol> sequence, int n, int window);

MomentEstimates population_moments(const RrHmmParams& params);

//! Exact stacked moments by summing over hidden-state paths.
MomentEstimates population_moments_stacked(const RrHmmParams& params, int window);

//! Obar(i, c) = Pr[next `window` symbols form event i | current state c].
Matrix observation_block_matrix(const RrHmmParams& params, int window);

//! G(b, j) = Pr[h_window = b, x_1..x_window = event j] with h_1 ~ pi.
Matrix past_block_matrix(const RrHmmParams& params, int window);

}  // namespace rrhmm
