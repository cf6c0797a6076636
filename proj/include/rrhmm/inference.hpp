#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrhmm/spectral.hpp"

namespace rrhmm {

inline constexpr int kDefaultDistrustHorizon = 5;

//! Internal state of the observable filter. Not a probability vector: it is a
//! linear image of the latent belief.
struct BeliefState {
  Vector b;
  std::int64_t step = 1;
  std::uint64_t underflow_count = 0;
  //! Updates left before predictions are trusted again.
  int distrust_remaining = 0;
  //! Normalizer of the update that produced this state (1 for the initial state).
  double last_normalizer = 1.0;

  bool trust() const { return distrust_remaining == 0; }
};

BeliefState init_belief(const ObservableModel& model);

struct SeqProb {
  double raw = 0.0;
  double clamped = 0.0;  // raw clamped to [0, 1]
};

SeqProb seq_prob(const ObservableModel& model, std::span<const Symbol> sequence);

BeliefState filter_update(const ObservableModel& model, const BeliefState& state, Symbol x,
                          int distrust_horizon = kDefaultDistrustHorizon);

//! Same recursion with an arbitrary k x k operator (used for blended operators).
BeliefState filter_with_operator(const ObservableModel& model, const BeliefState& state,
                                 const Matrix& op, int distrust_horizon = kDefaultDistrustHorizon);

struct CondProb {
  double prob = 0.0;  // clamped numerator over the sum of clamped numerators
  double raw = 0.0;   // raw numerator over the raw denominator
};

CondProb cond_prob(const ObservableModel& model, const BeliefState& state, Symbol x);

struct Predictive {
  Vector prob;  // clamped, renormalized; sums to 1
  Vector raw;   // raw numerators / raw denominator
};

//! Next-symbol distribution for every base symbol at once.
Predictive predictive(const ObservableModel& model, const BeliefState& state);

//! Distribution of the symbol `horizon` steps ahead (horizon 1 == predictive).
Predictive predict_t_ahead(const ObservableModel& model, const BeliefState& state, int horizon);

struct SimulationResult {
  std::vector<Symbol> symbols;
  bool aborted = false;
  std::string reason;
};

SimulationResult simulate(const ObservableModel& model, std::size_t length, std::uint64_t seed);

struct TraceRow {
  std::int64_t step = 0;
  Symbol symbol = 0;
  double normalizer = 0.0;
  bool trust = true;
  Vector predictive;  // distribution the symbol was drawn against
};

//! Runs the filter over a stream, recording one row per consumed symbol.
std::vector<TraceRow> filter_trace(const ObservableModel& model, std::span<const Symbol> stream,
                                   int distrust_horizon = kDefaultDistrustHorizon);

}  // namespace rrhmm
