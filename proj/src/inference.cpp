#include "rrhmm/inference.hpp"

#include <algorithm>
#include <cmath>

#include "rrhmm/error.hpp"
#include "rrhmm/rng.hpp"

namespace rrhmm {

BeliefState init_belief(const ObservableModel& model) {
  BeliefState s;
  s.b = model.b1;
  return s;
}

SeqProb seq_prob(const ObservableModel& model, std::span<const Symbol> sequence) {
  Vector b = model.b1;
  for (Symbol x : sequence) {
    check_symbol(x, model.n_base());
    b = model.B[static_cast<std::size_t>(x)] * b;
  }
  SeqProb p;
  p.raw = model.b_inf.dot(b);
  p.clamped = std::clamp(p.raw, 0.0, 1.0);
  return p;
}

BeliefState filter_with_operator(const ObservableModel& model, const BeliefState& state,
                                 const Matrix& op, int distrust_horizon) {
  BeliefState next;
  const Vector v = op * state.b;
  const double z = model.b_inf.dot(v);
  next.step = state.step + 1;
  next.underflow_count = state.underflow_count;
  next.last_normalizer = z;
  if (z >= model.normalizer_floor) {
    next.b = v / z;
    next.distrust_remaining = std::max(0, state.distrust_remaining - 1);
  } else {
    next.b = v / model.normalizer_floor;
    ++next.underflow_count;
    next.distrust_remaining = distrust_horizon;
  }
  return next;
}

BeliefState filter_update(const ObservableModel& model, const BeliefState& state, Symbol x,
                          int distrust_horizon) {
  check_symbol(x, model.n_base());
  return filter_with_operator(model, state, model.B[static_cast<std::size_t>(x)], distrust_horizon);
}

Predictive predictive(const ObservableModel& model, const BeliefState& state) {
  const int n = model.n_base();
  Vector numer(n);
  for (int x = 0; x < n; ++x)
    numer(x) = model.b_inf.dot(model.B[static_cast<std::size_t>(x)] * state.b);
  const double denom = numer.sum();
  if (!(denom >= model.normalizer_floor))
    throw Error(ErrorCode::DegenerateDenominator,
                "predictive denominator " + std::to_string(denom) + " below the floor");
  Predictive p;
  p.raw = numer / denom;
  p.prob = numer.cwiseMax(0.0);
  p.prob /= p.prob.sum();
  return p;
}

CondProb cond_prob(const ObservableModel& model, const BeliefState& state, Symbol x) {
  check_symbol(x, model.n_base());
  const Predictive p = predictive(model, state);
  return {p.prob(x), p.raw(x)};
}

Predictive predict_t_ahead(const ObservableModel& model, const BeliefState& state, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const Matrix sum = model.operator_sum();
  BeliefState ahead = state;
  for (int i = 1; i < horizon; ++i) {
    ahead.b = sum * ahead.b;
    // Rescaling leaves the ratio unchanged and keeps long horizons finite.
    const double z = model.b_inf.dot(ahead.b);
    if (std::abs(z) >= model.normalizer_floor) ahead.b /= z;
  }
  return predictive(model, ahead);
}

SimulationResult simulate(const ObservableModel& model, std::size_t length, std::uint64_t seed) {
  SimulationResult out;
  CounterRng rng(seed);
  BeliefState state = init_belief(model);
  std::vector<double> cum(static_cast<std::size_t>(model.n_base()));
  out.symbols.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    Predictive p;
    try {
      p = predictive(model, state);
    } catch (const Error& e) {
      out.aborted = true;
      out.reason = e.what();
      return out;
    }
    double acc = 0.0;
    for (int x = 0; x < model.n_base(); ++x) cum[static_cast<std::size_t>(x)] = acc += p.prob(x);
    const Symbol x = sample_from_cumulative(cum, rng.uniform());
    out.symbols.push_back(x);
    state = filter_update(model, state, x);
  }
  return out;
}

std::vector<TraceRow> filter_trace(const ObservableModel& model, std::span<const Symbol> stream,
                                   int distrust_horizon) {
  std::vector<TraceRow> rows;
  rows.reserve(stream.size());
  BeliefState state = init_belief(model);
  for (Symbol x : stream) {
    check_symbol(x, model.n_base());
    TraceRow row;
    row.step = state.step;
    row.symbol = x;
    try {
      row.predictive = predictive(model, state).prob;
    } catch (const Error&) {
      row.predictive = Vector::Constant(model.n_base(), std::nan(""));
    }
    state = filter_update(model, state, x, distrust_horizon);
    row.normalizer = state.last_normalizer;
    row.trust = state.trust();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rrhmm
