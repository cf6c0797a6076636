#include "rrhmm/moments.hpp"

#include <string>

#include "rrhmm/error.hpp"

namespace rrhmm {

EventSpace::EventSpace(int n_base, int window) : n_base_(n_base), window_(window) {
  if (n_base < 1 || window < 1)
    throw Error(ErrorCode::InvalidArgument, "event space needs n_base >= 1 and window >= 1");
  std::int64_t count = 1;
  for (int i = 0; i < window; ++i) {
    count *= n_base;
    if (count > kMaxEvents)
      throw Error(ErrorCode::EventSpaceTooLarge,
                  std::to_string(n_base) + "^" + std::to_string(window) + " exceeds the event cap");
  }
  n_events_ = static_cast<int>(count);
}

int EventSpace::encode(std::span<const Symbol> tuple) const {
  if (static_cast<int>(tuple.size()) != window_)
    throw Error(ErrorCode::DimensionMismatch, "event tuple length differs from window");
  int e = 0;
  for (Symbol s : tuple) {
    check_symbol(s, n_base_);
    e = e * n_base_ + s;
  }
  return e;
}

std::vector<Symbol> EventSpace::decode(int event) const {
  if (event < 0 || event >= n_events_)
    throw Error(ErrorCode::SymbolOutOfRange, "event index out of range");
  std::vector<Symbol> out(static_cast<std::size_t>(window_));
  for (int i = window_ - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = event % n_base_;
    event /= n_base_;
  }
  return out;
}

MomentCounts::MomentCounts(EventSpace ev) : events(ev) {
  const auto ne = static_cast<std::size_t>(ev.n_events());
  c1.assign(ne, 0);
  c21.assign(ne * ne, 0);
  c3.assign(static_cast<std::size_t>(ev.n_base()), std::vector<std::uint64_t>(ne * ne, 0));
}

void MomentCounts::add(int past, Symbol middle, int future_after_middle, int future_from_middle) {
  const auto ne = static_cast<std::size_t>(events.n_events());
  const auto p = static_cast<std::size_t>(past);
  ++total;
  ++c1[p];
  ++c21[static_cast<std::size_t>(future_from_middle) * ne + p];
  ++c3[static_cast<std::size_t>(middle)][static_cast<std::size_t>(future_after_middle) * ne + p];
}

MomentCounts& MomentCounts::merge(const MomentCounts& other) {
  if (!(other.events == events))
    throw Error(ErrorCode::DimensionMismatch, "cannot merge counts over different event spaces");
  total += other.total;
  for (std::size_t i = 0; i < c1.size(); ++i) c1[i] += other.c1[i];
  for (std::size_t i = 0; i < c21.size(); ++i) c21[i] += other.c21[i];
  for (std::size_t x = 0; x < c3.size(); ++x)
    for (std::size_t i = 0; i < c3[x].size(); ++i) c3[x][i] += other.c3[x][i];
  return *this;
}

MomentEstimates MomentCounts::normalize() const {
  if (total == 0) throw Error(ErrorCode::EmptyDataset, "no samples to estimate moments from");
  const int ne = events.n_events();
  const double inv = 1.0 / static_cast<double>(total);
  MomentEstimates m;
  m.events = events;
  m.sample_count = total;
  m.P1.resize(ne);
  m.P21.resize(ne, ne);
  for (int i = 0; i < ne; ++i) m.P1(i) = static_cast<double>(c1[static_cast<std::size_t>(i)]) * inv;
  auto fill = [&](const std::vector<std::uint64_t>& c, Matrix& out) {
    out.resize(ne, ne);
    for (int f = 0; f < ne; ++f)
      for (int p = 0; p < ne; ++p)
        out(f, p) = static_cast<double>(c[static_cast<std::size_t>(f * ne + p)]) * inv;
  };
  fill(c21, m.P21);
  m.P3.resize(c3.size());
  for (std::size_t x = 0; x < c3.size(); ++x) fill(c3[x], m.P3[x]);
  return m;
}

MomentCounts count_triples(std::span<const Triple> data, int n) {
  MomentCounts c(EventSpace(n, 1));
  for (const Triple& t : data) {
    for (Symbol s : t) check_symbol(s, n);
    c.add(t[0], t[1], t[2], t[1]);
  }
  return c;
}

MomentCounts count_stacked(std::span<const Symbol> seq, int n, int window) {
  const EventSpace ev(n, window);
  const auto w = static_cast<std::size_t>(window);
  if (seq.size() < 2 * w + 1)
    throw Error(ErrorCode::SequenceTooShort, "sequence of length " + std::to_string(seq.size()) +
                                                 " is shorter than 2 * window + 1");
  for (Symbol s : seq) check_symbol(s, n);
  MomentCounts c(ev);
  for (std::size_t t = w; t + w < seq.size(); ++t) {
    const int past = ev.encode(seq.subspan(t - w, w));
    const int after = ev.encode(seq.subspan(t + 1, w));
    const int from = ev.encode(seq.subspan(t, w));
    c.add(past, seq[t], after, from);
  }
  return c;
}

MomentEstimates estimate_moments(std::span<const Triple> data, int n) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no triples");
  return count_triples(data, n).normalize();
}

MomentEstimates estimate_moments_stacked(std::span<const Symbol> seq, int n, int window) {
  return count_stacked(seq, n, window).normalize();
}

MomentEstimates population_moments(const RrHmmParams& p) {
  return population_moments_stacked(p, 1);
}

Matrix observation_block_matrix(const RrHmmParams& p, int window) {
  const EventSpace ev(p.n, window);
  Matrix out(ev.n_events(), p.m);
  for (int e = 0; e < ev.n_events(); ++e) {
    const auto tuple = ev.decode(e);
    // Backward pass: row vector over the state at the tuple's first symbol.
    Eigen::RowVectorXd w = p.O.row(tuple.back());
    for (int s = window - 2; s >= 0; --s)
      w = (w * p.T).cwiseProduct(p.O.row(tuple[static_cast<std::size_t>(s)]));
    out.row(e) = w;
  }
  return out;
}

Matrix past_block_matrix(const RrHmmParams& p, int window) {
  const EventSpace ev(p.n, window);
  Matrix out(p.m, ev.n_events());
  for (int e = 0; e < ev.n_events(); ++e) {
    const auto tuple = ev.decode(e);
    Vector v = p.pi;
    for (int s = 0; s < window; ++s) {
      if (s > 0) v = p.T * v;
      v = v.cwiseProduct(p.O.row(tuple[static_cast<std::size_t>(s)]).transpose());
    }
    out.col(e) = v;
  }
  return out;
}

MomentEstimates population_moments_stacked(const RrHmmParams& p, int window) {
  MomentEstimates m;
  m.events = EventSpace(p.n, window);
  const Matrix future = observation_block_matrix(p, window);
  const Matrix past_to_state = p.T * past_block_matrix(p, window);
  m.P1 = future * p.pi;
  m.P21 = future * past_to_state;
  m.P3.reserve(static_cast<std::size_t>(p.n));
  for (Symbol x = 0; x < p.n; ++x)
    m.P3.push_back(future * p.T * p.O.row(x).transpose().asDiagonal() * past_to_state);
  return m;
}

}  // namespace rrhmm
