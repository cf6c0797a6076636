#include "rrhmm/hmm_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rrhmm/error.hpp"
#include "rrhmm/rng.hpp"

namespace rrhmm {
namespace {

constexpr double kStochasticTol = 1e-12;

void require_column_stochastic(const Matrix& a, const char* name) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if ((a.col(j).array() < 0.0).any())
      throw Error(ErrorCode::NotStochastic,
                  std::string(name) + " has a negative entry in column " + std::to_string(j));
    const double sum = a.col(j).sum();
    if (std::abs(sum - 1.0) > kStochasticTol)
      throw Error(ErrorCode::NotStochastic, std::string(name) + " column " + std::to_string(j) +
                                                " sums to " + std::to_string(sum));
  }
}

std::vector<double> cumulative(const Eigen::Ref<const Vector>& p) {
  std::vector<double> c(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    c[static_cast<std::size_t>(i)] = acc;
  }
  return c;
}

// Column-wise cumulative tables for inverse-CDF sampling.
struct Sampler {
  std::vector<double> prior;
  std::vector<std::vector<double>> transition;
  std::vector<std::vector<double>> emission;

  explicit Sampler(const RrHmmParams& p) : prior(cumulative(p.pi)) {
    for (int j = 0; j < p.m; ++j) {
      transition.push_back(cumulative(p.T.col(j)));
      emission.push_back(cumulative(p.O.col(j)));
    }
  }
  int initial(CounterRng& rng) const { return sample_from_cumulative(prior, rng.uniform()); }
  int next(int h, CounterRng& rng) const {
    return sample_from_cumulative(transition[static_cast<std::size_t>(h)], rng.uniform());
  }
  Symbol emit(int h, CounterRng& rng) const {
    return sample_from_cumulative(emission[static_cast<std::size_t>(h)], rng.uniform());
  }
};

}  // namespace

void check_symbol(Symbol x, int n) {
  if (x < 0 || x >= n)
    throw Error(ErrorCode::SymbolOutOfRange,
                "symbol " + std::to_string(x) + " outside [0, " + std::to_string(n) + ")");
}

TransitionFactors factorize_transition(const Matrix& T, int k, double tol) {
  if (T.rows() != T.cols() || T.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "transition matrix must be square and non-empty");
  require_column_stochastic(T, "T");
  const ThinSvd svd = thin_svd(T);
  const int rank = numerical_rank(svd.sigma, tol);
  if (rank != k)
    throw Error(ErrorCode::RankMismatch, "numerical rank of T is " + std::to_string(rank) +
                                             ", requested k = " + std::to_string(k));
  TransitionFactors f;
  f.R = svd.U.leftCols(k) * svd.sigma.head(k).asDiagonal();
  f.S = svd.V.leftCols(k).transpose();
  const double c = f.R.cwiseAbs().colwise().sum().maxCoeff();
  f.R /= c;
  f.S *= c;
  return f;
}

RrHmmParams make_params(Matrix T, Matrix O, Vector pi, int k) {
  const auto m = T.rows();
  if (T.cols() != m || O.cols() != m || pi.size() != m)
    throw Error(ErrorCode::DimensionMismatch, "T, O and pi disagree on the number of states");
  if (k < 1 || k > m) throw Error(ErrorCode::InvalidArgument, "k must lie in [1, m]");
  require_column_stochastic(O, "O");
  if ((pi.array() <= 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "pi must be entrywise positive");
  if (std::abs(pi.sum() - 1.0) > kStochasticTol)
    throw Error(ErrorCode::NotStochastic, "pi must sum to 1");

  RrHmmParams p;
  auto factors = factorize_transition(T, k);
  p.m = static_cast<int>(m);
  p.n = static_cast<int>(O.rows());
  p.k = k;
  p.T = std::move(T);
  p.O = std::move(O);
  p.pi = std::move(pi);
  p.R = std::move(factors.R);
  p.S = std::move(factors.S);
  return p;
}

RrHmmParams make_stationary_params(Matrix T, Matrix O, int k) {
  Vector pi = stationary_distribution(T);
  return make_params(std::move(T), std::move(O), std::move(pi), k);
}

bool ConditionReport::all_pass() const {
  return pi_positive.pass && transition_rank.pass && observation_rank.pass && r_l1_norm.pass &&
         r_uniform_column.pass && (!uor_invertible || uor_invertible->pass) &&
         s_pi_o_full_row_rank.pass;
}

ConditionReport validate(const RrHmmParams& p, const std::optional<Matrix>& U) {
  ConditionReport r;
  r.pi_positive.measured = p.pi.size() ? p.pi.minCoeff() : 0.0;
  r.pi_positive.pass = r.pi_positive.measured > 0.0;

  r.transition_rank.measured = numerical_rank(p.T);
  r.transition_rank.pass = static_cast<int>(r.transition_rank.measured) == p.k;

  r.observation_rank.measured = numerical_rank(p.O);
  r.observation_rank.pass = r.observation_rank.measured >= p.k;

  r.r_l1_norm.measured = p.R.size() ? p.R.cwiseAbs().colwise().sum().maxCoeff() : 0.0;
  r.r_l1_norm.pass = r.r_l1_norm.measured <= 1.0 + 1e-12;

  r.r_uniform_column.measured = p.R.size() ? p.R.colwise().norm().minCoeff() : 0.0;
  r.r_uniform_column.pass =
      r.r_uniform_column.measured <= std::sqrt(static_cast<double>(p.k) / p.m) + 1e-12;

  if (U) {
    ConditionCheck c;
    if (U->rows() == p.O.rows()) {
      const Matrix uor = U->transpose() * p.O * p.R;
      // Only a square U^T O R can be invertible.
      c.measured = uor.rows() == uor.cols() ? sigma_k(uor, p.k) : 0.0;
    }
    c.pass = c.measured > 1e-8;
    r.uor_invertible = c;
  }

  const Matrix spo = p.S * p.pi.asDiagonal() * p.O.transpose();
  r.s_pi_o_full_row_rank.measured = sigma_k(spo, p.k);
  const double top = sigma_k(spo, 1);
  r.s_pi_o_full_row_rank.pass = r.s_pi_o_full_row_rank.measured > kRankTolerance * top;
  return r;
}

Vector stationary_distribution(const Matrix& T, int max_iterations) {
  const auto m = T.rows();
  Vector v = Vector::Constant(m, 1.0 / static_cast<double>(m));
  for (int it = 0; it < max_iterations; ++it) {
    Vector next = T * v;
    next /= next.sum();
    const double change = (next - v).lpNorm<1>();
    v = std::move(next);
    if (change < 1e-13) return v;
  }
  throw Error(ErrorCode::NoConvergence, "power iteration did not converge; chain may be periodic");
}

std::vector<Triple> sample_triples(const RrHmmParams& p, std::size_t count, std::uint64_t seed,
                                   SampleMode mode) {
  std::vector<Triple> out;
  if (mode == SampleMode::Sliding) {
    const Vector stationary = p.T * p.pi;
    if ((stationary - p.pi).lpNorm<Eigen::Infinity>() > 1e-8)
      throw Error(ErrorCode::NonStationaryPrior, "sliding windows need a stationary prior");
    if (count == 0) return out;
    const auto seq = sample_sequence(p, count + 2, seed);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back({seq[i], seq[i + 1], seq[i + 2]});
    return out;
  }
  const Sampler s(p);
  CounterRng rng(seed);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    int h = s.initial(rng);
    Triple t{};
    for (int pos = 0; pos < 3; ++pos) {
      t[static_cast<std::size_t>(pos)] = s.emit(h, rng);
      if (pos < 2) h = s.next(h, rng);
    }
    out.push_back(t);
  }
  return out;
}

std::vector<Symbol> sample_sequence(const RrHmmParams& p, std::size_t length, std::uint64_t seed) {
  std::vector<Symbol> out;
  if (length == 0) return out;
  const Sampler s(p);
  CounterRng rng(seed);
  out.reserve(length);
  int h = s.initial(rng);
  for (std::size_t t = 0; t < length; ++t) {
    out.push_back(s.emit(h, rng));
    if (t + 1 < length) h = s.next(h, rng);
  }
  return out;
}

Matrix low_rank_operator(const RrHmmParams& p, Symbol x) {
  check_symbol(x, p.n);
  return p.S * p.O.row(x).transpose().asDiagonal() * p.R;
}

LowRankPrior low_rank_prior(const RrHmmParams& p) {
  LowRankPrior lp;
  lp.pi_l = p.R.colPivHouseholderQr().solve(p.pi);
  lp.residual = (p.R * lp.pi_l - p.pi).norm();
  return lp;
}

JointProbRoutes exact_joint_prob_routes(const RrHmmParams& p, std::span<const Symbol> seq) {
  for (Symbol x : seq) check_symbol(x, p.n);
  JointProbRoutes out;
  Vector h = p.pi;
  for (Symbol x : seq) h = p.T * (p.O.row(x).transpose().cwiseProduct(h));
  out.full = h.sum();

  const LowRankPrior lp = low_rank_prior(p);
  if (lp.residual <= 1e-8) {
    Vector l = lp.pi_l;
    for (Symbol x : seq) l = p.S * (p.O.row(x).transpose().cwiseProduct(p.R * l));
    out.low_rank = (p.R * l).sum();
  }
  return out;
}

double exact_joint_prob(const RrHmmParams& p, std::span<const Symbol> seq) {
  const JointProbRoutes r = exact_joint_prob_routes(p, seq);
  if (r.low_rank && std::abs(*r.low_rank - r.full) > 1e-10)
    throw Error(ErrorCode::OracleMismatch, "full-rank and low-rank joint probabilities disagree");
  return r.full;
}

FilterResult exact_filter(const RrHmmParams& p, std::span<const Symbol> seq) {
  for (Symbol x : seq) check_symbol(x, p.n);
  FilterResult r;
  r.beliefs.reserve(seq.size() + 1);
  r.beliefs.push_back(p.pi);
  for (Symbol x : seq) {
    const Vector joint = p.O.row(x).transpose().cwiseProduct(r.beliefs.back());
    const double c = joint.sum();
    if (!(c > 0.0))
      throw Error(ErrorCode::ZeroProbabilitySequence, "observed prefix has zero probability");
    r.conditionals.push_back(c);
    Vector next = p.T * (joint / c);
    next /= next.sum();
    r.beliefs.push_back(std::move(next));
  }
  return r;
}

RrHmmParams polygon_hmm(int m) {
  if (m < 3) throw Error(ErrorCode::InvalidArgument, "polygon model needs m >= 3");
  const double step = 2.0 * std::numbers::pi / m;
  Matrix T(m, m);
  Matrix O(4, m);
  for (int i = 0; i < m; ++i) {
    const double si = std::sin(step * (i + 1)), ci = std::cos(step * (i + 1));
    for (int j = 0; j < m; ++j) {
      const double sj = std::sin(step * (j + 1)), cj = std::cos(step * (j + 1));
      T(i, j) = (2.0 + si * sj + ci * cj) / (2.0 * m);
    }
    const double pr = (si + 1.0) / 2.0, q = (ci + 1.0) / 2.0;
    O.col(i) << pr * q, pr * (1.0 - q), (1.0 - pr) * q, (1.0 - pr) * (1.0 - q);
  }
  // The construction is column-stochastic up to rounding; normalize so the
  // 1e-12 invariant holds exactly.
  T.array().rowwise() /= T.colwise().sum().array();
  O.array().rowwise() /= O.colwise().sum().array();
  const int k = std::min(m, 3);
  return make_params(std::move(T), std::move(O), Vector::Constant(m, 1.0 / m), k);
}

RrHmmParams random_rr_hmm(int m, int n, int k, std::uint64_t seed) {
  if (k < 1 || k > m || n < 1) throw Error(ErrorCode::InvalidArgument, "bad random model shape");
  CounterRng rng(seed);
  auto random_stochastic = [&rng](int rows, int cols) {
    Matrix a(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) a(i, j) = 0.05 + rng.uniform();
    a.array().rowwise() /= a.colwise().sum().array();
    return a;
  };
  const Matrix R = random_stochastic(m, k);
  const Matrix S = random_stochastic(k, m);
  Matrix T = R * S;
  T.array().rowwise() /= T.colwise().sum().array();
  Matrix O = random_stochastic(n, m);
  return make_stationary_params(std::move(T), std::move(O), k);
}

}  // namespace rrhmm
