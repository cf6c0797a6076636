#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rrhmm/linalg.hpp"

namespace rrhmm {

//! Observation symbols are 0-based indices into the alphabet.
using Symbol = int;
using Triple = std::array<Symbol, 3>;

//! Ground-truth reduced-rank HMM. T and O are column-stochastic:
//! T(i, j) = Pr[h' = i | h = j], O(i, j) = Pr[x = i | h = j]. T = R * S.
struct RrHmmParams {
  int m = 0;
  int n = 0;
  int k = 0;
  Matrix T;
  Matrix O;
  Vector pi;
  Matrix R;
  Matrix S;
};

struct TransitionFactors {
  Matrix R;  // m x k
  Matrix S;  // k x m
};

//! Thin-SVD split T = (U Sigma)(V^T), rescaled so that ||R||_1 == 1.
TransitionFactors factorize_transition(const Matrix& T, int k, double tol = kRankTolerance);

//! Checks the structural invariants (stochastic T/O, positive normalized pi,
//! rank(T) == k) and fills in R, S. Throws on violation.
RrHmmParams make_params(Matrix T, Matrix O, Vector pi, int k);

//! As above with pi set to the stationary distribution of T.
RrHmmParams make_stationary_params(Matrix T, Matrix O, int k);

struct ConditionCheck {
  bool pass = false;
  double measured = 0.0;
};

//! Measured quantities behind the sufficient conditions for consistent
//! spectral learning. Never throws; failures are reported.
struct ConditionReport {
  ConditionCheck pi_positive;          // min_i pi_i > 0
  ConditionCheck transition_rank;      // numerical rank of T == k
  ConditionCheck observation_rank;     // numerical rank of O >= k
  ConditionCheck r_l1_norm;            // ||R||_1 <= 1
  ConditionCheck r_uniform_column;     // min column L2 norm of R <= sqrt(k/m)
  std::optional<ConditionCheck> uor_invertible;  // sigma_k(U^T O R) > 1e-8
  ConditionCheck s_pi_o_full_row_rank;           // sigma_k(S diag(pi) O^T) > 0

  bool all_pass() const;
};

ConditionReport validate(const RrHmmParams& params, const std::optional<Matrix>& U = std::nullopt);

//! Power iteration from the uniform vector. Throws NoConvergence after
//! max_iterations.
Vector stationary_distribution(const Matrix& T, int max_iterations = 1'000'000);

enum class SampleMode { Restart, Sliding };

std::vector<Triple> sample_triples(const RrHmmParams& params, std::size_t count,
                                   std::uint64_t seed, SampleMode mode);

//! One chain of the given length started from pi.
std::vector<Symbol> sample_sequence(const RrHmmParams& params, std::size_t length,
                                    std::uint64_t seed);

//! Pr[x_1..x_t] by the forward recursion 1^T A_{x_t} ... A_{x_1} pi, cross-checked
//! against the low-rank route 1^T R W_{x_t} ... W_{x_1} pi_l when pi lies in
//! range(R). Throws OracleMismatch if the two disagree by more than 1e-10.
double exact_joint_prob(const RrHmmParams& params, std::span<const Symbol> sequence);

struct JointProbRoutes {
  double full = 0.0;
  std::optional<double> low_rank;  // absent when pi is not in range(R)
};
JointProbRoutes exact_joint_prob_routes(const RrHmmParams& params,
                                        std::span<const Symbol> sequence);

//! W_x = S diag(O(x, :)) R
Matrix low_rank_operator(const RrHmmParams& params, Symbol x);

//! Least-squares solution of R * pi_l = pi, with its residual norm.
struct LowRankPrior {
  Vector pi_l;
  double residual = 0.0;
};
LowRankPrior low_rank_prior(const RrHmmParams& params);

struct FilterResult {
  //! beliefs[s] = Pr[h_{s+1} | x_1..x_s]; beliefs.front() == pi.
  std::vector<Vector> beliefs;
  //! conditionals[s] = Pr[x_{s+1} | x_1..x_s]
  std::vector<double> conditionals;

  const Vector& last() const { return beliefs.back(); }
};

FilterResult exact_filter(const RrHmmParams& params, std::span<const Symbol> sequence);

//! Rank-3 RR-HMM with m states on a circle of predictive distributions over 4
//! symbols. pi is uniform (T is doubly stochastic).
RrHmmParams polygon_hmm(int m);

//! Random rank-k model: R and S have random stochastic columns, O random
//! stochastic columns, pi stationary.
RrHmmParams random_rr_hmm(int m, int n, int k, std::uint64_t seed);

void check_symbol(Symbol x, int n);

}  // namespace rrhmm
