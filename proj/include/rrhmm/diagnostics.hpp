#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrhmm/hmm_core.hpp"
#include "rrhmm/spectral.hpp"

namespace rrhmm {

//! Quantities entering the finite-sample L1 bound. theorem_N is a shape
//! diagnostic: the bound's constant C is unknown and supplied by the caller.
struct BoundReport {
  double sigma_k_P21 = 0.0;
  double sigma_k_OR = 0.0;
  std::optional<double> sigma_k_UOR;
  int n0_of_eps = 0;
  //! Tolerance the bound feeds to n0: sigma_k(OR) sigma_k(P21) eps / (4 t sqrt(k)).
  double eps_tilde = 0.0;
  int n0_of_eps_tilde = 0;
  double theorem_N = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;
  int t = 0;
  double C = 1.0;
};

//! Smallest i in [1, n] such that the n - i smallest entries of `marginal`
//! sum to at most eps.
int n0(const Vector& marginal, double eps);

double theorem_sample_size(int t, double epsilon, double eta, int k, double sigma_k_or,
                           double sigma_k_p21, int n0_value, double C);

BoundReport bound_quantities(const RrHmmParams& params, const std::optional<Matrix>& U,
                             double epsilon, double eta, int t, double C = 1.0, int window = 1);

//! Worker count from SPECTRAL_RRHMM_THREADS, else hardware concurrency.
int thread_count();

//! Runs fn(0..count-1) across thread_count() workers. Results must be written
//! to per-index slots; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

struct ExperimentConfig {
  std::vector<std::size_t> Ns;
  int trials = 20;
  std::uint64_t seed = 1;
  int window = 1;
};

//! Training data for one (N, trial) cell: N i.i.d. triples for window 1, one
//! sequence yielding N stacked windows otherwise.
MomentEstimates sample_moments(const RrHmmParams& params, std::size_t N, int window,
                               std::uint64_t seed);

std::uint64_t cell_seed(std::uint64_t base, std::size_t n_index, int trial);

//! Nonzero eigenvalues of T, largest magnitude first, truncated to k.
std::vector<std::complex<double>> transition_eigenvalues(const Matrix& T, int k);

//! Greedy closest-pair matching; result[i] is the estimate paired with truth[i].
std::vector<std::complex<double>> match_eigenvalues(std::span<const std::complex<double>> truth,
                                                    std::span<const std::complex<double>> estimate);

struct EigenTrial {
  std::size_t N = 0;
  int trial = 0;
  std::vector<std::complex<double>> estimated;  // aligned with true_eigs
};

struct EigenSummary {
  std::size_t N = 0;
  int index = 0;
  std::complex<double> true_value;
  double mean_real = 0.0;
  double mean_imag = 0.0;
  double half_width = 0.0;  // 1.96 * stderr of the real part
};

struct EigenRecoveryResult {
  std::vector<std::complex<double>> true_eigs;
  std::vector<EigenTrial> trials;
  std::vector<EigenSummary> summary;
};

EigenRecoveryResult eigen_recovery_experiment(const RrHmmParams& params, int k,
                                              const ExperimentConfig& config);

//! Enumerates all n^t sequences; throws SequenceSpaceTooLarge beyond 1e5.
void for_each_sequence(int n, int t, const std::function<void(std::span<const Symbol>)>& fn);

//! sum over all length-t sequences of |Pr - Pr_hat| using raw model estimates.
double l1_joint_error(const ObservableModel& model, const RrHmmParams& params, int t);

struct L1Trial {
  std::size_t N = 0;
  int trial = 0;
  double l1 = 0.0;
};

struct L1Summary {
  std::size_t N = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct L1ErrorResult {
  std::vector<L1Trial> trials;
  std::vector<L1Summary> summary;
};

L1ErrorResult l1_error_experiment(const RrHmmParams& params, int k, int t,
                                  const ExperimentConfig& config);

}  // namespace rrhmm
