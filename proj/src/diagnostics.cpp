#include "rrhmm/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>

#include "rrhmm/error.hpp"
#include "rrhmm/inference.hpp"
#include "rrhmm/moments.hpp"
#include "rrhmm/rng.hpp"

namespace rrhmm {

int n0(const Vector& marginal, double eps) {
  std::vector<double> sorted(marginal.data(), marginal.data() + marginal.size());
  std::sort(sorted.begin(), sorted.end());
  const int n = static_cast<int>(sorted.size());
  // prefix[j] = sum of the j smallest entries
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 0; j < n; ++j)
    prefix[static_cast<std::size_t>(j) + 1] = prefix[static_cast<std::size_t>(j)] + sorted[static_cast<std::size_t>(j)];
  for (int i = 1; i <= n; ++i)
    if (prefix[static_cast<std::size_t>(n - i)] <= eps) return i;
  return n;
}

double theorem_sample_size(int t, double epsilon, double eta, int k, double sor, double sp21,
                           int n0_value, double C) {
  const double tt = static_cast<double>(t) * t;
  const double kk = static_cast<double>(k);
  const double core = kk / (sor * sor * std::pow(sp21, 4)) +
                      kk * n0_value / (sor * sor * sp21 * sp21);
  return C * (tt / (epsilon * epsilon)) * core * std::log(1.0 / eta);
}

BoundReport bound_quantities(const RrHmmParams& p, const std::optional<Matrix>& U, double epsilon,
                             double eta, int t, double C, int window) {
  BoundReport r;
  r.epsilon = epsilon;
  r.eta = eta;
  r.t = t;
  r.C = C;
  const MomentEstimates pop = population_moments_stacked(p, window);
  r.sigma_k_P21 = sigma_k(pop.P21, p.k);
  const Matrix obar_r = observation_block_matrix(p, window) * p.R;
  r.sigma_k_OR = sigma_k(obar_r, p.k);
  if (U && U->rows() == obar_r.rows()) r.sigma_k_UOR = sigma_k(U->transpose() * obar_r, p.k);
  // Marginal of the second (future) event.
  const Vector marginal = pop.P21.rowwise().sum();
  r.n0_of_eps = n0(marginal, epsilon);
  r.eps_tilde = r.sigma_k_OR * r.sigma_k_P21 * epsilon / (4.0 * t * std::sqrt(static_cast<double>(p.k)));
  r.n0_of_eps_tilde = n0(marginal, r.eps_tilde);
  r.theorem_N = theorem_sample_size(t, epsilon, eta, p.k, r.sigma_k_OR, r.sigma_k_P21,
                                    r.n0_of_eps_tilde, C);
  return r;
}

int thread_count() {
  if (const char* env = std::getenv("SPECTRAL_RRHMM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t n_index, int trial) {
  return derive_seed(base, (static_cast<std::uint64_t>(n_index) << 32) ^ static_cast<std::uint64_t>(trial));
}

MomentEstimates sample_moments(const RrHmmParams& p, std::size_t N, int window, std::uint64_t seed) {
  if (window == 1) {
    const auto data = sample_triples(p, N, seed, SampleMode::Restart);
    return estimate_moments(data, p.n);
  }
  const auto seq = sample_sequence(p, N + 2 * static_cast<std::size_t>(window), seed);
  return estimate_moments_stacked(seq, p.n, window);
}

std::vector<std::complex<double>> transition_eigenvalues(const Matrix& T, int k) {
  Eigen::EigenSolver<Matrix> es(T, false);
  std::vector<std::complex<double>> eigs(es.eigenvalues().data(),
                                         es.eigenvalues().data() + es.eigenvalues().size());
  std::stable_sort(eigs.begin(), eigs.end(),
                   [](auto a, auto b) { return std::abs(a) > std::abs(b); });
  if (static_cast<int>(eigs.size()) > k) eigs.resize(static_cast<std::size_t>(k));
  return eigs;
}

std::vector<std::complex<double>> match_eigenvalues(std::span<const std::complex<double>> truth,
                                                    std::span<const std::complex<double>> estimate) {
  if (truth.size() != estimate.size())
    throw Error(ErrorCode::DimensionMismatch, "eigenvalue lists differ in length");
  const std::size_t n = truth.size();
  std::vector<std::complex<double>> out(n);
  std::vector<bool> used_t(n, false), used_e(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used_t[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (used_e[j]) continue;
        const double d = std::abs(truth[i] - estimate[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    used_t[bi] = used_e[bj] = true;
    out[bi] = estimate[bj];
  }
  return out;
}

EigenRecoveryResult eigen_recovery_experiment(const RrHmmParams& p, int k,
                                              const ExperimentConfig& cfg) {
  EigenRecoveryResult res;
  res.true_eigs = transition_eigenvalues(p.T, k);
  const std::size_t cells = cfg.Ns.size() * static_cast<std::size_t>(cfg.trials);
  res.trials.resize(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t ni = cell / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(cell % static_cast<std::size_t>(cfg.trials));
    const MomentEstimates mom = sample_moments(p, cfg.Ns[ni], cfg.window, cell_seed(cfg.seed, ni, trial));
    const ObservableModel model = learn(mom, k);
    Eigen::EigenSolver<Matrix> es(model.operator_sum(), false);
    const std::vector<std::complex<double>> est(es.eigenvalues().data(),
                                                es.eigenvalues().data() + es.eigenvalues().size());
    res.trials[cell] = {cfg.Ns[ni], trial, match_eigenvalues(res.true_eigs, est)};
  });

  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    for (std::size_t idx = 0; idx < res.true_eigs.size(); ++idx) {
      EigenSummary s;
      s.N = cfg.Ns[ni];
      s.index = static_cast<int>(idx);
      s.true_value = res.true_eigs[idx];
      double sum = 0.0, sum_im = 0.0, sq = 0.0;
      for (int t = 0; t < cfg.trials; ++t) {
        const auto v = res.trials[ni * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)].estimated[idx];
        sum += v.real();
        sum_im += v.imag();
      }
      s.mean_real = sum / cfg.trials;
      s.mean_imag = sum_im / cfg.trials;
      for (int t = 0; t < cfg.trials; ++t) {
        const auto v = res.trials[ni * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)].estimated[idx];
        sq += (v.real() - s.mean_real) * (v.real() - s.mean_real);
      }
      const double sd = cfg.trials > 1 ? std::sqrt(sq / (cfg.trials - 1)) : 0.0;
      s.half_width = 1.96 * sd / std::sqrt(static_cast<double>(cfg.trials));
      res.summary.push_back(s);
    }
  }
  return res;
}

void for_each_sequence(int n, int t, const std::function<void(std::span<const Symbol>)>& fn) {
  if (t < 0 || n < 1) throw Error(ErrorCode::InvalidArgument, "bad sequence space");
  if (std::pow(static_cast<double>(n), t) > 1e5)
    throw Error(ErrorCode::SequenceSpaceTooLarge, "n^t exceeds 1e5 sequences");
  std::vector<Symbol> seq(static_cast<std::size_t>(t), 0);
  while (true) {
    fn(seq);
    int pos = t - 1;
    while (pos >= 0 && ++seq[static_cast<std::size_t>(pos)] == n) seq[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) return;
  }
}

double l1_joint_error(const ObservableModel& model, const RrHmmParams& p, int t) {
  double total = 0.0;
  for_each_sequence(p.n, t, [&](std::span<const Symbol> seq) {
    total += std::abs(exact_joint_prob(p, seq) - seq_prob(model, seq).raw);
  });
  return total;
}

L1ErrorResult l1_error_experiment(const RrHmmParams& p, int k, int t, const ExperimentConfig& cfg) {
  if (std::pow(static_cast<double>(p.n), t) > 1e5)
    throw Error(ErrorCode::SequenceSpaceTooLarge, "n^t exceeds 1e5 sequences");
  L1ErrorResult res;
  const std::size_t cells = cfg.Ns.size() * static_cast<std::size_t>(cfg.trials);
  res.trials.resize(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t ni = cell / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(cell % static_cast<std::size_t>(cfg.trials));
    const MomentEstimates mom = sample_moments(p, cfg.Ns[ni], cfg.window, cell_seed(cfg.seed, ni, trial));
    res.trials[cell] = {cfg.Ns[ni], trial, l1_joint_error(learn(mom, k), p, t)};
  });
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    L1Summary s;
    s.N = cfg.Ns[ni];
    double sum = 0.0, sq = 0.0;
    for (int tr = 0; tr < cfg.trials; ++tr) sum += res.trials[ni * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(tr)].l1;
    s.mean = sum / cfg.trials;
    for (int tr = 0; tr < cfg.trials; ++tr) {
      const double d = res.trials[ni * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(tr)].l1 - s.mean;
      sq += d * d;
    }
    s.std_error = cfg.trials > 1 ? std::sqrt(sq / (cfg.trials - 1) / cfg.trials) : 0.0;
    res.summary.push_back(s);
  }
  return res;
}

}  // namespace rrhmm
