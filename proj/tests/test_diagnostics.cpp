#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>

#include "oracles.hpp"
#include "rrhmm/builtin_models.hpp"
#include "rrhmm/diagnostics.hpp"
#include "rrhmm/error.hpp"
#include "rrhmm/inference.hpp"
#include "rrhmm/rng.hpp"

using namespace rrhmm;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rrhmm::Error");
  return ErrorCode::InvalidArgument;
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv("SPECTRAL_RRHMM_THREADS", v, 1); }
  ~ThreadsEnv() { unsetenv("SPECTRAL_RRHMM_THREADS"); }
};

}  // namespace

TEST_SUITE("n0") {
  TEST_CASE("epsilon one needs a single symbol") {
    CHECK(n0((Vector(3) << 0.2, 0.5, 0.3).finished(), 1.0) == 1);
  }

  TEST_CASE("uniform marginal at one half") {
    for (int n = 1; n <= 9; ++n) CHECK(n0(Vector::Constant(n, 1.0 / n), 0.5) == (n + 1) / 2);
  }

  TEST_CASE("skewed marginal") {
    const Vector m = (Vector(4) << 0.05, 0.7, 0.05, 0.2).finished();
    CHECK(n0(m, 0.0) == 4);
    CHECK(n0(m, 0.1) == 2);
    CHECK(n0(m, 0.31) == 1);
    CHECK(n0(m, 0.29) == 2);
  }

  TEST_CASE("property: non-increasing in epsilon") {
    CounterRng rng(2);
    for (int rep = 0; rep < 30; ++rep) {
      Vector m(8);
      for (int i = 0; i < 8; ++i) m(i) = rng.uniform();
      m /= m.sum();
      int prev = 9;
      for (double eps = 0.0; eps <= 1.0; eps += 0.01) {
        const int v = n0(m, eps);
        CHECK(v >= 1);
        CHECK(v <= 8);
        CHECK(v <= prev);
        prev = v;
      }
    }
  }
}

TEST_SUITE("bound_quantities") {
  TEST_CASE("example 1 spectra are positive") {
    const auto p = example1().params;
    const auto model = learn(population_moments(p), 2);
    const auto r = bound_quantities(p, model.U, 0.1, 0.05, 3);
    CHECK(r.sigma_k_P21 > 0.0);
    CHECK(r.sigma_k_OR > 0.0);
    REQUIRE(r.sigma_k_UOR.has_value());
    CHECK(*r.sigma_k_UOR > 0.0);
    CHECK(r.sigma_k_P21 == doctest::Approx(sigma_k(population_moments(p).P21, 2)));
    CHECK(r.sigma_k_OR == doctest::Approx(sigma_k(p.O * p.R, 2)));
    CHECK(r.eps_tilde == doctest::Approx(r.sigma_k_OR * r.sigma_k_P21 * 0.1 / (12.0 * std::sqrt(2.0))));
    CHECK(r.n0_of_eps >= 1);
    CHECK(r.n0_of_eps <= 3);
    CHECK(r.n0_of_eps_tilde >= r.n0_of_eps);
    CHECK(r.theorem_N > 0.0);
    CHECK_FALSE(bound_quantities(p, std::nullopt, 0.1, 0.05, 3).sigma_k_UOR.has_value());
  }

  TEST_CASE("sample size follows the closed form") {
    const double N = theorem_sample_size(3, 0.2, 0.1, 2, 0.4, 0.05, 3, 2.0);
    const double expect = 2.0 * (9.0 / 0.04) *
                          (2.0 / (0.16 * std::pow(0.05, 4)) + 6.0 / (0.16 * 0.0025)) * std::log(10.0);
    CHECK(N == doctest::Approx(expect).epsilon(1e-14));
  }

  TEST_CASE("property: monotone in t, epsilon and n0") {
    const auto f = [](int t, double e, int n) { return theorem_sample_size(t, e, 0.05, 3, 0.3, 0.1, n, 1.0); };
    for (int t = 1; t < 6; ++t) CHECK(f(t + 1, 0.1, 2) > f(t, 0.1, 2));
    for (double e = 0.05; e < 1.0; e += 0.05) CHECK(f(2, e + 0.05, 2) < f(2, e, 2));
    for (int n = 1; n < 6; ++n) CHECK(f(2, 0.1, n + 1) > f(2, 0.1, n));
  }
}

TEST_SUITE("eigenvalues") {
  TEST_CASE("transition eigenvalues of example 1") {
    const auto e = transition_eigenvalues(example1().params.T, 2);
    REQUIRE(e.size() == 2);
    CHECK(std::abs(e[0] - 1.0) <= 1e-10);
    CHECK(std::abs(e[1]) <= std::abs(e[0]));
  }

  TEST_CASE("property: greedy matching is a bijection") {
    CounterRng rng(6);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<std::complex<double>> truth, est;
      for (int i = 0; i < 4; ++i) {
        truth.emplace_back(rng.normal(), rng.normal());
        est.emplace_back(rng.normal(), rng.normal());
      }
      const auto m = match_eigenvalues(truth, est);
      REQUIRE(m.size() == truth.size());
      std::vector<std::complex<double>> a = m, b = est;
      const auto less = [](auto x, auto y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); };
      std::sort(a.begin(), a.end(), less);
      std::sort(b.begin(), b.end(), less);
      CHECK(a == b);
    }
  }

  TEST_CASE("exact estimates match themselves") {
    const std::vector<std::complex<double>> truth{{1, 0}, {0.5, 0.2}, {0.5, -0.2}};
    const std::vector<std::complex<double>> est{{0.5, -0.2}, {1, 0}, {0.5, 0.2}};
    CHECK(match_eigenvalues(truth, est) == truth);
  }
}

TEST_SUITE("l1_joint_error") {
  TEST_CASE("population models are exact") {
    const auto p1 = example1().params;
    CHECK(l1_joint_error(learn(population_moments(p1), 2), p1, 3) <= 1e-8);
    const auto p3 = example3().params;
    CHECK(l1_joint_error(learn(population_moments_stacked(p3, 2), 3), p3, 4) <= 1e-8);
  }

  TEST_CASE("sums absolute differences of raw estimates") {
    const auto p = example1().params;
    const auto model = learn(estimate_moments(sample_triples(p, 3000, 3, SampleMode::Restart), 3), 2);
    double expect = 0.0;
    oracle::all_sequences(3, 2, [&](const std::vector<Symbol>& s) {
      expect += std::abs(seq_prob(model, s).raw - oracle::brute_joint_prob(p, s));
    });
    CHECK(l1_joint_error(model, p, 2) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("enumeration limit") {
    int count = 0;
    for_each_sequence(10, 5, [&](std::span<const Symbol>) { ++count; });
    CHECK(count == 100000);
    CHECK(code_of([] { for_each_sequence(10, 6, [](std::span<const Symbol>) {}); }) ==
          ErrorCode::SequenceSpaceTooLarge);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("parallel_for visits every index once and rethrows") {
    ThreadsEnv env("4");
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                      if (i == 7) throw Error(ErrorCode::InvalidArgument, "boom");
                    }),
                    Error);
  }

  TEST_CASE("eigen recovery is independent of the thread count") {
    const ExperimentConfig cfg{{2000, 8000}, 4, 7, 1};
    const auto p = example1().params;
    EigenRecoveryResult a, b;
    {
      ThreadsEnv env("1");
      a = eigen_recovery_experiment(p, 2, cfg);
    }
    {
      ThreadsEnv env("3");
      b = eigen_recovery_experiment(p, 2, cfg);
    }
    REQUIRE(a.trials.size() == 8);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
      CHECK(a.trials[i].N == b.trials[i].N);
      CHECK(a.trials[i].trial == b.trials[i].trial);
      CHECK(a.trials[i].estimated == b.trials[i].estimated);
      CHECK(a.trials[i].estimated.size() == 2);
    }
    REQUIRE(a.summary.size() == 4);
    for (std::size_t i = 0; i < a.summary.size(); ++i) {
      CHECK(a.summary[i].mean_real == b.summary[i].mean_real);
      CHECK(a.summary[i].half_width == b.summary[i].half_width);
    }
  }

  TEST_CASE("summary statistics recompute from the trials") {
    const ExperimentConfig cfg{{3000}, 5, 11, 1};
    const auto r = eigen_recovery_experiment(example1().params, 2, cfg);
    for (const auto& s : r.summary) {
      double sum = 0.0, sq = 0.0;
      for (const auto& t : r.trials) sum += t.estimated[static_cast<std::size_t>(s.index)].real();
      const double mean = sum / 5.0;
      for (const auto& t : r.trials) sq += std::pow(t.estimated[static_cast<std::size_t>(s.index)].real() - mean, 2);
      CHECK(s.mean_real == doctest::Approx(mean).epsilon(1e-12));
      CHECK(s.half_width == doctest::Approx(1.96 * std::sqrt(sq / 4.0) / std::sqrt(5.0)).epsilon(1e-12));
      CHECK(s.true_value == r.true_eigs[static_cast<std::size_t>(s.index)]);
    }
  }

  TEST_CASE("stacked sampling produces stacked moments") {
    const auto m = sample_moments(example2().params, 5000, 2, 3);
    CHECK(m.events.window() == 2);
    CHECK(m.sample_count == 5000u);
    CHECK(sample_moments(example1().params, 700, 1, 3).sample_count == 700u);
  }

  TEST_CASE("L1 experiment is deterministic and decreasing on example 1") {
    const ExperimentConfig cfg{{1000, 10000, 100000}, 6, 1, 1};
    const auto p = example1().params;
    const auto a = l1_error_experiment(p, 2, 3, cfg);
    const auto b = l1_error_experiment(p, 2, 3, cfg);
    REQUIRE(a.summary.size() == 3);
    for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i].l1 == b.trials[i].l1);
    CHECK(a.summary[1].mean < a.summary[0].mean);
    CHECK(a.summary[2].mean < a.summary[1].mean);
    CHECK(a.summary[2].mean <= a.summary[0].mean / 5.0);
  }

  TEST_CASE("L1 experiment refuses huge sequence spaces") {
    const ExperimentConfig cfg{{1000}, 1, 1, 1};
    CHECK(code_of([&] { l1_error_experiment(polygon_hmm(10), 3, 9, cfg); }) ==
          ErrorCode::SequenceSpaceTooLarge);
  }
}
