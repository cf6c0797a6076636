#include <doctest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "rrhmm/builtin_models.hpp"
#include "rrhmm/error.hpp"
#include "rrhmm/inference.hpp"

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

struct Case {
  const char* name;
  RrHmmParams params;
  int window;
};

std::vector<Case> suite() {
  return {{"example1", example1().params, 1},
          {"example2", example2().params, 2},
          {"example3", example3().params, 2},
          {"polygon10", polygon_hmm(10), 1}};
}

ObservableModel population_model(const Case& c) {
  return learn(population_moments_stacked(c.params, c.window), c.params.k);
}

// k = 1 model where symbol 0 has zero probability.
ObservableModel blocking_model(double weight_of_one) {
  ObservableModel m;
  m.k = 1;
  m.events = EventSpace(2, 1);
  m.U = Matrix::Identity(2, 1);
  m.b1 = Vector::Ones(1);
  m.b_inf = Vector::Ones(1);
  m.B = {Matrix::Zero(1, 1), Matrix::Constant(1, 1, weight_of_one)};
  return m;
}

}  // namespace

TEST_SUITE("init_belief") {
  TEST_CASE("starts at b1 with trust") {
    const auto model = learn(population_moments(example1().params), 2);
    const auto s = init_belief(model);
    CHECK(s.b == model.b1);
    CHECK(s.step == 1);
    CHECK(s.trust());
    CHECK(s.underflow_count == 0u);
    CHECK(std::abs(model.b_inf.dot(s.b) - 1.0) <= 1e-10);
  }

  TEST_CASE("rank one model") {
    const auto model = learn(population_moments(example1().params), 1);
    CHECK(init_belief(model).b.size() == 1);
  }
}

TEST_SUITE("seq_prob") {
  TEST_CASE("empty sequence and a short oracle check") {
    const auto p = example1().params;
    const auto model = learn(population_moments(p), 2);
    CHECK(seq_prob(model, std::vector<Symbol>{}).raw == doctest::Approx(1.0).epsilon(1e-10));
    const std::vector<Symbol> s{1, 0};
    CHECK(std::abs(seq_prob(model, s).raw - oracle::brute_joint_prob(p, s)) <= 1e-9);
    const std::vector<Symbol> bad{0, 3};
    CHECK(code_of([&] { seq_prob(model, bad); }) == ErrorCode::SymbolOutOfRange);
  }

  TEST_CASE("every suite model matches the oracle up to length 4") {
    for (const auto& c : suite()) {
      CAPTURE(c.name);
      const auto model = population_model(c);
      const int tmax = c.params.n > 5 ? 3 : 4;
      for (int t = 0; t <= tmax; ++t)
        oracle::all_sequences(c.params.n, t, [&](const std::vector<Symbol>& s) {
          CHECK(std::abs(seq_prob(model, s).raw - oracle::brute_joint_prob(c.params, s)) <= 1e-9);
        });
    }
  }

  TEST_CASE("sampled model is close in L1 over length 3") {
    const auto p = example1().params;
    const auto model = learn(estimate_moments(sample_triples(p, 100000, 21, SampleMode::Restart), 3), 2);
    double l1 = 0.0;
    oracle::all_sequences(3, 3, [&](const std::vector<Symbol>& s) {
      l1 += std::abs(seq_prob(model, s).raw - oracle::brute_joint_prob(p, s));
      const auto sp = seq_prob(model, s);
      CHECK(sp.clamped >= 0.0);
      CHECK(sp.clamped <= 1.0);
    });
    CHECK(l1 <= 0.1);
  }
}

TEST_SUITE("filter_update") {
  TEST_CASE("belief equals the projected latent belief") {
    for (const auto& c : suite()) {
      CAPTURE(c.name);
      const auto model = population_model(c);
      const Matrix obar = observation_block_matrix(c.params, c.window);
      const auto seq = sample_sequence(c.params, 50, 77);
      const auto exact = exact_filter(c.params, seq);
      auto state = init_belief(model);
      CHECK((state.b - model.U.transpose() * obar * exact.beliefs[0]).cwiseAbs().maxCoeff() <= 1e-8);
      for (std::size_t t = 0; t < seq.size(); ++t) {
        state = filter_update(model, state, seq[t]);
        const Vector expect = model.U.transpose() * obar * exact.beliefs[t + 1];
        CHECK((state.b - expect).cwiseAbs().maxCoeff() <= 1e-8);
      }
      CHECK(state.underflow_count == 0u);
    }
  }

  TEST_CASE("belief agrees with hidden-path sums on short prefixes") {
    const auto p = example1().params;
    const auto model = learn(population_moments(p), 2);
    oracle::all_sequences(3, 3, [&](const std::vector<Symbol>& s) {
      auto state = init_belief(model);
      for (Symbol x : s) state = filter_update(model, state, x);
      const Vector expect = model.U.transpose() * p.O * oracle::brute_belief(p, s);
      CHECK((state.b - expect).cwiseAbs().maxCoeff() <= 1e-8);
    });
  }

  TEST_CASE("zero normalizer takes the underflow path") {
    const auto model = blocking_model(1.0);
    auto state = filter_update(model, init_belief(model), 0);
    CHECK(state.b.allFinite());
    CHECK(state.underflow_count == 1u);
    CHECK_FALSE(state.trust());
    CHECK(state.last_normalizer == 0.0);
  }

  TEST_CASE("trust returns after the distrust horizon") {
    auto model = blocking_model(1.0);
    model.B[0] = Matrix::Constant(1, 1, 1e-14);
    auto state = filter_update(model, init_belief(model), 0, 3);
    CHECK(state.underflow_count == 1u);
    CHECK(state.b(0) == doctest::Approx(1e-14 / 1e-12));
    for (int i = 0; i < 3; ++i) {
      CHECK_FALSE(state.trust());
      state.b = Vector::Ones(1);
      state = filter_update(model, state, 1, 3);
    }
    CHECK(state.trust());
    CHECK(state.underflow_count == 1u);
  }

  TEST_CASE("property: normalizers telescope to the joint probability") {
    for (const auto& c : suite()) {
      CAPTURE(c.name);
      const auto model = population_model(c);
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto seq = sample_sequence(c.params, 12, seed);
        auto state = init_belief(model);
        double product = 1.0;
        for (Symbol x : seq) {
          state = filter_update(model, state, x);
          product *= state.last_normalizer;
        }
        REQUIRE(state.underflow_count == 0u);
        CHECK(std::abs(product - seq_prob(model, seq).raw) <= 1e-9);
      }
    }
  }
}

TEST_SUITE("cond_prob") {
  TEST_CASE("initial state gives the observation marginal") {
    const auto p = example1().params;
    const auto model = learn(population_moments(p), 2);
    const auto s = init_belief(model);
    const Vector marginal = p.O * p.pi;
    double total = 0.0;
    for (Symbol x = 0; x < 3; ++x) {
      const auto c = cond_prob(model, s, x);
      CHECK(std::abs(c.prob - marginal(x)) <= 1e-9);
      CHECK(std::abs(c.raw - marginal(x)) <= 1e-9);
      total += c.prob;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }

  TEST_CASE("property: clamped outputs are a probability vector on sampled models") {
    const auto p = example2().params;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto model = learn(estimate_moments(sample_triples(p, 2000, seed, SampleMode::Restart), 4), 2);
      auto state = init_belief(model);
      for (Symbol x : sample_sequence(p, 60, seed + 50)) {
        try {
          const auto pr = predictive(model, state);
          CHECK((pr.prob.array() >= 0.0).all());
          CHECK(std::abs(pr.prob.sum() - 1.0) <= 1e-12);
          double sum = 0.0;
          for (Symbol y = 0; y < 4; ++y) sum += cond_prob(model, state, y).prob;
          CHECK(std::abs(sum - 1.0) <= 1e-12);
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::DegenerateDenominator);
        }
        state = filter_update(model, state, x);
        CHECK(state.b.allFinite());
      }
    }
  }

  TEST_CASE("sampled example 1 tracks the oracle predictive") {
    const auto p = example1().params;
    const auto model = learn(estimate_moments(sample_triples(p, 100000, 31, SampleMode::Restart), 3), 2);
    const auto seq = sample_sequence(p, 100, 32);
    const auto exact = exact_filter(p, seq);
    auto state = init_belief(model);
    double total = 0.0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const Vector truth = p.O * exact.beliefs[t];
      total += (predictive(model, state).prob - truth).cwiseAbs().sum();
      state = filter_update(model, state, seq[t]);
    }
    CHECK(total / static_cast<double>(seq.size()) <= 0.1);
  }

  TEST_CASE("degenerate denominator") {
    const auto model = blocking_model(0.0);
    CHECK(code_of([&] { cond_prob(model, init_belief(model), 1); }) == ErrorCode::DegenerateDenominator);
  }
}

TEST_SUITE("predict_t_ahead") {
  TEST_CASE("horizon 1 is the one-step predictive") {
    const auto model = learn(population_moments(example1().params), 2);
    auto s = filter_update(model, init_belief(model), 2);
    const auto a = predict_t_ahead(model, s, 1);
    for (Symbol x = 0; x < 3; ++x) CHECK(a.prob(x) == cond_prob(model, s, x).prob);
    CHECK(code_of([&] { predict_t_ahead(model, s, 0); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("long horizons reach the stationary observation marginal") {
    for (const auto& c : {suite()[0], suite()[2]}) {
      CAPTURE(c.name);
      const auto model = population_model(c);
      auto s = init_belief(model);
      for (Symbol x : sample_sequence(c.params, 7, 3)) s = filter_update(model, s, x);
      const Vector marginal = c.params.O * oracle::eigen_stationary(c.params.T);
      CHECK((predict_t_ahead(model, s, 200).prob - marginal).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }

  TEST_CASE("matches the exact two-step predictive") {
    const auto p = example1().params;
    const auto model = learn(population_moments(p), 2);
    const std::vector<Symbol> prefix{0, 2};
    auto s = init_belief(model);
    for (Symbol x : prefix) s = filter_update(model, s, x);
    const Vector truth = p.O * p.T * oracle::brute_belief(p, prefix);
    CHECK((predict_t_ahead(model, s, 2).prob - truth).cwiseAbs().maxCoeff() <= 1e-9);
  }

  TEST_CASE("polygon sweep stays inside the simplex") {
    const auto c = suite()[3];
    const auto model = population_model(c);
    auto s = init_belief(model);
    for (Symbol x : sample_sequence(c.params, 5, 9)) s = filter_update(model, s, x);
    for (int tau = 1; tau <= 40; ++tau) {
      const auto pr = predict_t_ahead(model, s, tau);
      CHECK((pr.prob.array() >= 0.0).all());
      CHECK((pr.prob.array() <= 1.0).all());
      CHECK(std::abs(pr.prob.sum() - 1.0) <= 1e-12);
    }
  }
}

TEST_SUITE("simulate") {
  TEST_CASE("length zero") {
    const auto model = learn(population_moments(example1().params), 2);
    const auto r = simulate(model, 0, 1);
    CHECK(r.symbols.empty());
    CHECK_FALSE(r.aborted);
  }

  TEST_CASE("unigram frequencies match the stationary marginal") {
    const auto p = example1().params;
    const auto model = learn(population_moments(p), 2);
    const auto r = simulate(model, 100000, 5);
    REQUIRE_FALSE(r.aborted);
    Vector freq = Vector::Zero(3);
    for (Symbol x : r.symbols) freq(x) += 1.0;
    freq /= static_cast<double>(r.symbols.size());
    CHECK((freq - p.O * oracle::eigen_stationary(p.T)).cwiseAbs().sum() <= 0.02);
  }

  TEST_CASE("same seed, same sequence") {
    const auto model = learn(population_moments_stacked(example2().params, 2), 3);
    CHECK(simulate(model, 500, 42).symbols == simulate(model, 500, 42).symbols);
    CHECK(simulate(model, 500, 42).symbols != simulate(model, 500, 43).symbols);
  }

  TEST_CASE("degenerate model aborts with a partial sequence") {
    const auto r = simulate(blocking_model(0.0), 10, 1);
    CHECK(r.aborted);
    CHECK(r.symbols.empty());
    CHECK_FALSE(r.reason.empty());
    const auto ok = simulate(blocking_model(1.0), 10, 1);
    CHECK_FALSE(ok.aborted);
    CHECK(ok.symbols == std::vector<Symbol>(10, 1));
  }
}

TEST_SUITE("filter_trace") {
  TEST_CASE("one row per symbol, normalizers multiply to the joint probability") {
    const auto p = example3().params;
    const auto model = learn(population_moments_stacked(p, 2), 3);
    const auto seq = sample_sequence(p, 15, 4);
    const auto rows = filter_trace(model, seq);
    REQUIRE(rows.size() == seq.size());
    double product = 1.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].step == static_cast<std::int64_t>(i + 1));
      CHECK(rows[i].symbol == seq[i]);
      CHECK(rows[i].trust);
      CHECK(std::abs(rows[i].predictive.sum() - 1.0) <= 1e-12);
      product *= rows[i].normalizer;
    }
    CHECK(std::abs(product - seq_prob(model, seq).raw) <= 1e-12);
    CHECK(std::abs(rows[0].normalizer - rows[0].predictive(seq[0])) <= 1e-9);
  }
}
