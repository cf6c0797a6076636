#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>

#include "rrhmm/builtin_models.hpp"
#include "rrhmm/error.hpp"
#include "rrhmm/io.hpp"
#include "rrhmm/rng.hpp"

using namespace rrhmm;
using namespace rrhmm::io;

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

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("format_double") {
  TEST_CASE("property: parses back to the same bits") {
    CounterRng rng(1);
    for (int i = 0; i < 2000; ++i) {
      const double v = rng.normal() * std::pow(10.0, static_cast<int>(rng.uniform() * 40) - 20);
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.25) == "0.25");
    std::stringstream pts;
    write_points_csv(pts, {Vector::Constant(1, std::numeric_limits<double>::denorm_min())});
    CHECK(read_points_csv(pts)[0](0) == std::numeric_limits<double>::denorm_min());
  }
}

TEST_SUITE("json") {
  TEST_CASE("params round trip") {
    for (const auto& p : {example1().params, example3().params, polygon_hmm(7)}) {
      const auto q = params_from_json(Json::parse(params_to_json(p).dump()));
      CHECK(q.T == p.T);
      CHECK(q.O == p.O);
      CHECK(q.pi == p.pi);
      CHECK(q.k == p.k);
      CHECK((q.R * q.S - p.T).cwiseAbs().maxCoeff() <= 1e-12);
    }
    const Json j = params_to_json(example1().params);
    for (const char* key : {"m", "n", "k", "T", "O", "pi"}) CHECK(j.contains(key));
  }

  TEST_CASE("moments round trip, sampled and population") {
    const auto pop = population_moments_stacked(example2().params, 2);
    const auto a = moments_from_json(Json::parse(moments_to_json(pop).dump()));
    CHECK(a.P21 == pop.P21);
    CHECK_FALSE(a.sample_count.has_value());
    CHECK(moments_to_json(pop)["N"].is_null());
    CHECK(a.events.window() == 2);

    const auto s = estimate_moments(sample_triples(example1().params, 500, 2, SampleMode::Restart), 3);
    const auto b = moments_from_json(Json::parse(moments_to_json(s).dump()));
    CHECK(b.P1 == s.P1);
    for (std::size_t x = 0; x < 3; ++x) CHECK(b.P3[x] == s.P3[x]);
    CHECK(b.sample_count == 500u);
  }

  TEST_CASE("model round trip") {
    const auto m = learn(population_moments_stacked(example3().params, 2), 3);
    const Json j = model_to_json(m);
    for (const char* key : {"k", "n", "window", "U", "b1", "b_inf", "Bx", "normalizer_floor"})
      CHECK(j.contains(key));
    const auto r = model_from_json(Json::parse(j.dump()));
    CHECK(r.U == m.U);
    CHECK(r.b1 == m.b1);
    CHECK(r.b_inf == m.b_inf);
    for (std::size_t x = 0; x < m.B.size(); ++x) CHECK(r.B[x] == m.B[x]);
    CHECK(r.normalizer_floor == m.normalizer_floor);
    CHECK(r.events.window() == 2);
  }

  TEST_CASE("kde config round trip") {
    kde::KdeConfig c;
    c.centers = (Matrix(3, 2) << 0.1, 0.2, 1.0 / 3.0, -4, 5e-7, 9).finished();
    c.scale = (Vector(2) << 0.7, 1.3).finished();
    c.bandwidth = 0.123;
    c.whitening = kde::Whitening{(Vector(2) << 1, 2).finished(), Matrix::Identity(2, 2) * 0.5};
    const auto r = kde_config_from_json(Json::parse(kde_config_to_json(c).dump()));
    CHECK(r.centers == c.centers);
    CHECK(r.scale == c.scale);
    CHECK(r.bandwidth == c.bandwidth);
    REQUIRE(r.whitening.has_value());
    CHECK(r.whitening->transform == c.whitening->transform);
    CHECK(kde_config_to_json(c)["kernel"] == "gaussian");
  }

  TEST_CASE("malformed input") {
    CHECK(code_of([] { matrix_from_json(Json::parse("[[1,2],[3]]")); }) == ErrorCode::Io);
    CHECK(code_of([] { params_from_json(Json::parse("{\"T\": 3}")); }) == ErrorCode::Io);
    Json bad = model_to_json(learn(population_moments(example1().params), 2));
    bad["b1"] = Json::array({1.0});
    CHECK(code_of([&] { model_from_json(bad); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([] { read_json("/nonexistent/x.json"); }) == ErrorCode::Io);
  }

  TEST_CASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "rrhmm_io_test.json";
    write_json(path, params_to_json(example2().params));
    CHECK(params_from_json(read_json(path)).O == example2().params.O);
    std::filesystem::remove(path);
  }
}

TEST_SUITE("csv") {
  TEST_CASE("triples and sequences round trip") {
    const auto triples = sample_triples(example1().params, 200, 4, SampleMode::Restart);
    std::stringstream a;
    write_triples_csv(a, triples);
    CHECK(first_line(a.str()) == "x1,x2,x3");
    const auto da = read_dataset_csv(a);
    CHECK(da.kind == DatasetKind::Triples);
    CHECK(da.triples == triples);

    const auto seq = sample_sequence(example2().params, 300, 4);
    std::stringstream b;
    write_sequence_csv(b, seq);
    CHECK(first_line(b.str()) == "x");
    const auto db = read_dataset_csv(b);
    CHECK(db.kind == DatasetKind::Sequence);
    CHECK(db.sequence == seq);
    CHECK(db.alphabet_hint() == example2().params.n);
  }

  TEST_CASE("bad datasets") {
    std::stringstream a("y\n1\n");
    CHECK(code_of([&] { read_dataset_csv(a); }) == ErrorCode::Io);
    std::stringstream b("x1,x2,x3\n1,2\n");
    CHECK(code_of([&] { read_dataset_csv(b); }) == ErrorCode::Io);
    std::stringstream c("x\nabc\n");
    CHECK(code_of([&] { read_dataset_csv(c); }) == ErrorCode::Io);
    std::stringstream d("");
    CHECK(code_of([&] { read_dataset_csv(d); }) == ErrorCode::Io);
  }

  TEST_CASE("points round trip exactly") {
    CounterRng rng(5);
    std::vector<kde::Point> pts;
    for (int i = 0; i < 50; ++i) pts.push_back((Vector(3) << rng.normal(), rng.normal(), 1e-9 * rng.normal()).finished());
    std::stringstream s;
    write_points_csv(s, pts);
    CHECK(read_points_csv(s) == pts);
    std::stringstream bad("a,b\n1,2\n3\n");
    CHECK(code_of([&] { read_points_csv(bad); }) == ErrorCode::Io);
  }

  TEST_CASE("trace round trip") {
    const auto p = example1().params;
    const auto model = learn(population_moments(p), 2);
    const auto rows = filter_trace(model, sample_sequence(p, 40, 1));
    std::stringstream s;
    write_trace_csv(s, rows, 3);
    CHECK(first_line(s.str()) == "step,symbol,normalizer,trust,p0,p1,p2");
    const auto back = read_trace_csv(s);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(back[i].step == rows[i].step);
      CHECK(back[i].symbol == rows[i].symbol);
      CHECK(back[i].normalizer == rows[i].normalizer);
      CHECK(back[i].trust == rows[i].trust);
      CHECK(back[i].predictive == rows[i].predictive);
    }
  }

  TEST_CASE("experiment headers and row counts") {
    const ExperimentConfig cfg{{500, 1000}, 3, 1, 1};
    const auto e = eigen_recovery_experiment(example1().params, 2, cfg);
    std::stringstream t, s;
    write_eigen_trials_csv(t, "example1", e);
    write_eigen_summary_csv(s, "example1", e);
    CHECK(first_line(t.str()) == "experiment,N,trial,index,true_value,estimated_value");
    CHECK(first_line(s.str()) == "experiment,N,index,true_value,mean_estimate,mean_imag,half_width_95");
    const std::string ts = t.str(), ss = s.str();
    CHECK(std::count(ts.begin(), ts.end(), '\n') == 1 + 2 * 3 * 2);
    CHECK(std::count(ss.begin(), ss.end(), '\n') == 1 + 2 * 2);

    std::string line;
    std::getline(t, line);
    std::getline(t, line);
    const auto cells = split_csv_line(line);
    REQUIRE(cells.size() == 6);
    CHECK(cells[0] == "example1");
    CHECK(cells[1] == "500");
    CHECK(std::stod(cells[5]) == e.trials[0].estimated[0].real());

    const auto l = l1_error_experiment(example1().params, 2, 2, cfg);
    std::stringstream lt, ls;
    write_l1_trials_csv(lt, "l1", l);
    write_l1_summary_csv(ls, "l1", l);
    CHECK(first_line(lt.str()) == "experiment,N,trial,l1_error");
    CHECK(first_line(ls.str()) == "experiment,N,mean_l1_error,stderr");
  }

  TEST_CASE("split_csv_line") {
    CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    std::stringstream crlf("x\r\n2\r\n0\r\n");
    CHECK(read_dataset_csv(crlf).sequence == std::vector<Symbol>{2, 0});
  }
}
