#include "rrhmm/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rrhmm/error.hpp"

namespace rrhmm::io {
namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::Io, "cannot parse number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::Io, "cannot parse integer '" + s + "'");
  return v;
}

bool next_row(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Json matrix_to_json(const Matrix& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Io, "matrix must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::Io, "ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) a(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return a;
}

Json vector_to_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json params_to_json(const RrHmmParams& p) {
  return {{"m", p.m}, {"n", p.n}, {"k", p.k}, {"T", matrix_to_json(p.T)},
          {"O", matrix_to_json(p.O)}, {"pi", vector_to_json(p.pi)}};
}

RrHmmParams params_from_json(const Json& j) {
  try {
    RrHmmParams p = make_params(matrix_from_json(j.at("T")), matrix_from_json(j.at("O")),
                                vector_from_json(j.at("pi")), j.at("k").get<int>());
    if (p.m != j.at("m").get<int>() || p.n != j.at("n").get<int>())
      throw Error(ErrorCode::DimensionMismatch, "m/n fields disagree with the matrices");
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad model file: ") + e.what());
  }
}

Json moments_to_json(const MomentEstimates& m) {
  Json p3 = Json::array();
  for (const Matrix& x : m.P3) p3.push_back(matrix_to_json(x));
  return {{"n", m.events.n_base()},
          {"window", m.events.window()},
          {"N", m.sample_count ? Json(*m.sample_count) : Json(nullptr)},
          {"P1", vector_to_json(m.P1)},
          {"P21", matrix_to_json(m.P21)},
          {"P3", std::move(p3)}};
}

MomentEstimates moments_from_json(const Json& j) {
  try {
    MomentEstimates m;
    m.events = EventSpace(j.at("n").get<int>(), j.at("window").get<int>());
    if (!j.at("N").is_null()) m.sample_count = j.at("N").get<std::uint64_t>();
    m.P1 = vector_from_json(j.at("P1"));
    m.P21 = matrix_from_json(j.at("P21"));
    for (const Json& x : j.at("P3")) m.P3.push_back(matrix_from_json(x));
    const int ne = m.events.n_events();
    if (m.P1.size() != ne || m.P21.rows() != ne || m.P21.cols() != ne ||
        static_cast<int>(m.P3.size()) != m.events.n_base())
      throw Error(ErrorCode::DimensionMismatch, "moment shapes disagree with the event space");
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad moments file: ") + e.what());
  }
}

Json model_to_json(const ObservableModel& m) {
  Json bx = Json::array();
  for (const Matrix& b : m.B) bx.push_back(matrix_to_json(b));
  return {{"k", m.k},
          {"n", m.events.n_base()},
          {"window", m.events.window()},
          {"U", matrix_to_json(m.U)},
          {"b1", vector_to_json(m.b1)},
          {"b_inf", vector_to_json(m.b_inf)},
          {"Bx", std::move(bx)},
          {"normalizer_floor", m.normalizer_floor},
          {"N", m.sample_count ? Json(*m.sample_count) : Json(nullptr)}};
}

ObservableModel model_from_json(const Json& j) {
  try {
    ObservableModel m;
    m.k = j.at("k").get<int>();
    m.events = EventSpace(j.at("n").get<int>(), j.at("window").get<int>());
    m.U = matrix_from_json(j.at("U"));
    m.b1 = vector_from_json(j.at("b1"));
    m.b_inf = vector_from_json(j.at("b_inf"));
    for (const Json& b : j.at("Bx")) m.B.push_back(matrix_from_json(b));
    m.normalizer_floor = j.at("normalizer_floor").get<double>();
    if (j.contains("N") && !j["N"].is_null()) m.sample_count = j["N"].get<std::uint64_t>();
    const bool ok = m.b1.size() == m.k && m.b_inf.size() == m.k &&
                    static_cast<int>(m.B.size()) == m.events.n_base() &&
                    std::all_of(m.B.begin(), m.B.end(),
                                [&](const Matrix& b) { return b.rows() == m.k && b.cols() == m.k; }) &&
                    m.U.rows() == m.events.n_events() && m.U.cols() == m.k;
    if (!ok) throw Error(ErrorCode::DimensionMismatch, "observable model shapes are inconsistent");
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad model file: ") + e.what());
  }
}

Json kde_config_to_json(const kde::KdeConfig& c) {
  Json j = {{"centers", matrix_to_json(c.centers)},
            {"scale", vector_to_json(c.scale)},
            {"bandwidth", c.bandwidth},
            {"kernel", "gaussian"}};
  if (c.whitening)
    j["whitening"] = {{"mean", vector_to_json(c.whitening->mean)},
                      {"transform", matrix_to_json(c.whitening->transform)}};
  return j;
}

kde::KdeConfig kde_config_from_json(const Json& j) {
  try {
    kde::KdeConfig c;
    c.centers = matrix_from_json(j.at("centers"));
    c.scale = vector_from_json(j.at("scale"));
    c.bandwidth = j.at("bandwidth").get<double>();
    if (j.contains("whitening"))
      c.whitening = kde::Whitening{vector_from_json(j["whitening"].at("mean")),
                                   matrix_from_json(j["whitening"].at("transform"))};
    kde::check_config(c);
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad kde config: ") + e.what());
  }
}

Json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int Dataset::alphabet_hint() const {
  int hi = -1;
  for (const Triple& t : triples) hi = std::max({hi, t[0], t[1], t[2]});
  for (Symbol s : sequence) hi = std::max(hi, s);
  return hi + 1;
}

void write_triples_csv(std::ostream& os, const std::vector<Triple>& triples) {
  os << "x1,x2,x3\n";
  for (const Triple& t : triples) os << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

void write_sequence_csv(std::ostream& os, const std::vector<Symbol>& seq) {
  os << "x\n";
  for (Symbol s : seq) os << s << '\n';
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!next_row(is, line)) throw Error(ErrorCode::Io, "dataset is missing its header row");
  Dataset d;
  if (line == "x1,x2,x3") {
    d.kind = DatasetKind::Triples;
  } else if (line == "x") {
    d.kind = DatasetKind::Sequence;
  } else {
    throw Error(ErrorCode::Io, "unrecognized dataset header '" + line + "'");
  }
  while (next_row(is, line)) {
    const auto cells = split_csv_line(line);
    if (d.kind == DatasetKind::Triples) {
      if (cells.size() != 3) throw Error(ErrorCode::Io, "triple row needs 3 columns");
      d.triples.push_back({static_cast<Symbol>(parse_int(cells[0])),
                           static_cast<Symbol>(parse_int(cells[1])),
                           static_cast<Symbol>(parse_int(cells[2]))});
    } else {
      if (cells.size() != 1) throw Error(ErrorCode::Io, "sequence row needs 1 column");
      d.sequence.push_back(static_cast<Symbol>(parse_int(cells[0])));
    }
  }
  return d;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dataset_csv(in);
}

std::vector<kde::Point> read_points_csv(std::istream& is) {
  std::string line;
  if (!next_row(is, line)) throw Error(ErrorCode::Io, "point file is missing its header row");
  const auto d = split_csv_line(line).size();
  std::vector<kde::Point> out;
  while (next_row(is, line)) {
    const auto cells = split_csv_line(line);
    if (cells.size() != d) throw Error(ErrorCode::Io, "point row has the wrong number of columns");
    kde::Point p(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) p(static_cast<Eigen::Index>(i)) = parse_double(cells[i]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<kde::Point> read_points_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_points_csv(in);
}

void write_points_csv(std::ostream& os, const std::vector<kde::Point>& points) {
  const Eigen::Index d = points.empty() ? 1 : points.front().size();
  for (Eigen::Index i = 0; i < d; ++i) os << (i ? ",x" : "x") << i;
  os << '\n';
  for (const auto& p : points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? "," : "") << format_double(p(i));
    os << '\n';
  }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows, int n_base) {
  os << "step,symbol,normalizer,trust";
  for (int x = 0; x < n_base; ++x) os << ",p" << x;
  os << '\n';
  for (const TraceRow& r : rows) {
    os << r.step << ',' << r.symbol << ',' << format_double(r.normalizer) << ',' << (r.trust ? 1 : 0);
    for (Eigen::Index x = 0; x < r.predictive.size(); ++x) os << ',' << format_double(r.predictive(x));
    os << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::string line;
  if (!next_row(is, line)) throw Error(ErrorCode::Io, "trace is missing its header row");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "step")
    throw Error(ErrorCode::Io, "unrecognized trace header");
  const auto n = static_cast<Eigen::Index>(header.size() - 4);
  std::vector<TraceRow> rows;
  while (next_row(is, line)) {
    const auto c = split_csv_line(line);
    if (static_cast<Eigen::Index>(c.size()) != n + 4) throw Error(ErrorCode::Io, "short trace row");
    TraceRow r;
    r.step = parse_int(c[0]);
    r.symbol = static_cast<Symbol>(parse_int(c[1]));
    r.normalizer = parse_double(c[2]);
    r.trust = parse_int(c[3]) != 0;
    r.predictive.resize(n);
    for (Eigen::Index x = 0; x < n; ++x) r.predictive(x) = parse_double(c[static_cast<std::size_t>(x + 4)]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_eigen_trials_csv(std::ostream& os, const std::string& experiment,
                            const EigenRecoveryResult& r) {
  os << "experiment,N,trial,index,true_value,estimated_value\n";
  for (const EigenTrial& t : r.trials)
    for (std::size_t i = 0; i < t.estimated.size(); ++i)
      os << experiment << ',' << t.N << ',' << t.trial << ',' << i << ','
         << format_double(r.true_eigs[i].real()) << ',' << format_double(t.estimated[i].real()) << '\n';
}

void write_eigen_summary_csv(std::ostream& os, const std::string& experiment,
                             const EigenRecoveryResult& r) {
  os << "experiment,N,index,true_value,mean_estimate,mean_imag,half_width_95\n";
  for (const EigenSummary& s : r.summary)
    os << experiment << ',' << s.N << ',' << s.index << ',' << format_double(s.true_value.real())
       << ',' << format_double(s.mean_real) << ',' << format_double(s.mean_imag) << ','
       << format_double(s.half_width) << '\n';
}

void write_l1_trials_csv(std::ostream& os, const std::string& experiment, const L1ErrorResult& r) {
  os << "experiment,N,trial,l1_error\n";
  for (const L1Trial& t : r.trials)
    os << experiment << ',' << t.N << ',' << t.trial << ',' << format_double(t.l1) << '\n';
}

void write_l1_summary_csv(std::ostream& os, const std::string& experiment, const L1ErrorResult& r) {
  os << "experiment,N,mean_l1_error,stderr\n";
  for (const L1Summary& s : r.summary)
    os << experiment << ',' << s.N << ',' << format_double(s.mean) << ','
       << format_double(s.std_error) << '\n';
}

}  // namespace rrhmm::io
