#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrhmm/diagnostics.hpp"
#include "rrhmm/hmm_core.hpp"
#include "rrhmm/inference.hpp"
#include "rrhmm/kde.hpp"
#include "rrhmm/moments.hpp"
#include "rrhmm/spectral.hpp"

namespace rrhmm::io {

using Json = nlohmann::json;

//! Shortest representation that round-trips the double exactly.
std::string format_double(double v);

Json matrix_to_json(const Matrix& a);  // row-major nested arrays
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

//! {m, n, k, T, O, pi}; R and S are recomputed on load.
Json params_to_json(const RrHmmParams& p);
RrHmmParams params_from_json(const Json& j);

//! {n, window, N, P1, P21, P3}; N is null for population moments.
Json moments_to_json(const MomentEstimates& m);
MomentEstimates moments_from_json(const Json& j);

//! {k, n, window, U, b1, b_inf, Bx, normalizer_floor, N}
Json model_to_json(const ObservableModel& m);
ObservableModel model_from_json(const Json& j);

Json kde_config_to_json(const kde::KdeConfig& c);
kde::KdeConfig kde_config_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

//! Datasets: header "x1,x2,x3" (triples) or "x" (sequence).
enum class DatasetKind { Triples, Sequence };

struct Dataset {
  DatasetKind kind = DatasetKind::Sequence;
  std::vector<Triple> triples;
  std::vector<Symbol> sequence;

  //! Largest symbol + 1 (0 when empty).
  int alphabet_hint() const;
};

void write_triples_csv(std::ostream& os, const std::vector<Triple>& triples);
void write_sequence_csv(std::ostream& os, const std::vector<Symbol>& seq);
Dataset read_dataset_csv(std::istream& is);
Dataset read_dataset_csv(const std::filesystem::path& path);

//! One point per row, d columns, header required.
std::vector<kde::Point> read_points_csv(std::istream& is);
std::vector<kde::Point> read_points_csv(const std::filesystem::path& path);
void write_points_csv(std::ostream& os, const std::vector<kde::Point>& points);

//! step,symbol,normalizer,trust,p0..p{n-1}
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows, int n_base);
std::vector<TraceRow> read_trace_csv(std::istream& is);

//! experiment,N,trial,index,true_value,estimated_value (real parts)
void write_eigen_trials_csv(std::ostream& os, const std::string& experiment,
                            const EigenRecoveryResult& r);
void write_eigen_summary_csv(std::ostream& os, const std::string& experiment,
                             const EigenRecoveryResult& r);
void write_l1_trials_csv(std::ostream& os, const std::string& experiment, const L1ErrorResult& r);
void write_l1_summary_csv(std::ostream& os, const std::string& experiment, const L1ErrorResult& r);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace rrhmm::io
