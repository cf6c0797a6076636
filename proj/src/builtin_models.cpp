#include "rrhmm/builtin_models.hpp"

#include "rrhmm/error.hpp"

namespace rrhmm {
namespace {

Matrix normalize_columns(const Matrix& a) {
  Matrix out = a;
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

BuiltinModel finish(std::string name, const Matrix& printed_t, const Matrix& printed_o, int k) {
  const int m = static_cast<int>(printed_t.rows());
  Matrix T = k < m ? project_to_stochastic_rank(printed_t, k) : normalize_columns(printed_t);
  if ((T.array() < 0.0).any())
    throw Error(ErrorCode::NotStochastic, name + ": rank projection produced negative entries");
  Matrix O = normalize_columns(printed_o);
  BuiltinModel b;
  b.name = std::move(name);
  b.adjustment.transition_max_change = (T - printed_t).cwiseAbs().maxCoeff();
  b.adjustment.observation_max_change = (O - printed_o).cwiseAbs().maxCoeff();
  b.params = make_stationary_params(std::move(T), std::move(O), k);
  return b;
}

}  // namespace

Matrix project_to_stochastic_rank(const Matrix& T, int k) {
  const ThinSvd svd = thin_svd(T);
  Matrix low = svd.U.leftCols(k) * svd.sigma.head(k).asDiagonal() *
               svd.V.leftCols(k).transpose();
  return normalize_columns(low);
}

BuiltinModel example1() {
  Matrix T(3, 3), O(3, 3);
  T << 0.3894, 0.2371, 0.3735,
       0.2371, 0.4985, 0.2644,
       0.3735, 0.2644, 0.3621;
  O << 0.6, 0.2, 0.2,
       0.2, 0.6, 0.2,
       0.2, 0.2, 0.6;
  return finish("example1", T, O, 2);
}

BuiltinModel example2() {
  Matrix T(3, 3), O(2, 3);
  T << 0.6736, 0.0051, 0.1639,
       0.0330, 0.8203, 0.2577,
       0.2935, 0.1746, 0.5784;
  O << 1, 0, 0.5,
       0, 1, 0.5;
  return finish("example2", T, O, 3);
}

BuiltinModel example3() {
  Matrix T(4, 4), O(2, 4);
  T << 0.7829, 0.1036, 0.0399, 0.0736,
       0.1036, 0.4237, 0.4262, 0.0465,
       0.0399, 0.4262, 0.4380, 0.0959,
       0.0736, 0.0465, 0.0959, 0.7840;
  O << 1, 0, 1, 0,
       0, 1, 0, 1;
  return finish("example3", T, O, 3);
}

BuiltinModel builtin_model(std::string_view name, int polygon_states) {
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "example3") return example3();
  if (name == "polygon") return {"polygon", polygon_hmm(polygon_states), {}};
  throw Error(ErrorCode::InvalidArgument, "unknown builtin model '" + std::string(name) + "'");
}

std::vector<std::string> builtin_model_names() {
  return {"example1", "example2", "example3", "polygon"};
}

}  // namespace rrhmm
