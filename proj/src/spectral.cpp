#include "rrhmm/spectral.hpp"

#include <algorithm>
#include <string>

#include "rrhmm/error.hpp"

namespace rrhmm {

Matrix ObservableModel::operator_sum() const {
  Matrix sum = Matrix::Zero(k, k);
  for (const Matrix& b : B) sum += b;
  return sum;
}

ObservableModel learn(const MomentEstimates& mom, int k, const LearnOptions& opt) {
  const auto dim = std::min(mom.P21.rows(), mom.P21.cols());
  if (k < 1 || k > dim)
    throw Error(ErrorCode::RankTooLarge,
                "k = " + std::to_string(k) + " outside [1, " + std::to_string(dim) + "]");
  const ThinSvd svd = thin_svd(mom.P21);
  if (svd.sigma(k - 1) < opt.degenerate_ratio * svd.sigma(0) || svd.sigma(0) <= 0.0)
    throw Error(ErrorCode::DegenerateMoments,
                "sigma_k(P21) = " + std::to_string(svd.sigma(k - 1)) + " is numerically zero");

  ObservableModel model;
  model.k = k;
  model.U = svd.U.leftCols(k);
  fix_column_signs(model.U);
  model.events = mom.events;
  model.sample_count = mom.sample_count;
  model.normalizer_floor = opt.normalizer_floor;

  const Matrix ut_p21 = model.U.transpose() * mom.P21;
  const Matrix ut_p21_pinv = pinv(ut_p21, opt.rcond);
  model.b1 = model.U.transpose() * mom.P1;
  model.b_inf = pinv(ut_p21.transpose(), opt.rcond) * mom.P1;
  model.B.reserve(mom.P3.size());
  for (const Matrix& p3 : mom.P3) model.B.push_back(model.U.transpose() * p3 * ut_p21_pinv);
  return model;
}

RankSelection select_rank(const MomentEstimates& mom, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorCode::InvalidArgument, "rank threshold must lie in (0, 1)");
  RankSelection sel;
  sel.singular_values = singular_values(mom.P21);
  sel.threshold_used = threshold;
  sel.chosen_k = numerical_rank(sel.singular_values, threshold);
  return sel;
}

double similarity_check(const ObservableModel& model, const RrHmmParams& params) {
  const Matrix obar = observation_block_matrix(params, model.events.window());
  if (model.U.rows() != obar.rows() || model.k != params.k)
    throw Error(ErrorCode::NotInvertible, "U^T O R is not square for this model and params");
  const Matrix M = model.U.transpose() * obar * params.R;
  if (sigma_k(M, model.k) < 1e-10)
    throw Error(ErrorCode::NotInvertible, "sigma_k(U^T O R) below 1e-10");
  const auto lu = M.fullPivLu();
  const Matrix m_inv = lu.inverse();

  double dev = 0.0;
  for (Symbol x = 0; x < params.n; ++x) {
    const Matrix w = low_rank_operator(params, x);
    dev = std::max(dev, (m_inv * model.B[static_cast<std::size_t>(x)] * M - w).cwiseAbs().maxCoeff());
  }
  const LowRankPrior lp = low_rank_prior(params);
  dev = std::max(dev, (model.b1 - M * lp.pi_l).cwiseAbs().maxCoeff());
  const Eigen::RowVectorXd binf_t = Vector::Ones(params.m).transpose() * params.R * m_inv;
  dev = std::max(dev, (model.b_inf.transpose() - binf_t).cwiseAbs().maxCoeff());
  return dev;
}

}  // namespace rrhmm
