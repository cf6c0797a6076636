#include "rrhmm/kde.hpp"

#include <cmath>
#include <numbers>

#include "rrhmm/error.hpp"

namespace rrhmm::kde {
namespace {

Point to_frame(const Point& x, const KdeConfig& c) {
  if (c.whitening) {
    if (x.size() != c.whitening->mean.size())
      throw Error(ErrorCode::DimensionMismatch, "point dimension differs from the whitening map");
    return c.whitening->apply(x);
  }
  if (x.size() != c.dim())
    throw Error(ErrorCode::DimensionMismatch, "point dimension differs from the kernel centers");
  return x;
}

// Squared scaled distances to every center.
Vector squared_distances(const Point& y, const KdeConfig& c, double width_factor) {
  Vector d2(c.n_centers());
  for (int i = 0; i < c.n_centers(); ++i) {
    const Vector u = (y - c.centers.row(i).transpose()).cwiseQuotient(c.scale * width_factor);
    d2(i) = u.squaredNorm();
  }
  return d2;
}

}  // namespace

void check_config(const KdeConfig& c) {
  if (c.n_centers() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 kernel centers");
  if (!(c.bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  if (c.scale.size() != c.dim() || (c.scale.array() <= 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "kernel widths must be positive, one per dimension");
  for (int i = 0; i < c.n_centers(); ++i)
    for (int j = i + 1; j < c.n_centers(); ++j)
      if (c.centers.row(i) == c.centers.row(j))
        throw Error(ErrorCode::InvalidArgument, "kernel centers must be distinct");
}

Matrix select_centers(std::span<const Point> points, int n_centers) {
  std::vector<const Point*> chosen;
  for (const Point& p : points) {
    if (static_cast<int>(chosen.size()) == n_centers) break;
    bool seen = false;
    for (const Point* c : chosen)
      if (*c == p) seen = true;
    if (!seen) chosen.push_back(&p);
  }
  if (chosen.empty()) throw Error(ErrorCode::EmptyDataset, "no points to pick centers from");
  Matrix centers(static_cast<Eigen::Index>(chosen.size()), chosen.front()->size());
  for (std::size_t i = 0; i < chosen.size(); ++i)
    centers.row(static_cast<Eigen::Index>(i)) = chosen[i]->transpose();
  return centers;
}

Whitening fit_whitening(std::span<const Point> points) {
  if (points.size() < 2) throw Error(ErrorCode::EmptyDataset, "whitening needs two or more points");
  const auto d = points.front().size();
  Whitening w;
  w.mean = Vector::Zero(d);
  for (const Point& p : points) w.mean += p;
  w.mean /= static_cast<double>(points.size());
  Matrix centered(static_cast<Eigen::Index>(points.size()), d);
  for (std::size_t i = 0; i < points.size(); ++i)
    centered.row(static_cast<Eigen::Index>(i)) = (points[i] - w.mean).transpose();
  const ThinSvd svd = thin_svd(centered / std::sqrt(static_cast<double>(points.size() - 1)));
  Vector inv = Vector::Zero(svd.sigma.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    inv(i) = svd.sigma(i) > 1e-12 * svd.sigma(0) ? 1.0 / svd.sigma(i) : 0.0;
  w.transform = inv.asDiagonal() * svd.V.transpose();
  return w;
}

Vector sample_scale(std::span<const Point> points) {
  if (points.size() < 2) throw Error(ErrorCode::EmptyDataset, "scale needs two or more points");
  const auto d = points.front().size();
  Vector mean = Vector::Zero(d), sq = Vector::Zero(d);
  for (const Point& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  for (const Point& p : points) sq += (p - mean).cwiseAbs2();
  return (sq / static_cast<double>(points.size() - 1)).cwiseSqrt();
}

double default_bandwidth(std::size_t n_points, int dim) {
  return std::pow(static_cast<double>(n_points), -1.0 / (dim + 4.0));
}

KdeConfig make_config(std::span<const Point> points, int n_centers, bool whiten) {
  KdeConfig c;
  if (whiten) {
    c.whitening = fit_whitening(points);
    std::vector<Point> white;
    white.reserve(points.size());
    for (const Point& p : points) white.push_back(c.whitening->apply(p));
    c.centers = select_centers(white, n_centers);
    c.scale = Vector::Ones(c.centers.cols());
  } else {
    c.centers = select_centers(points, n_centers);
    c.scale = sample_scale(points);
  }
  c.bandwidth = default_bandwidth(points.size(), static_cast<int>(c.centers.cols()));
  check_config(c);
  return c;
}

Vector featurize(const Point& x, const KdeConfig& c, bool scaled) {
  const Point y = to_frame(x, c);
  const Vector d2 = squared_distances(y, c, scaled ? c.bandwidth : 1.0);
  Eigen::Index nearest = 0;
  const double d2_min = d2.minCoeff(&nearest);
  // Shifted by the nearest center, so the sum is at least 1 unless d2 is not finite.
  const Vector w = d2.unaryExpr([d2_min](double d) { return std::exp(-0.5 * (d - d2_min)); });
  const double total = w.sum();
  if (std::isfinite(total) && total > 0.0) return w / total;
  Vector one_hot = Vector::Zero(c.n_centers());
  one_hot(nearest) = 1.0;
  return one_hot;
}

double mixture_density(const Point& x, const KdeConfig& c, const Vector& weights) {
  const Point y = to_frame(x, c);
  const Vector d2 = squared_distances(y, c, 1.0);
  double norm = std::pow(2.0 * std::numbers::pi, -0.5 * c.dim()) / c.scale.prod();
  // Density of the raw point: account for the whitening Jacobian.
  if (c.whitening) norm *= std::abs(c.whitening->transform.determinant());
  return norm * weights.dot(d2.unaryExpr([](double d) { return std::exp(-0.5 * d); }));
}

std::vector<PointTriple> sliding_triples(std::span<const Point> seq) {
  std::vector<PointTriple> out;
  for (std::size_t t = 0; t + 2 < seq.size(); ++t) out.push_back({seq[t], seq[t + 1], seq[t + 2]});
  return out;
}

MomentEstimates estimate_moments_kde(std::span<const PointTriple> data, const KdeConfig& c) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no triples");
  const int n = c.n_centers();
  MomentEstimates m;
  m.events = EventSpace(n, 1);
  m.sample_count = data.size();
  m.P1 = Vector::Zero(n);
  m.P21 = Matrix::Zero(n, n);
  m.P3.assign(static_cast<std::size_t>(n), Matrix::Zero(n, n));
  for (const PointTriple& t : data) {
    const Vector phi = featurize(t[0], c, false);
    const Vector psi = featurize(t[1], c, false);
    const Vector xi = featurize(t[2], c, false);
    const Vector zeta = featurize(t[1], c, true);
    m.P1 += phi;
    m.P21.noalias() += psi * phi.transpose();
    const Matrix outer = xi * phi.transpose();
    for (int x = 0; x < n; ++x)
      if (zeta(x) != 0.0) m.P3[static_cast<std::size_t>(x)] += zeta(x) * outer;
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  m.P1 *= inv;
  m.P21 *= inv;
  for (Matrix& p : m.P3) p *= inv;
  return m;
}

Matrix blended_operator(const ObservableModel& model, const Vector& sigma) {
  if (sigma.size() != model.n_base())
    throw Error(ErrorCode::DimensionMismatch, "sigma length differs from the operator count");
  if (std::abs(sigma.sum() - 1.0) > 1e-8)
    throw Error(ErrorCode::NotNormalized, "blend weights must sum to 1");
  Matrix out = Matrix::Zero(model.k, model.k);
  for (int j = 0; j < sigma.size(); ++j)
    if (sigma(j) != 0.0) out += sigma(j) * model.B[static_cast<std::size_t>(j)];
  return out;
}

BeliefState filter_continuous(const ObservableModel& model, const BeliefState& state,
                              const Point& x, const KdeConfig& c, int distrust_horizon) {
  const Vector sigma = featurize(x, c, true);
  return filter_with_operator(model, state, blended_operator(model, sigma), distrust_horizon);
}

}  // namespace rrhmm::kde
