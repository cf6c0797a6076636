#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rrhmm/inference.hpp"
#include "rrhmm/moments.hpp"
#include "rrhmm/spectral.hpp"

namespace rrhmm::kde {

using Point = Vector;

//! Affine map x -> transform * (x - mean) giving unit spherical covariance.
struct Whitening {
  Vector mean;
  Matrix transform;

  Point apply(const Point& x) const { return transform * (x - mean); }
};

//! Isotropic Gaussian kernels at `centers` (one per row) with per-dimension
//! unit widths `scale`; the bandwidth multiplies those widths for the
//! scaled kernel. Centers are stored in the (optionally whitened) frame.
struct KdeConfig {
  Matrix centers;
  Vector scale;
  double bandwidth = 1.0;
  std::optional<Whitening> whitening;

  int n_centers() const { return static_cast<int>(centers.rows()); }
  int dim() const { return static_cast<int>(centers.cols()); }
};

//! Throws InvalidArgument unless n >= 2, bandwidth > 0, scale > 0 and the
//! centers are pairwise distinct.
void check_config(const KdeConfig& config);

//! First `n_centers` distinct points of the stream (exact equality).
Matrix select_centers(std::span<const Point> points, int n_centers);

Whitening fit_whitening(std::span<const Point> points);

//! Sample standard deviation per dimension.
Vector sample_scale(std::span<const Point> points);

//! N^(-1/(d+4)) reference-rule shrink factor.
double default_bandwidth(std::size_t n_points, int dim);

//! Centers from the stream, unit widths = sample std, default bandwidth.
//! With `whiten`, points are whitened first and widths are 1.
KdeConfig make_config(std::span<const Point> points, int n_centers, bool whiten);

//! L1-normalized kernel weights of x against every center. Falls back to a
//! one-hot vector at the nearest center when every weight underflows.
Vector featurize(const Point& x, const KdeConfig& config, bool scaled);

//! Kernel density of x as a mixture of the (unscaled) kernels with weights w.
double mixture_density(const Point& x, const KdeConfig& config, const Vector& weights);

using PointTriple = std::array<Point, 3>;

std::vector<PointTriple> sliding_triples(std::span<const Point> sequence);

//! P1 = mean phi, P21 = mean psi phi^T, P3[x] = mean zeta_x xi phi^T.
MomentEstimates estimate_moments_kde(std::span<const PointTriple> data, const KdeConfig& config);

//! Convex combination sum_j sigma_j B_j. Throws NotNormalized if sigma does
//! not sum to 1 within 1e-8.
Matrix blended_operator(const ObservableModel& model, const Vector& sigma);

BeliefState filter_continuous(const ObservableModel& model, const BeliefState& state,
                              const Point& x, const KdeConfig& config,
                              int distrust_horizon = kDefaultDistrustHorizon);

}  // namespace rrhmm::kde
