#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "dbn/image.hpp"
#include "dbn/matrix.hpp"

namespace dbn::fcm {

using Matrix = dbn::Matrix;
using FeatureMatrix = Matrix;
using MembershipMatrix = Matrix;
using Centroids = Matrix;

struct FcmConfig {
  std::size_t clusters = 2;
  double m_initial = 2.5;
  double m_final = 1.5;
  double epsilon = 1e-5;
  std::size_t max_iterations = 100;
  std::uint64_t seed = 0;
  double tau = 0.6;

  void validate() const;
};

struct FcmResult {
  MembershipMatrix memberships;
  Centroids centroids;
  std::size_t iterations_run = 0;
  double final_shift = 0.0;
  bool converged = false;
  std::vector<double> fuzzifier_trace;
};

/// Squared Euclidean distance ||x - v||^2.
double squared_distance(const double* x, const double* v, std::size_t d);

/// u_ij = D_ij^b / sum_k D_ik^b with b = -1/(m-1) and D the squared
/// Euclidean distance. A point sitting exactly on one or more centroids
/// splits its mass equally among them. Rows are renormalized to sum to 1.
MembershipMatrix compute_memberships(const FeatureMatrix& points, const Centroids& centroids, double m);

/// v_j = sum_i u_ij^m x_i / sum_i u_ij^m. Throws NumericError naming the
/// cluster if its weight sum is zero.
Centroids update_centroids(const FeatureMatrix& points, const MembershipMatrix& u, double m);

/// c distinct rows of `points` drawn without replacement with Rng(seed).
/// Draws that coincide in value are retried (budget of 16 attempts) before
/// failing with NumericError.
Centroids initial_centroids(const FeatureMatrix& points, std::size_t clusters, std::uint64_t seed);

/// Fuzzifier at iteration t (1-based): m_i + t (m_f - m_i) / T.
double fuzzifier_at(const FcmConfig& config, std::size_t t);

/// Fuzzy C-Means with a time-varying fuzzifier. Each iteration updates m,
/// recomputes memberships from the previous centroids, updates centroids,
/// and stops once E = sum_j ||v_j(t) - v_j(t-1)||_2 <= epsilon.
FcmResult cluster(const FeatureMatrix& points, const FcmConfig& config);
/// Same, starting from explicit centroids instead of seeded sampling.
FcmResult cluster(const FeatureMatrix& points, const FcmConfig& config, Centroids initial);

/// Row indices whose largest membership is >= tau, ascending. tau in (0, 1).
std::vector<std::size_t> select_features(const FcmResult& result, double tau);

/// Argmax cluster per row, ties to the lower index.
std::vector<std::size_t> hard_labels(const MembershipMatrix& u);

struct Segmentation {
  GrayImage labels;  ///< cluster index per pixel
  FcmResult result;
};

/// Clusters pixel intensities (1-D points) and labels each pixel by argmax
/// membership.
Segmentation segment(const GrayImage& image, const FcmConfig& config);

/// Foreground mask from a segmentation: pixels whose membership passes
/// `tau` and whose cluster is not the darkest one. Values 0/1.
GrayImage foreground_mask(const Segmentation& seg, double tau);

// CSV import/export. Numbers use 17 significant digits.
FeatureMatrix read_points_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
/// Writes `iterations,final_shift,converged` followed by one value row.
void write_summary_csv(const FcmResult& r, const std::filesystem::path& path);

}  // namespace dbn::fcm
