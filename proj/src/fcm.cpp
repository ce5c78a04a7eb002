#include "dbn/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "dbn/dataio.hpp"
#include "dbn/error.hpp"
#include "dbn/rng.hpp"

namespace dbn::fcm {

void FcmConfig::validate() const {
  if (clusters < 1) throw ConfigError("fcm: clusters must be >= 1");
  if (!(m_initial > 1.0) || !(m_final > 1.0)) throw ConfigError("fcm: fuzzifiers m_i and m_f must be > 1");
  if (!(epsilon > 0.0)) throw ConfigError("fcm: epsilon must be > 0");
  if (max_iterations < 1) throw ConfigError("fcm: max_iterations must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("fcm: tau must lie in (0, 1)");
}

double squared_distance(const double* x, const double* v, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = x[k] - v[k];
    s += diff * diff;
  }
  return s;
}

MembershipMatrix compute_memberships(const FeatureMatrix& points, const Centroids& centroids, double m) {
  if (!(m > 1.0)) throw ConfigError("compute_memberships: fuzzifier must be > 1");
  if (points.cols() != centroids.cols()) throw ConfigError("compute_memberships: dimension mismatch");
  const std::size_t n = points.rows();
  const std::size_t c = centroids.rows();
  const double b = -1.0 / (m - 1.0);

  MembershipMatrix u(n, c);
  std::vector<double> dist(c);
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = INFINITY;
    std::size_t zeros = 0;
    for (std::size_t j = 0; j < c; ++j) {
      dist[j] = squared_distance(points.row(i), centroids.row(j), points.cols());
      dmin = std::min(dmin, dist[j]);
      if (dist[j] == 0.0) ++zeros;
    }
    double* ui = u.row(i);
    if (zeros > 0) {
      for (std::size_t j = 0; j < c; ++j) ui[j] = dist[j] == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
      continue;
    }
    // Ratios to the nearest centroid keep d^b inside (0, 1].
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      ui[j] = std::pow(dist[j] / dmin, b);
      sum += ui[j];
    }
    for (std::size_t j = 0; j < c; ++j) ui[j] /= sum;
  }
  return u;
}

Centroids update_centroids(const FeatureMatrix& points, const MembershipMatrix& u, double m) {
  if (u.rows() != points.rows()) throw ConfigError("update_centroids: row count mismatch");
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const std::size_t c = u.cols();
  Centroids v(c, d);
  for (std::size_t j = 0; j < c; ++j) {
    double wsum = 0.0;
    double* vj = v.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::pow(u(i, j), m);
      wsum += w;
      const double* xi = points.row(i);
      for (std::size_t k = 0; k < d; ++k) vj[k] += w * xi[k];
    }
    if (!(wsum > 0.0)) throw NumericError("update_centroids: cluster " + std::to_string(j) + " has zero total weight");
    for (std::size_t k = 0; k < d; ++k) vj[k] /= wsum;
  }
  return v;
}

Centroids initial_centroids(const FeatureMatrix& points, std::size_t clusters, std::uint64_t seed) {
  const std::size_t n = points.rows();
  if (clusters > n) throw ConfigError("fcm: need at least as many points as clusters");
  constexpr int kRetryBudget = 16;
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    // Partial Fisher-Yates: first `clusters` slots are the sample.
    for (std::size_t i = 0; i < clusters; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);

    Centroids v(clusters, points.cols());
    for (std::size_t j = 0; j < clusters; ++j) std::copy_n(points.row(idx[j]), points.cols(), v.row(j));
    bool distinct = true;
    for (std::size_t a = 0; a < clusters && distinct; ++a)
      for (std::size_t b = a + 1; b < clusters && distinct; ++b)
        if (std::equal(v.row(a), v.row(a) + v.cols(), v.row(b))) distinct = false;
    if (distinct) return v;
  }
  throw NumericError("fcm: could not draw " + std::to_string(clusters) + " distinct initial centroids in " +
                     std::to_string(kRetryBudget) + " attempts");
}

double fuzzifier_at(const FcmConfig& config, std::size_t t) {
  return config.m_initial +
         static_cast<double>(t) * (config.m_final - config.m_initial) / static_cast<double>(config.max_iterations);
}

FcmResult cluster(const FeatureMatrix& points, const FcmConfig& config) {
  config.validate();
  if (points.rows() < config.clusters) throw ConfigError("fcm: need at least as many points as clusters");
  return cluster(points, config, initial_centroids(points, config.clusters, config.seed));
}

FcmResult cluster(const FeatureMatrix& points, const FcmConfig& config, Centroids initial) {
  config.validate();
  if (points.rows() < config.clusters) throw ConfigError("fcm: need at least as many points as clusters");
  if (initial.rows() != config.clusters || initial.cols() != points.cols())
    throw ConfigError("fcm: initial centroids have the wrong shape");
  for (double x : points.data())
    if (!std::isfinite(x)) throw NumericError("fcm: non-finite input point");

  FcmResult r;
  Centroids prev = std::move(initial);
  for (std::size_t t = 1; t <= config.max_iterations; ++t) {
    const double m = fuzzifier_at(config, t);
    r.fuzzifier_trace.push_back(m);
    r.memberships = compute_memberships(points, prev, m);
    r.centroids = update_centroids(points, r.memberships, m);

    double shift = 0.0;
    for (std::size_t j = 0; j < config.clusters; ++j)
      shift += std::sqrt(squared_distance(r.centroids.row(j), prev.row(j), points.cols()));
    r.final_shift = shift;
    r.iterations_run = t;
    if (!std::isfinite(shift)) throw NumericError("fcm: centroid shift became non-finite");
    if (shift <= config.epsilon) {
      r.converged = true;
      break;
    }
    prev = r.centroids;
  }
  return r;
}

std::vector<std::size_t> select_features(const FcmResult& result, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("select_features: tau must lie in (0, 1)");
  std::vector<std::size_t> keep;
  const auto& u = result.memberships;
  for (std::size_t i = 0; i < u.rows(); ++i) {
    const double* row = u.row(i);
    if (*std::max_element(row, row + u.cols()) >= tau) keep.push_back(i);
  }
  return keep;
}

std::vector<std::size_t> hard_labels(const MembershipMatrix& u) {
  std::vector<std::size_t> labels(u.rows());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    const double* row = u.row(i);
    labels[i] = static_cast<std::size_t>(std::max_element(row, row + u.cols()) - row);  // first max wins
  }
  return labels;
}

Segmentation segment(const GrayImage& image, const FcmConfig& config) {
  if (image.empty()) throw ConfigError("fcm segment: empty image");
  if (config.clusters > 255) throw ConfigError("fcm segment: at most 255 clusters fit a label image");
  std::vector<double> pts(image.pixels().begin(), image.pixels().end());
  const FeatureMatrix points(image.size(), 1, std::move(pts));
  Segmentation seg{GrayImage(image.width(), image.height()), cluster(points, config)};
  const auto labels = hard_labels(seg.result.memberships);
  for (std::size_t i = 0; i < labels.size(); ++i) seg.labels.pixels()[i] = static_cast<std::uint8_t>(labels[i]);
  return seg;
}

GrayImage foreground_mask(const Segmentation& seg, double tau) {
  const auto& v = seg.result.centroids;
  std::size_t darkest = 0;
  for (std::size_t j = 1; j < v.rows(); ++j)
    if (v(j, 0) < v(darkest, 0)) darkest = j;
  const auto kept = select_features(seg.result, tau);
  GrayImage mask(seg.labels.width(), seg.labels.height(), 0);
  for (auto i : kept)
    if (v.rows() == 1 || seg.labels.pixels()[i] != darkest) mask.pixels()[i] = 1;
  return mask;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FeatureMatrix read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<double> data;
  std::size_t cols = 0, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = dataio::split_csv_line(line);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols)
      throw DataError(path.string() + ": row " + std::to_string(rows + 1) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(cols));
    for (const auto& f : fields) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != f.size() || !std::isfinite(v))
        throw DataError(path.string() + ": bad number '" + f + "' on row " + std::to_string(rows + 1));
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + ": no points");
  return FeatureMatrix(rows, cols, std::move(data));
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt17(m(r, c));
    out << '\n';
  }
}

void write_summary_csv(const FcmResult& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "iterations,final_shift,converged\n"
      << r.iterations_run << ',' << fmt17(r.final_shift) << ',' << (r.converged ? "true" : "false") << '\n';
}

}  // namespace dbn::fcm
