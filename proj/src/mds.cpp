#include "rfgap/mds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rfgap/common.hpp"

namespace rfgap {

Embedding mds_from_distances(const std::vector<double>& dist, size_t n, int dims) {
  if (dims < 1) throw UsageError("mds: dims must be >= 1");
  RFGAP_REQUIRE(dist.size() == n * n, "mds: distance matrix size mismatch");

  Eigen::MatrixXd d2(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const double d = dist[i * n + j];
      d2(i, j) = d * d;
    }

  // B = -1/2 * J * D² * J with J = I - 11ᵀ/n (double centering).
  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
  const Eigen::MatrixXd b = -0.5 * j * d2 * j;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  RFGAP_REQUIRE(solver.info() == Eigen::Success, "mds: eigendecomposition failed");
  const auto& eval = solver.eigenvalues();   // ascending
  const auto& evec = solver.eigenvectors();

  // Keep the leading eigenpairs that are positive beyond numerical noise.
  const double floor = std::max(eval.cwiseAbs().maxCoeff(), 1.0) * 1e-12;
  Embedding emb;
  emb.n = n;
  const size_t want = size_t(dims);
  for (size_t k = 0; k < n && emb.eigenvalues.size() < want; ++k) {
    const double lambda = eval(Eigen::Index(n - 1 - k));
    if (lambda <= floor) break;
    emb.eigenvalues.push_back(lambda);
  }
  emb.dims = emb.eigenvalues.size();
  emb.truncated = emb.dims < want;

  emb.coords.assign(n * emb.dims, 0.0);
  for (size_t k = 0; k < emb.dims; ++k) {
    const double scale = std::sqrt(emb.eigenvalues[k]);
    for (size_t i = 0; i < n; ++i)
      emb.coords[i * emb.dims + k] = evec(Eigen::Index(i), Eigen::Index(n - 1 - k)) * scale;
  }

  // Kruskal stress-1 of the embedded configuration against the input.
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double hat2 = 0.0;
      for (size_t k = 0; k < emb.dims; ++k) {
        const double diff = emb.coord(i, k) - emb.coord(j, k);
        hat2 += diff * diff;
      }
      const double d = dist[i * n + j];
      const double e = std::sqrt(hat2) - d;
      num += e * e;
      den += d * d;
    }
  emb.stress = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return emb;
}

Embedding mds_embed(const ProximityMatrix& p, int dims) {
  if (!p.is_square()) throw UsageError("mds_embed: matrix must be square");
  if (!p.symmetric) throw UsageError("mds_embed: matrix must be symmetrized first");
  const size_t n = p.n_query();

  std::vector<double> dist(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j)
      dist[i * n + j] = 1.0;  // proximity 0 → distance 1; overwritten below
    p.for_each_in_row(i, [&](int32_t j, double v) {
      dist[i * n + j] = std::sqrt(std::max(0.0, 1.0 - v));
    });
    dist[i * n + i] = 0.0;
  }
  return mds_from_distances(dist, n, dims);
}

}  // namespace rfgap
