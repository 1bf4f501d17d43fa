#pragma once

// Weighted undirected communication graphs, their Laplacians and spectra.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace platoon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Symmetric, loop-free, connected weighted graph on n >= 2 vertices.
/// Every constructor path validates these invariants and throws on violation.
class WeightedGraph {
 public:
  /// Takes a full weight matrix. Throws InvalidParameter for asymmetric,
  /// negative, non-finite or non-zero-diagonal input and DisconnectedGraph
  /// when the positive-weight edges do not connect all vertices.
  static WeightedGraph from_weights(Matrix weights);
  /// Edges are 0-indexed; duplicate (i,j) pairs are rejected.
  static WeightedGraph from_edges(int n, const std::vector<Edge>& edges);

  int size() const noexcept { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const noexcept { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }

  /// Positive-weight edges with i < j, in row-major order.
  std::vector<Edge> edges() const;

  /// Same topology with every weight multiplied by `factor` > 0.
  WeightedGraph scaled(double factor) const;

  /// {"n": int, "edges": [[i, j, weight], ...]} with i < j.
  std::string to_json() const;
  static WeightedGraph from_json(const std::string& text);

 private:
  explicit WeightedGraph(Matrix weights) : weights_(std::move(weights)) {}
  Matrix weights_;
};

Matrix laplacian(const WeightedGraph& g);

/// Ascending Laplacian eigenvalues with a paired orthonormal eigenvector basis.
/// eigenvalues[0] is exactly 0 and eigenvectors.col(0) is exactly 1/sqrt(n).
struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;

  int size() const noexcept { return static_cast<int>(eigenvalues.size()); }
  double lambda(int k) const { return eigenvalues(k); }
};

/// Relative threshold (against lambda_n) below which lambda_2 counts as zero.
inline constexpr double kConnectivityTolerance = 1e-9;

/// Throws DisconnectedGraph if lambda_2 <= 1e-9 * lambda_n.
Spectrum spectrum(const Matrix& laplacian);
inline Spectrum spectrum(const WeightedGraph& g) { return spectrum(laplacian(g)); }

/// n * sum_{i>=2} 1/lambda_i.
double effective_resistance(const Spectrum& s);

/// Squared projections ([e_{i+1} - e_i]^T q_j)^2 as an (n-1) x n matrix.
Matrix pair_mode_weights(const Spectrum& s);

// Named topologies.
WeightedGraph make_complete(int n, double k);
WeightedGraph make_path(int n, double k);
/// Cycle where each vertex links to its p nearest neighbours on both sides.
/// Requires 1 <= p <= (n-1)/2.
WeightedGraph make_p_cycle(int n, double k, int p);
/// Complete graph with k_ij = k0 * exp(-gamma |i-j|).
WeightedGraph make_spatial(int n, double k0, double gamma);
/// Complete graph with k_ij = k_star + b * xi_ij, xi_ij ~ U(0,1) drawn once per
/// undirected edge from a generator seeded with `seed`.
WeightedGraph make_perturbed_complete(int n, double k_star, double b, std::uint64_t seed);
/// Erdos-Renyi topology with uniform weight, redrawn until connected.
WeightedGraph make_random_connected(int n, double edge_probability, double weight,
                                    std::uint64_t seed);

// Closed-form spectra of the named topologies, ascending.
std::vector<double> complete_eigenvalues(int n, double k);
std::vector<double> path_eigenvalues(int n, double k);
std::vector<double> p_cycle_eigenvalues(int n, double k, int p);
/// Entry l (1-based) of the unit path eigenvector paired with lambda_j, j >= 2
/// (1-based): sqrt(2/n) cos(pi (j-1) (2l-1) / (2n)).
double path_eigenvector_entry(int n, int j, int l);

}  // namespace platoon
