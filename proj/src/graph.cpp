#include "platoon/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

#include <json.hpp>

#include "platoon/error.hpp"

namespace platoon {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::DisconnectedGraph: return "DisconnectedGraph";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::OutsideStabilityRegion: return "OutsideStabilityRegion";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::UnstablePlatoon: return "UnstablePlatoon";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidSplit: return "InvalidSplit";
    case Errc::SeriesDivergence: return "SeriesDivergence";
    case Errc::IllConditionedBasis: return "IllConditionedBasis";
    case Errc::OutsideWindow: return "OutsideWindow";
    case Errc::InvalidTimestep: return "InvalidTimestep";
    case Errc::NonfiniteState: return "NonfiniteState";
    case Errc::InsufficientSamples: return "InsufficientSamples";
  }
  return "Unknown";
}

namespace {

bool is_connected(const Matrix& w) {
  const auto n = w.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Eigen::Index reached = 1;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (Eigen::Index v = 0; v < n; ++v) {
      if (!seen[static_cast<std::size_t>(v)] && w(u, v) > 0.0) {
        seen[static_cast<std::size_t>(v)] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

void require_size(int n) {
  if (n < 2) throw Error(Errc::InvalidParameter, "graph needs n >= 2, got " + std::to_string(n));
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(Errc::InvalidParameter, std::string(name) + " must be positive and finite");
  }
}

}  // namespace

WeightedGraph WeightedGraph::from_weights(Matrix weights) {
  if (weights.rows() != weights.cols()) {
    throw Error(Errc::InvalidParameter, "weight matrix must be square");
  }
  require_size(static_cast<int>(weights.rows()));
  const auto n = weights.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights(i, i) != 0.0) throw Error(Errc::InvalidParameter, "self-loops are not allowed");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(Errc::InvalidParameter, "weights must be finite and nonnegative");
      }
      if (w != weights(j, i)) throw Error(Errc::InvalidParameter, "weights must be symmetric");
    }
  }
  if (!is_connected(weights)) throw Error(Errc::DisconnectedGraph, "graph is not connected");
  return WeightedGraph(std::move(weights));
}

WeightedGraph WeightedGraph::from_edges(int n, const std::vector<Edge>& edges) {
  require_size(n);
  Matrix w = Matrix::Zero(n, n);
  for (const auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n || e.i == e.j) {
      throw Error(Errc::InvalidParameter, "edge endpoints out of range or equal");
    }
    if (w(e.i, e.j) != 0.0) throw Error(Errc::InvalidParameter, "duplicate edge");
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw Error(Errc::InvalidParameter, "edge weights must be finite and nonnegative");
    }
    w(e.i, e.j) = e.weight;
    w(e.j, e.i) = e.weight;
  }
  return from_weights(std::move(w));
}

std::vector<Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      if (weights_(i, j) > 0.0) out.push_back({i, j, weights_(i, j)});
    }
  }
  return out;
}

WeightedGraph WeightedGraph::scaled(double factor) const {
  require_positive(factor, "scale factor");
  return WeightedGraph(weights_ * factor);
}

std::string WeightedGraph::to_json() const {
  nlohmann::json j;
  j["n"] = size();
  auto& arr = j["edges"] = nlohmann::json::array();
  for (const auto& e : edges()) arr.push_back({e.i, e.j, e.weight});
  return j.dump();
}

WeightedGraph WeightedGraph::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::InvalidParameter, std::string("graph JSON: ") + ex.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("edges") || !j["n"].is_number_integer() ||
      !j["edges"].is_array()) {
    throw Error(Errc::InvalidParameter, "graph JSON needs integer \"n\" and array \"edges\"");
  }
  std::vector<Edge> edges;
  for (const auto& item : j["edges"]) {
    if (!item.is_array() || item.size() != 3 || !item[0].is_number_integer() ||
        !item[1].is_number_integer() || !item[2].is_number()) {
      throw Error(Errc::InvalidParameter, "each edge must be [i, j, weight]");
    }
    Edge e{item[0].get<int>(), item[1].get<int>(), item[2].get<double>()};
    if (e.i >= e.j) throw Error(Errc::InvalidParameter, "edges must satisfy i < j");
    edges.push_back(e);
  }
  return from_edges(j["n"].get<int>(), edges);
}

Matrix laplacian(const WeightedGraph& g) {
  const Matrix& w = g.weights();
  Matrix l = -w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) l(i, i) = w.row(i).sum();
  return l;
}

Spectrum spectrum(const Matrix& lap) {
  const auto n = lap.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(lap);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::InvalidParameter, "eigendecomposition failed");
  }
  Spectrum s{solver.eigenvalues(), solver.eigenvectors()};

  const double lambda_max = s.eigenvalues(n - 1);
  if (!(s.eigenvalues(1) > kConnectivityTolerance * lambda_max)) {
    throw Error(Errc::DisconnectedGraph, "lambda_2 is numerically zero");
  }
  s.eigenvalues(0) = 0.0;
  s.eigenvectors.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));

  for (Eigen::Index k = 1; k < n; ++k) {
    auto col = s.eigenvectors.col(k);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(col(r)) > 1e-12) {
        if (col(r) < 0.0) col = -col;
        break;
      }
    }
  }
  return s;
}

double effective_resistance(const Spectrum& s) {
  const int n = s.size();
  if (n < 2 || !(s.lambda(1) > 0.0)) {
    throw Error(Errc::DisconnectedGraph, "effective resistance needs lambda_2 > 0");
  }
  double sum = 0.0;
  for (int i = 1; i < n; ++i) sum += 1.0 / s.lambda(i);
  return n * sum;
}

Matrix pair_mode_weights(const Spectrum& s) {
  const int n = s.size();
  Matrix w(n - 1, n);
  for (int i = 0; i + 1 < n; ++i) {
    w.row(i) = (s.eigenvectors.row(i + 1) - s.eigenvectors.row(i)).array().square().matrix();
  }
  // q_1 is exactly uniform, so its projection vanishes identically.
  w.col(0).setZero();
  return w;
}

WeightedGraph make_complete(int n, double k) {
  require_size(n);
  require_positive(k, "k");
  Matrix w = Matrix::Constant(n, n, k);
  w.diagonal().setZero();
  return WeightedGraph::from_weights(std::move(w));
}

WeightedGraph make_path(int n, double k) {
  require_size(n);
  require_positive(k, "k");
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) w(i, i + 1) = w(i + 1, i) = k;
  return WeightedGraph::from_weights(std::move(w));
}

WeightedGraph make_p_cycle(int n, double k, int p) {
  require_size(n);
  require_positive(k, "k");
  if (p < 1 || 2 * p > n - 1) {
    throw Error(Errc::InvalidParameter,
                "p-cycle needs 1 <= p <= (n-1)/2, got p=" + std::to_string(p));
  }
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int off = 1; off <= p; ++off) {
      const int j = (i + off) % n;
      w(i, j) = w(j, i) = k;
    }
  }
  return WeightedGraph::from_weights(std::move(w));
}

WeightedGraph make_spatial(int n, double k0, double gamma) {
  require_size(n);
  require_positive(k0, "k0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(Errc::InvalidParameter, "gamma must be >= 0");
  }
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) w(i, j) = w(j, i) = k0 * std::exp(-gamma * (j - i));
  }
  return WeightedGraph::from_weights(std::move(w));
}

WeightedGraph make_perturbed_complete(int n, double k_star, double b, std::uint64_t seed) {
  require_size(n);
  require_positive(k_star, "k_star");
  if (!(b >= 0.0) || !std::isfinite(b)) throw Error(Errc::InvalidParameter, "b must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double xi = unit(rng);
      w(i, j) = w(j, i) = k_star + b * xi;
    }
  }
  return WeightedGraph::from_weights(std::move(w));
}

WeightedGraph make_random_connected(int n, double edge_probability, double weight,
                                    std::uint64_t seed) {
  require_size(n);
  require_positive(weight, "weight");
  if (!(edge_probability > 0.0 && edge_probability <= 1.0)) {
    throw Error(Errc::InvalidParameter, "edge probability must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(edge_probability);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (coin(rng)) w(i, j) = w(j, i) = weight;
      }
    }
    if (is_connected(w)) return WeightedGraph::from_weights(std::move(w));
  }
  throw Error(Errc::DisconnectedGraph, "no connected draw after 10000 attempts");
}

std::vector<double> complete_eigenvalues(int n, double k) {
  std::vector<double> out(static_cast<std::size_t>(n), k * n);
  out[0] = 0.0;
  return out;
}

std::vector<double> path_eigenvalues(int n, double k) {
  std::vector<double> out;
  for (int j = 1; j <= n; ++j) {
    out.push_back(2.0 * k * (1.0 - std::cos(std::numbers::pi * (j - 1) / n)));
  }
  return out;
}

std::vector<double> p_cycle_eigenvalues(int n, double k, int p) {
  std::vector<double> out{0.0};
  for (int j = 2; j <= n; ++j) {
    const double theta = std::numbers::pi * (j - 1) / n;
    out.push_back(k * (2 * p + 1 - std::sin((2 * p + 1) * theta) / std::sin(theta)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double path_eigenvector_entry(int n, int j, int l) {
  return std::sqrt(2.0 / n) * std::cos(std::numbers::pi * (j - 1) * (2 * l - 1) / (2.0 * n));
}

}  // namespace platoon
