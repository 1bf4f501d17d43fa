#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "platoon/error.hpp"
#include "platoon/graph.hpp"

using namespace platoon;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidParameter;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("path of three unit links has eigenvalues 0, 1, 3") {
  const auto s = spectrum(make_path(3, 1.0));
  CHECK(s.lambda(0) == 0.0);
  CHECK(s.lambda(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.lambda(2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("complete graph spectrum is {0, kn, ..., kn}") {
  const auto s = spectrum(make_complete(7, 0.4));
  CHECK(s.lambda(0) == 0.0);
  for (int j = 1; j < 7; ++j) CHECK(s.lambda(j) == doctest::Approx(2.8).epsilon(1e-12));
  const auto closed = complete_eigenvalues(7, 0.4);
  REQUIRE(closed.size() == 7);
  CHECK(closed[0] == 0.0);
  CHECK(closed[6] == doctest::Approx(2.8));
}

TEST_CASE("closed-form path and p-cycle spectra match the eigensolver") {
  for (int n : {2, 3, 10, 57, 101, 200}) {
    const auto s = spectrum(make_path(n, 0.7));
    const auto closed = path_eigenvalues(n, 0.7);
    const double top = s.eigenvalues.maxCoeff();
    for (int j = 0; j < n; ++j) CHECK(std::abs(s.lambda(j) - closed[static_cast<std::size_t>(j)]) <= 1e-10 * top);
  }
  for (auto [n, p] : {std::pair{7, 2}, {11, 5}, {101, 3}, {101, 50}, {200, 17}}) {
    const auto s = spectrum(make_p_cycle(n, 0.3, p));
    const auto closed = p_cycle_eigenvalues(n, 0.3, p);
    const double top = s.eigenvalues.maxCoeff();
    for (int j = 0; j < n; ++j) CHECK(std::abs(s.lambda(j) - closed[static_cast<std::size_t>(j)]) <= 1e-10 * top);
  }
}

TEST_CASE("eigenvectors are orthonormal, paired, and q1 is exactly uniform") {
  const auto g = make_random_connected(12, 0.4, 1.3, 7);
  const Matrix l = laplacian(g);
  const auto s = spectrum(l);
  const Matrix q = s.eigenvectors;
  CHECK((q.transpose() * q - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((l * q - q * s.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i < 12; ++i) CHECK(q(i, 0) == 1.0 / std::sqrt(12.0));
  CHECK(s.lambda(0) == 0.0);
  for (int j = 1; j < 12; ++j) CHECK(s.lambda(j) >= s.lambda(j - 1));
}

TEST_CASE("path eigenvector closed form matches the solver up to sign") {
  const int n = 9;
  const auto s = spectrum(make_path(n, 1.0));
  for (int j = 2; j <= n; ++j) {
    double dot = 0.0;
    for (int l = 1; l <= n; ++l) dot += path_eigenvector_entry(n, j, l) * s.eigenvectors(l - 1, j - 1);
    CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("effective resistance equals n trace of the pseudo-inverse") {
  const auto g = make_perturbed_complete(8, 1.0, 0.5, 3);
  const Matrix l = laplacian(g);
  const int n = 8;
  const Matrix j = Matrix::Constant(n, n, 1.0 / n);
  const Matrix pinv = (l + j).inverse() - j;
  CHECK(effective_resistance(spectrum(l)) == doctest::Approx(n * pinv.trace()).epsilon(1e-10));
  CHECK(effective_resistance(spectrum(make_complete(6, 2.0))) == doctest::Approx(5.0 / 2.0));
}

TEST_CASE("pair-mode weights sum to 2 for every pair and vanish on the uniform mode") {
  const auto s = spectrum(make_spatial(15, 1.5, 0.4));
  const Matrix w = pair_mode_weights(s);
  REQUIRE(w.rows() == 14);
  REQUIRE(w.cols() == 15);
  for (int i = 0; i < 14; ++i) {
    CHECK(w(i, 0) == 0.0);
    CHECK(w.row(i).sum() == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("graph validation") {
  Matrix asym = Matrix::Zero(3, 3);
  asym(0, 1) = 1.0;
  asym(1, 0) = 2.0;
  asym(1, 2) = asym(2, 1) = 1.0;
  CHECK(code_of([&] { WeightedGraph::from_weights(asym); }) == Errc::InvalidParameter);

  Matrix neg = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  neg(0, 1) = neg(1, 0) = -1.0;
  CHECK(code_of([&] { WeightedGraph::from_weights(neg); }) == Errc::InvalidParameter);

  Matrix loop = Matrix::Ones(3, 3);
  CHECK(code_of([&] { WeightedGraph::from_weights(loop); }) == Errc::InvalidParameter);

  CHECK(code_of([] { WeightedGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}}); }) ==
        Errc::DisconnectedGraph);
  CHECK(code_of([] { WeightedGraph::from_edges(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}}); }) ==
        Errc::InvalidParameter);
  CHECK(code_of([] { make_p_cycle(7, 1.0, 4); }) == Errc::InvalidParameter);
  CHECK(code_of([] { make_path(1, 1.0); }) == Errc::InvalidParameter);
}

TEST_CASE("json round trip and scaling") {
  const auto g = make_perturbed_complete(5, 1.0, 0.3, 11);
  const auto back = WeightedGraph::from_json(g.to_json());
  CHECK((back.weights() - g.weights()).cwiseAbs().maxCoeff() == 0.0);
  const auto s1 = spectrum(g);
  const auto s2 = spectrum(g.scaled(2.5));
  for (int j = 0; j < 5; ++j) CHECK(rel(s2.lambda(j), 2.5 * s1.lambda(j)) < 1e-12);
}

TEST_CASE("seeded generators are deterministic") {
  const auto a = make_perturbed_complete(6, 1.0, 0.5, 42);
  const auto b = make_perturbed_complete(6, 1.0, 0.5, 42);
  const auto c = make_perturbed_complete(6, 1.0, 0.5, 43);
  CHECK((a.weights() - b.weights()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.weights() - c.weights()).cwiseAbs().maxCoeff() > 0.0);
  const auto r1 = make_random_connected(10, 0.3, 1.0, 5);
  const auto r2 = make_random_connected(10, 0.3, 1.0, 5);
  CHECK((r1.weights() - r2.weights()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      CHECK(a.weight(i, j) >= 1.0);
      CHECK(a.weight(i, j) <= 1.5);
    }
  }
}

TEST_CASE("spatial weights decay exponentially with index distance") {
  const auto g = make_spatial(6, 1.5, 0.7);
  CHECK(g.weight(0, 1) == doctest::Approx(1.5 * std::exp(-0.7)));
  CHECK(g.weight(1, 4) == doctest::Approx(1.5 * std::exp(-2.1)));
}
