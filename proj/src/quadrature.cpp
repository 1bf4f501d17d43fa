#include "platoon/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "platoon/error.hpp"

namespace platoon {

namespace {

// Non-negative Kronrod abscissae on [-1, 1]; entries 1, 3, 5, 7 are the Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace

QuadratureResult gauss_kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = h * kXgk[k];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[k] * s;
    if (k % 2 == 1) gauss += kWg[k / 2] * s;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h), 1};
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::vector<double> breaks, double abs_tol, double rel_tol,
                                    int max_panels) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.size() < 2) throw Error(Errc::InvalidParameter, "integration needs two breakpoints");

  std::priority_queue<Panel> queue;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const auto r = gauss_kronrod15(f, breaks[k], breaks[k + 1]);
    queue.push({breaks[k], breaks[k + 1], r.value, r.error});
    value += r.value;
    error += r.error;
  }
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (static_cast<int>(queue.size()) >= max_panels) {
      throw Error(Errc::QuadratureFailure, "error estimate " + std::to_string(error) +
                                               " above tolerance after " +
                                               std::to_string(queue.size()) + " panels");
    }
    const Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = gauss_kronrod15(f, worst.a, mid);
    const auto right = gauss_kronrod15(f, mid, worst.b);
    queue.push({worst.a, mid, left.value, left.error});
    queue.push({mid, worst.b, right.value, right.error});
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
  }

  // Re-sum to shed the drift of the running updates.
  QuadratureResult out{0.0, 0.0, static_cast<int>(queue.size())};
  std::vector<Panel> panels;
  panels.reserve(queue.size());
  while (!queue.empty()) {
    panels.push_back(queue.top());
    queue.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  return out;
}

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(Errc::InvalidParameter, "Gauss-Legendre rule needs n >= 1");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = c - h * x;
    rule.nodes[hi] = c + h * x;
    rule.weights[lo] = h * w;
    rule.weights[hi] = h * w;
  }
  return rule;
}

}  // namespace platoon
