#pragma once

// Independent reference computations used by the unit and acceptance suites.
// None of these call into the library routines they check.

#include <cstdint>
#include <vector>

#include "aspis/aspis.hpp"

namespace oracle {

/// C(n, k) from Pascal's triangle.
inline std::uint64_t pascal(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<std::vector<std::uint64_t>> t(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    t[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i + 1), 1);
    for (int j = 1; j < i; ++j)
      t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          t[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] +
          t[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
  }
  return t[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

/// All maximum cliques by scanning every vertex subset (K <= 20).
inline std::vector<aspis::WorkerSet> max_cliques(const aspis::AgreementGraph& g) {
  const int K = g.size();
  std::vector<aspis::WorkerSet> best;
  std::size_t best_size = 0;
  for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
    aspis::WorkerSet s;
    for (int i = 0; i < K; ++i)
      if (mask >> i & 1u) s.push_back(i + 1);
    if (s.size() < best_size) continue;
    bool clique = true;
    for (std::size_t a = 0; a < s.size() && clique; ++a)
      for (std::size_t b = a + 1; b < s.size() && clique; ++b) clique = g.edge(s[a], s[b]);
    if (!clique) continue;
    if (s.size() > best_size) {
      best_size = s.size();
      best.clear();
    }
    best.push_back(s);
  }
  std::sort(best.begin(), best.end());
  return best;
}

/// Plain mini-batch SGD on the logistic loss with the same sampling order and
/// learning-rate schedule as the simulator: w -= eta_t * (sum over the batch
/// of per-sample gradients) / f.
inline aspis::Vector reference_sgd(const aspis::TrainingConfig& c, std::uint64_t iterations) {
  const auto task = aspis::make_synthetic_task(c.dataset);
  const auto& d = task.train;
  const std::uint64_t f = aspis::make_assignment(c.aggregator, c.params).file_count();
  aspis::Vector w = aspis::initial_weights(c.dataset.dim, c.seed);
  const std::uint64_t per_epoch = c.dataset.n / c.batch;
  std::vector<std::size_t> order;
  for (std::uint64_t t = 0; t < iterations; ++t) {
    if (t % per_epoch == 0) order = aspis::epoch_permutation(c.dataset.n, c.seed, t / per_epoch);
    std::vector<long double> g(d.dim, 0.0L);
    for (std::size_t p = 0; p < c.batch; ++p) {
      const std::size_t i = order[(t % per_epoch) * c.batch + p];
      long double m = 0;
      for (std::size_t k = 0; k < d.dim; ++k) m += static_cast<long double>(d.x[i * d.dim + k]) * w[k];
      m *= d.y[i];
      const long double s = 1.0L / (1.0L + std::exp(m));  // sigmoid(-m)
      for (std::size_t k = 0; k < d.dim; ++k) g[k] += -d.y[i] * s * d.x[i * d.dim + k];
    }
    const double rate = c.lr.x * std::pow(c.lr.y, static_cast<double>(t / c.lr.z));
    for (std::size_t k = 0; k < d.dim; ++k) w[k] -= static_cast<double>(rate * (g[k] / static_cast<long double>(f)));
  }
  return w;
}

}  // namespace oracle
