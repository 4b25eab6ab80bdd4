#pragma once

// Single-process simulation of synchronous parameter-server training on a
// synthetic binary logistic-regression task.
//
// Per iteration: take the next b samples of the epoch permutation, split them
// into f contiguous files, compute each file's gradient once and hand the same
// vector to every assigned worker, apply the attack, detect, aggregate and
// step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aspis/aggregation.hpp"
#include "aspis/analysis.hpp"
#include "aspis/assignment.hpp"
#include "aspis/attacks.hpp"
#include "aspis/detection.hpp"
#include "aspis/report.hpp"
#include "aspis/rng.hpp"

namespace aspis {

// Dataset -------------------------------------------------------------------

struct DatasetSpec {
  std::size_t n = 4096;       ///< training samples
  std::size_t n_test = 1024;  ///< held-out samples
  std::size_t dim = 32;
  double margin = 0.05;  ///< minimum |<x, w*>| with w* of unit norm
  std::uint64_t seed = 1;
};

inline void to_json(nlohmann::json& j, const DatasetSpec& s) {
  j = nlohmann::json{{"n", s.n}, {"n_test", s.n_test}, {"dim", s.dim}, {"margin", s.margin}, {"seed", s.seed}};
}
inline void from_json(const nlohmann::json& j, DatasetSpec& s) {
  s = DatasetSpec{};
  s.n = j.value("n", s.n);
  s.n_test = j.value("n_test", s.n_test);
  s.dim = j.value("dim", s.dim);
  s.margin = j.value("margin", s.margin);
  s.seed = j.value("seed", s.seed);
}

/// Row-major features with labels in {-1, +1}.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }
};

struct SyntheticTask {
  Dataset train;
  Dataset test;
  Vector separator;  ///< unit-norm w* defining the labels
};

/// Features N(0, I/dim); label sign(<x, w*>); samples closer than `margin` to
/// the separating hyperplane are redrawn, so the classes are separable with
/// that margin.
inline SyntheticTask make_synthetic_task(const DatasetSpec& spec) {
  if (spec.dim == 0) throw std::invalid_argument("dataset: dim must be positive");
  if (spec.n == 0) throw std::invalid_argument("dataset: n must be positive");
  if (!(spec.margin >= 0) || spec.margin >= 1) throw std::invalid_argument("dataset: margin must lie in [0, 1)");
  Rng rng(spec.seed, 0x64617461ULL);
  SyntheticTask task;
  task.separator.resize(spec.dim);
  double norm = 0.0;
  for (auto& v : task.separator) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (auto& v : task.separator) v /= norm;

  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  auto fill = [&](Dataset& d, std::size_t count) {
    d.dim = spec.dim;
    d.x.reserve(count * spec.dim);
    d.y.reserve(count);
    Vector row(spec.dim);
    while (d.y.size() < count) {
      double s = 0.0;
      for (std::size_t k = 0; k < spec.dim; ++k) {
        row[k] = rng.normal() * scale;
        s += row[k] * task.separator[k];
      }
      if (std::abs(s) < spec.margin) continue;
      d.x.insert(d.x.end(), row.begin(), row.end());
      d.y.push_back(s > 0 ? 1.0 : -1.0);
    }
  };
  fill(task.train, spec.n);
  fill(task.test, spec.n_test);
  return task;
}

// Loss and gradients ----------------------------------------------------------

/// log(1 + exp(-m)) without overflow.
inline double logistic_loss(double margin) {
  return margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

/// 1 / (1 + exp(-z)) without overflow.
inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double sample_loss(const Vector& w, const Dataset& d, std::size_t i) {
  return logistic_loss(d.y[i] * dot(d.row(i), w));
}

/// Accumulates the gradient of sample i, -y x sigmoid(-y <x, w>), into g.
inline void add_sample_gradient(const Vector& w, const Dataset& d, std::size_t i, Vector& g) {
  const auto x = d.row(i);
  const double coef = -d.y[i] * sigmoid(-d.y[i] * dot(x, w));
  for (std::size_t k = 0; k < d.dim; ++k) g[k] += coef * x[k];
}

/// Sum of per-sample gradients over order[range.begin .. range.end).
inline Vector file_gradient(const Vector& w, std::span<const std::size_t> order, SampleRange range,
                            const Dataset& d) {
  if (range.end <= range.begin) throw std::invalid_argument("file_gradient: empty sample range");
  if (range.end > order.size()) throw std::invalid_argument("file_gradient: range exceeds the batch");
  if (w.size() != d.dim) throw std::invalid_argument("file_gradient: model dimension mismatch");
  Vector g(d.dim, 0.0);
  for (std::size_t p = range.begin; p < range.end; ++p) {
    if (order[p] >= d.size()) throw std::invalid_argument("file_gradient: sample index out of range");
    add_sample_gradient(w, d, order[p], g);
  }
  return g;
}

/// Mean logistic loss over the whole dataset.
inline double mean_loss(const Vector& w, const Dataset& d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += sample_loss(w, d, i);
  return s / static_cast<double>(d.size());
}

// Model update ----------------------------------------------------------------

struct ModelState {
  Vector w;
  std::uint64_t t = 0;
};

/// w <- w - rate * aggregate / divisor, t <- t + 1.
inline void sgd_step(ModelState& m, const Vector& aggregate, double rate, double divisor = 1.0) {
  if (!(divisor > 0)) throw std::invalid_argument("sgd_step: divisor must be positive");
  if (aggregate.size() != m.w.size()) throw std::invalid_argument("sgd_step: dimension mismatch");
  for (std::size_t k = 0; k < m.w.size(); ++k) {
    const double next = m.w[k] - rate * (aggregate[k] / divisor);
    if (!std::isfinite(next))
      throw std::runtime_error("sgd_step: non-finite parameter at coordinate " + std::to_string(k) +
                               ", iteration " + std::to_string(m.t));
    m.w[k] = next;
  }
  ++m.t;
}

struct LearningRate {
  double x = 0.1;   ///< initial rate
  double y = 0.95;  ///< decay factor
  std::uint64_t z = 50;  ///< iterations between decays

  /// x * y^floor(t / z) for 0-based iteration t.
  double at(std::uint64_t t) const { return x * std::pow(y, static_cast<double>(t / z)); }
};

inline void to_json(nlohmann::json& j, const LearningRate& s) { j = nlohmann::json{{"x", s.x}, {"y", s.y}, {"z", s.z}}; }
inline void from_json(const nlohmann::json& j, LearningRate& s) {
  s = LearningRate{};
  s.x = j.value("x", s.x);
  s.y = j.value("y", s.y);
  s.z = j.value("z", s.z);
}

/// Sample order for one epoch: a Fisher-Yates shuffle keyed by (seed, epoch).
inline std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed, 0x65706f6368000000ULL + epoch);
  rng.shuffle(order);
  return order;
}

/// Initial model: coordinates N(0, 0.01^2) from the run seed.
inline Vector initial_weights(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed, 0x696e6974ULL);
  Vector w(dim);
  for (auto& v : w) v = 0.01 * rng.normal();
  return w;
}

// Configuration ---------------------------------------------------------------

/// Attack section of a training config. Without explicit adversaries the
/// scheme's default placement for `mode` is used.
struct AttackSpec {
  std::optional<AttackMode> mode;  ///< empty: no attack
  std::optional<WorkerSet> adversaries;
  std::optional<WorkerSet> disagreement;  ///< shared D for the optimal plan
  DistortionMethod distortion = Reversed{};
};

inline void to_json(nlohmann::json& j, const AttackSpec& s) {
  j = nlohmann::json{{"mode", s.mode ? to_string(*s.mode) : "none"}, {"distortion", s.distortion}};
  if (s.adversaries) j["adversaries"] = *s.adversaries;
  if (s.disagreement) j["disagreement"] = *s.disagreement;
}
inline void from_json(const nlohmann::json& j, AttackSpec& s) {
  s = AttackSpec{};
  const auto mode = j.value("mode", std::string("none"));
  if (mode != "none") s.mode = parse_attack_mode(mode);
  if (j.contains("adversaries")) s.adversaries = j.at("adversaries").get<WorkerSet>();
  if (j.contains("disagreement")) s.disagreement = j.at("disagreement").get<WorkerSet>();
  if (j.contains("distortion")) s.distortion = j.at("distortion").get<DistortionMethod>();
}

struct TrainingConfig {
  ClusterParams params{15, 3, 0};
  DatasetSpec dataset;
  std::size_t batch = 910;
  LearningRate lr;
  std::uint64_t epochs = 1;
  std::optional<std::uint64_t> max_iterations;  ///< stop early after this many updates
  AttackSpec attack;
  Aggregator aggregator = Aggregator::Aspis;
  AggregatorOptions options;
  std::uint64_t seed = 1;
  std::uint64_t checkpoint_every = 50;

  void validate() const {
    params.validate();
    if (aggregator == Aggregator::Aspis && params.r < 3)
      throw std::invalid_argument("aspis aggregation needs r >= 3");
    const std::uint64_t f = make_assignment(aggregator, params).file_count();
    if (batch < f)
      throw std::invalid_argument("batch size b=" + std::to_string(batch) + " is below the file count f=" +
                                  std::to_string(f));
    if (batch > dataset.n)
      throw std::invalid_argument("batch size b=" + std::to_string(batch) + " exceeds the training set");
    if (!(lr.x > 0) || !(lr.y > 0) || lr.z == 0) throw std::invalid_argument("learning rate must stay positive");
    if (checkpoint_every == 0) throw std::invalid_argument("checkpoint_every must be positive");
    if (attack.mode && params.q == 0 && attack.adversaries && !attack.adversaries->empty())
      throw std::invalid_argument("attack lists adversaries but q = 0");
  }

  std::uint64_t iterations_per_epoch() const { return dataset.n / batch; }
  std::uint64_t total_iterations() const {
    const auto all = epochs * iterations_per_epoch();
    return max_iterations ? std::min(all, *max_iterations) : all;
  }
};

inline void to_json(nlohmann::json& j, const TrainingConfig& c) {
  j = nlohmann::json{{"params", c.params},
                     {"dataset", c.dataset},
                     {"batch", c.batch},
                     {"lr", c.lr},
                     {"epochs", c.epochs},
                     {"attack", c.attack},
                     {"aggregator", to_string(c.aggregator)},
                     {"mom_group_size", c.options.mom_group_size},
                     {"krum_m", c.options.krum_m},
                     {"seed", c.seed},
                     {"checkpoint_every", c.checkpoint_every}};
  if (c.max_iterations) j["max_iterations"] = *c.max_iterations;
}

inline void from_json(const nlohmann::json& j, TrainingConfig& c) {
  c = TrainingConfig{};
  j.at("params").get_to(c.params);
  if (j.contains("dataset")) j.at("dataset").get_to(c.dataset);
  c.batch = j.value("batch", c.batch);
  if (j.contains("lr")) j.at("lr").get_to(c.lr);
  c.epochs = j.value("epochs", c.epochs);
  if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<std::uint64_t>();
  if (j.contains("attack")) j.at("attack").get_to(c.attack);
  c.aggregator = parse_aggregator(j.value("aggregator", std::string("aspis")));
  c.options.mom_group_size = j.value("mom_group_size", c.options.mom_group_size);
  c.options.krum_m = j.value("krum_m", c.options.krum_m);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
}

/// Plan described by the attack section, for the configured scheme.
inline AttackPlan make_training_plan(const TrainingConfig& c) {
  const auto& s = c.attack;
  if (!s.mode || c.params.q == 0) return AttackPlan{};
  if (!s.adversaries) {
    if (s.disagreement && *s.mode == AttackMode::Optimal && scheme_of(c.aggregator) == Scheme::Aspis) {
      WorkerSet first_q;
      for (Worker j = 1; j <= c.params.q; ++j) first_q.push_back(j);
      return optimal_plan(c.params, first_q, *s.disagreement, s.distortion);
    }
    return default_plan(c.aggregator, c.params, *s.mode, s.distortion);
  }
  if (static_cast<int>(s.adversaries->size()) != c.params.q)
    throw std::invalid_argument("attack: expected " + std::to_string(c.params.q) + " adversaries, got " +
                                std::to_string(s.adversaries->size()));
  if (scheme_of(c.aggregator) != Scheme::Aspis) return distort_all_plan(c.params, *s.adversaries, s.distortion);
  if (*s.mode == AttackMode::Weak) return weak_plan(c.params, *s.adversaries, s.distortion);
  if (s.disagreement) return optimal_plan(c.params, *s.adversaries, *s.disagreement, s.distortion);
  return optimal_plan(c.params, *s.adversaries, s.distortion);
}

// History ---------------------------------------------------------------------

struct IterationRecord {
  std::uint64_t iteration = 0;  ///< 1-based index of the update just applied
  std::string outcome;          ///< detected / ambiguous / none
  std::uint64_t corrupted = 0;
  std::uint64_t files = 0;
  double epsilon() const { return files ? static_cast<double>(corrupted) / static_cast<double>(files) : 0.0; }
};

struct Checkpoint {
  IterationRecord at;
  double test_loss = 0.0;
};

struct TrainingHistory {
  std::vector<IterationRecord> iterations;
  std::vector<Checkpoint> checkpoints;
  Vector final_weights;
  double initial_test_loss = 0.0;
  double final_test_loss = 0.0;
};

/// Called after every update with the new model state.
using IterationObserver = std::function<void(const ModelState&, const IterationRecord&)>;

inline TrainingHistory run_training(const TrainingConfig& c, const IterationObserver& observe = {}) {
  c.validate();
  const SyntheticTask task = make_synthetic_task(c.dataset);
  const Assignment a = make_assignment(c.aggregator, c.params);
  const AttackPlan plan = make_training_plan(c);
  const std::uint64_t f = a.file_count();
  const auto ranges = partition_batch(c.batch, f);

  ModelState model{initial_weights(c.dataset.dim, c.seed), 0};
  TrainingHistory h;
  h.initial_test_loss = mean_loss(model.w, task.test);

  const std::uint64_t per_epoch = c.iterations_per_epoch();
  const std::uint64_t total = c.total_iterations();
  std::vector<std::size_t> order;
  for (std::uint64_t t = 0; t < total; ++t) {
    const std::uint64_t epoch = t / per_epoch;
    if (t % per_epoch == 0) order = epoch_permutation(c.dataset.n, c.seed, epoch);
    const std::span<const std::size_t> batch(order.data() + (t % per_epoch) * c.batch, c.batch);

    std::vector<Vector> grads;
    grads.reserve(f);
    for (const auto& rg : ranges) grads.push_back(file_gradient(model.w, batch, rg, task.train));
    const WorkerReport honest = honest_report(a, std::move(grads), t);
    const WorkerReport report = apply_attack(plan, honest, a);

    IterationRecord rec;
    rec.iteration = t + 1;
    rec.files = f;
    AggregationResult res;
    if (c.aggregator == Aggregator::Aspis) {
      const auto outcome = detect(report, a, c.options.tol);
      rec.outcome = outcome_tag(outcome);
      res = aspis_aggregate(report, a, outcome, c.options.tol);
    } else {
      rec.outcome = "none";
      res = baseline_aggregate(c.aggregator, report, a, c.options);
    }
    rec.corrupted = res.corrupted_files.size();
    // The aggregators already return the normalized direction (mean over the
    // kept files, or a median), so no further division here.
    sgd_step(model, res.gradient, c.lr.at(t));
    h.iterations.push_back(rec);
    if (observe) observe(model, rec);
    if (rec.iteration % c.checkpoint_every == 0 || rec.iteration == total)
      h.checkpoints.push_back({rec, mean_loss(model.w, task.test)});
  }
  h.final_weights = model.w;
  h.final_test_loss = total ? h.checkpoints.back().test_loss : h.initial_test_loss;
  return h;
}

// Output ----------------------------------------------------------------------

/// Shortest round-trip rendering of a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One JSON object per checkpoint. Doubles are written as %.17g strings so
/// the bytes do not depend on the JSON library's float printer.
inline void write_history_jsonl(std::ostream& os, const TrainingHistory& h) {
  for (const auto& cp : h.checkpoints) {
    os << "{\"iteration\":" << cp.at.iteration << ",\"test_loss\":" << format_double(cp.test_loss)
       << ",\"outcome\":\"" << cp.at.outcome << "\",\"corrupted\":" << cp.at.corrupted
       << ",\"files\":" << cp.at.files << ",\"epsilon\":" << format_double(cp.at.epsilon()) << "}\n";
  }
}

inline void write_summary_csv(std::ostream& os, const TrainingConfig& c, const TrainingHistory& h) {
  std::uint64_t detected = 0, ambiguous = 0, corrupted = 0;
  for (const auto& r : h.iterations) {
    detected += r.outcome == "detected";
    ambiguous += r.outcome == "ambiguous";
    corrupted += r.corrupted;
  }
  const double mean_eps = h.iterations.empty() ? 0.0
                                               : static_cast<double>(corrupted) /
                                                     static_cast<double>(h.iterations.size() * h.iterations[0].files);
  os << "K,r,q,aggregator,attack,iterations,initial_loss,final_loss,detected,ambiguous,mean_epsilon\n";
  os << c.params.K << ',' << c.params.r << ',' << c.params.q << ',' << to_string(c.aggregator) << ','
     << (c.attack.mode && c.params.q > 0 ? to_string(*c.attack.mode) : "none") << ',' << h.iterations.size() << ','
     << format_double(h.initial_test_loss) << ',' << format_double(h.final_test_loss) << ',' << detected << ','
     << ambiguous << ',' << format_double(mean_eps) << '\n';
}

}  // namespace aspis
