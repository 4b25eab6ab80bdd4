#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aspis/assignment.hpp"

namespace aspis {

using Vector = std::vector<double>;

/// Exact equality by default; tol > 0 allows an absolute per-coordinate slack.
inline bool same_value(std::span<const double> a, std::span<const double> b, double tol = 0.0) {
  if (a.size() != b.size()) return false;
  if (tol == 0.0) return std::equal(a.begin(), a.end(), b.begin());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(std::fabs(a[i] - b[i]) <= tol)) return false;
  return true;
}

/// Lexicographic order on the big-endian IEEE-754 serialization of the
/// coordinates, i.e. coordinate-wise comparison of the raw 64-bit patterns.
inline bool byte_order_less(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = std::bit_cast<std::uint64_t>(a[i]);
    const auto y = std::bit_cast<std::uint64_t>(b[i]);
    if (x != y) return x < y;
  }
  return a.size() < b.size();
}

/// Gradient values returned by the workers in one iteration.
///
/// values(j)[s] is worker j's vector for file assignment.files_of(j)[s].
/// The optional ground truth (one vector per file) exists only in simulation
/// and is used for corruption accounting, never for detection.
class WorkerReport {
 public:
  WorkerReport() = default;
  WorkerReport(const Assignment& assignment, std::size_t dim, std::int64_t iteration = 0)
      : iteration_(iteration), dim_(dim) {
    values_.resize(static_cast<std::size_t>(assignment.workers()));
    for (Worker j = 1; j <= assignment.workers(); ++j)
      values_[Assignment::index(j)].assign(assignment.files_of(j).size(), Vector(dim, 0.0));
  }

  std::int64_t iteration() const { return iteration_; }
  std::size_t dim() const { return dim_; }
  int workers() const { return static_cast<int>(values_.size()); }

  const std::vector<Vector>& values(Worker j) const { return values_.at(Assignment::index(j)); }
  std::vector<Vector>& values(Worker j) { return values_.at(Assignment::index(j)); }

  const Vector& value(const Assignment& a, Worker j, FileId i) const {
    const auto slot = a.slot_of(j, i);
    if (slot < 0)
      throw std::invalid_argument("worker " + std::to_string(j) + " is not assigned file " +
                                  std::to_string(i));
    return values(j)[static_cast<std::size_t>(slot)];
  }
  void set_value(const Assignment& a, Worker j, FileId i, Vector v) {
    const auto slot = a.slot_of(j, i);
    if (slot < 0)
      throw std::invalid_argument("worker " + std::to_string(j) + " is not assigned file " +
                                  std::to_string(i));
    values(j)[static_cast<std::size_t>(slot)] = std::move(v);
  }

  bool has_truth() const { return !truth_.empty(); }
  const std::vector<Vector>& truth() const { return truth_; }
  void set_truth(std::vector<Vector> t) { truth_ = std::move(t); }

  /// Throws std::invalid_argument unless every worker reports exactly its
  /// assigned files with vectors of dimension dim().
  void check_complete(const Assignment& a) const {
    if (workers() != a.workers())
      throw std::invalid_argument("report covers " + std::to_string(workers()) + " workers, assignment has " +
                                  std::to_string(a.workers()));
    for (Worker j = 1; j <= a.workers(); ++j) {
      const auto& vs = values(j);
      if (vs.size() != a.files_of(j).size())
        throw std::invalid_argument("worker " + std::to_string(j) + " reports " + std::to_string(vs.size()) +
                                    " files, expected " + std::to_string(a.files_of(j).size()));
      for (const auto& v : vs)
        if (v.size() != dim_)
          throw std::invalid_argument("worker " + std::to_string(j) + " reports a vector of dimension " +
                                      std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    }
  }

 private:
  std::int64_t iteration_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::vector<Vector>> values_;
  std::vector<Vector> truth_;
};

/// Report in which every worker returns the true gradient of each of its
/// files. Each copy is the same object value, so honest copies are bit-identical.
inline WorkerReport honest_report(const Assignment& a, std::vector<Vector> file_gradients,
                                  std::int64_t iteration = 0) {
  if (file_gradients.size() != a.file_count())
    throw std::invalid_argument("honest_report: got " + std::to_string(file_gradients.size()) +
                                " file gradients for " + std::to_string(a.file_count()) + " files");
  const std::size_t d = file_gradients.empty() ? 0 : file_gradients.front().size();
  for (const auto& g : file_gradients)
    if (g.size() != d) throw std::invalid_argument("honest_report: inconsistent gradient dimensions");
  WorkerReport rep(a, d, iteration);
  for (Worker j = 1; j <= a.workers(); ++j) {
    auto& vs = rep.values(j);
    const auto& fs = a.files_of(j);
    for (std::size_t s = 0; s < fs.size(); ++s) vs[s] = file_gradients[fs[s]];
  }
  rep.set_truth(std::move(file_gradients));
  return rep;
}

}  // namespace aspis
