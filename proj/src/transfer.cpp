#include "xlsent/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "xlsent/errors.hpp"
#include "xlsent/rng.hpp"
#include "xlsent/stats.hpp"

namespace xlsent {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_marginal(const std::vector<double>& w, const char* name) {
  if (w.empty()) throw DataError(std::string("optimal transport: empty marginal ") + name);
  double sum = 0.0;
  for (double v : w) {
    if (v < 0.0) throw DataError(std::string("optimal transport: negative mass in ") + name);
    if (v == 0.0) throw DataError(std::string("optimal transport: degenerate zero-mass entry in ") + name);
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw DataError(std::string("optimal transport: marginal ") + name + " sums to " + std::to_string(sum) +
                    ", expected 1");
  }
}

double logsumexp(const std::vector<double>& v) {
  double max_v = -std::numeric_limits<double>::infinity();
  for (double x : v) max_v = std::max(max_v, x);
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - max_v);
  return max_v + std::log(sum);
}

}  // namespace

TransportPlan sinkhorn(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b,
                       double epsilon, int max_iters, double tol) {
  const std::size_t n = a.size(), m = b.size();
  check_marginal(a, "a");
  check_marginal(b, "b");
  if (cost.rows() != n || cost.cols() != m) throw DataError("sinkhorn: cost shape mismatch");
  if (epsilon <= 0.0) throw DataError("sinkhorn: epsilon must be positive");
  for (double v : cost.data()) {
    if (!std::isfinite(v) || v < 0.0) throw DataError("sinkhorn: cost must be finite and non-negative");
  }

  std::vector<double> f(n, 0.0), g(m, 0.0), scratch(std::max(n, m));
  TransportPlan plan;
  plan.a = a;
  plan.b = b;
  plan.coupling = Matrix(n, m);

  // Epsilon scaling: at small epsilon plain iterations stall, so anneal from
  // the cost scale down to the target, warm-starting the potentials.
  double max_cost = 0.0;
  for (double v : cost.data()) max_cost = std::max(max_cost, v);
  std::vector<double> levels;
  for (double e = max_cost / 2.0; e > epsilon * 1.5; e /= 2.0) levels.push_back(e);
  levels.push_back(epsilon);

  double violation = std::numeric_limits<double>::infinity();
  int iters_used = 0;
  const int intermediate_cap =
      std::max(100, max_iters / (2 * static_cast<int>(levels.size())));
  for (std::size_t level = 0; level < levels.size(); ++level) {
    const double eps_k = levels[level];
    const bool final_level = level + 1 == levels.size();
    const double level_tol = final_level ? tol : std::max(tol, 1e-8);
    int level_iters = 0;
    while (iters_used < max_iters && (final_level || level_iters < intermediate_cap)) {
      ++level_iters;
      ++iters_used;
      for (std::size_t i = 0; i < n; ++i) {
        scratch.resize(m);
        for (std::size_t j = 0; j < m; ++j) scratch[j] = (g[j] - cost(i, j)) / eps_k;
        f[i] = eps_k * (std::log(a[i]) - logsumexp(scratch));
      }
      for (std::size_t j = 0; j < m; ++j) {
        scratch.resize(n);
        for (std::size_t i = 0; i < n; ++i) scratch[i] = (f[i] - cost(i, j)) / eps_k;
        g[j] = eps_k * (std::log(b[j]) - logsumexp(scratch));
      }
      // columns are exact right after the g update; measure row violation
      violation = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) row_sum += std::exp((f[i] + g[j] - cost(i, j)) / eps_k);
        violation += std::fabs(row_sum - a[i]);
      }
      if (violation <= level_tol) break;
    }
  }
  if (violation > tol) {
    throw NumericalError("sinkhorn: no convergence after " + std::to_string(max_iters) +
                         " iterations, marginal violation " + std::to_string(violation));
  }

  plan.iterations = iters_used;
  plan.marginal_violation = violation;
  double total_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = std::exp((f[i] + g[j] - cost(i, j)) / epsilon);
      plan.coupling(i, j) = p;
      total_cost += p * cost(i, j);
    }
  }
  plan.cost = total_cost;
  return plan;
}

namespace {

struct BasisCell {
  std::size_t i, j;
  double flow;
};

// Primal transportation simplex with Bland's anti-cycling rule.
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b)
      : cost_(cost), n_(a.size()), m_(b.size()) {
    northwest_corner(a, b);
  }

  void solve() {
    const int max_pivots = 100000;
    for (int pivot = 0; pivot < max_pivots; ++pivot) {
      compute_duals();
      std::size_t ei = 0, ej = 0;
      if (!find_entering(ei, ej)) return;
      pivot_on(ei, ej);
    }
    throw NumericalError("exact_ot_small: simplex exceeded pivot limit");
  }

  double objective() const {
    double total = 0.0;
    for (const BasisCell& cell : basis_) total += cell.flow * cost_(cell.i, cell.j);
    return total;
  }

  Matrix plan() const {
    Matrix out(n_, m_);
    for (const BasisCell& cell : basis_) out(cell.i, cell.j) = cell.flow;
    return out;
  }

 private:
  void northwest_corner(std::vector<double> a, std::vector<double> b) {
    std::size_t i = 0, j = 0;
    while (true) {
      const double flow = std::min(a[i], b[j]);
      basis_.push_back({i, j, flow});
      a[i] -= flow;
      b[j] -= flow;
      if (i + 1 == n_ && j + 1 == m_) break;
      if (a[i] <= b[j] && i + 1 < n_) {
        ++i;
      } else {
        ++j;
      }
    }
    // the rule above always emits exactly n + m - 1 cells
  }

  void compute_duals() {
    u_.assign(n_, kNaN);
    v_.assign(m_, kNaN);
    u_[0] = 0.0;
    // propagate over the basis tree until all duals are fixed
    bool progress = true;
    std::size_t fixed = 1;
    while (fixed < n_ + m_ && progress) {
      progress = false;
      for (const BasisCell& cell : basis_) {
        const bool know_u = !std::isnan(u_[cell.i]);
        const bool know_v = !std::isnan(v_[cell.j]);
        if (know_u && !know_v) {
          v_[cell.j] = cost_(cell.i, cell.j) - u_[cell.i];
          ++fixed;
          progress = true;
        } else if (!know_u && know_v) {
          u_[cell.i] = cost_(cell.i, cell.j) - v_[cell.j];
          ++fixed;
          progress = true;
        }
      }
    }
    if (fixed != n_ + m_) throw NumericalError("exact_ot_small: basis is not a spanning tree");
  }

  bool find_entering(std::size_t& ei, std::size_t& ej) const {
    std::vector<std::uint8_t> in_basis(n_ * m_, 0);
    for (const BasisCell& cell : basis_) in_basis[cell.i * m_ + cell.j] = 1;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        if (in_basis[i * m_ + j]) continue;
        if (cost_(i, j) - u_[i] - v_[j] < -1e-12) {  // Bland: first negative reduced cost
          ei = i;
          ej = j;
          return true;
        }
      }
    }
    return false;
  }

  // Unique alternating cycle created by the entering cell: peel degree-1
  // cells, then walk the remainder assigning +/- signs.
  void pivot_on(std::size_t ei, std::size_t ej) {
    std::vector<BasisCell> cells = basis_;
    cells.push_back({ei, ej, 0.0});
    std::vector<std::uint8_t> alive(cells.size(), 1);
    bool removed = true;
    while (removed) {
      removed = false;
      std::vector<int> row_deg(n_, 0), col_deg(m_, 0);
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (!alive[k]) continue;
        ++row_deg[cells[k].i];
        ++col_deg[cells[k].j];
      }
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (!alive[k]) continue;
        if (k + 1 == cells.size()) continue;  // never peel the entering cell
        if (row_deg[cells[k].i] == 1 || col_deg[cells[k].j] == 1) {
          alive[k] = 0;
          removed = true;
        }
      }
    }

    // walk the cycle starting from the entering cell, alternating row/column
    std::vector<std::size_t> cycle;  // indices into `cells`
    std::vector<std::uint8_t> used(cells.size(), 0);
    std::size_t current = cells.size() - 1;
    bool along_row = true;
    cycle.push_back(current);
    used[current] = 1;
    while (true) {
      bool found = false;
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (!alive[k] || used[k] || k == current) continue;
        const bool match =
            along_row ? cells[k].i == cells[current].i : cells[k].j == cells[current].j;
        if (match) {
          cycle.push_back(k);
          used[k] = 1;
          current = k;
          along_row = !along_row;
          found = true;
          break;
        }
      }
      if (!found) break;
    }
    if (cycle.size() < 4 || cycle.size() % 2 != 0) {
      throw NumericalError("exact_ot_small: malformed pivot cycle");
    }

    // odd positions in the walk lose flow; ties resolved by cell index so
    // degenerate pivots cannot cycle
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving_walk_pos = 1;
    for (std::size_t pos = 1; pos < cycle.size(); pos += 2) {
      const BasisCell& cell = cells[cycle[pos]];
      const BasisCell& best = cells[cycle[leaving_walk_pos]];
      const bool better = cell.flow < theta - 1e-15 ||
                          (cell.flow < theta + 1e-15 && cell.i * m_ + cell.j < best.i * m_ + best.j);
      if (better) {
        theta = std::min(theta, cell.flow);
        leaving_walk_pos = pos;
      }
    }
    for (std::size_t pos = 0; pos < cycle.size(); ++pos) {
      cells[cycle[pos]].flow += (pos % 2 == 0) ? theta : -theta;
    }
    const std::size_t leaving_index = cycle[leaving_walk_pos];
    std::vector<BasisCell> next;
    next.reserve(basis_.size());
    for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
      if (k == leaving_index) continue;
      next.push_back(cells[k]);
    }
    next.push_back(cells.back());  // entering cell, flow = theta
    basis_ = std::move(next);
  }

  const Matrix& cost_;
  std::size_t n_, m_;
  std::vector<BasisCell> basis_;
  std::vector<double> u_, v_;
};

}  // namespace

TransportPlan exact_ot_plan(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b) {
  check_marginal(a, "a");
  check_marginal(b, "b");
  if (cost.rows() != a.size() || cost.cols() != b.size()) throw DataError("exact_ot: cost shape mismatch");
  if (a.size() * b.size() > 10000) {
    throw DataError("exact_ot_small: instance size " + std::to_string(a.size() * b.size()) +
                    " exceeds the 10^4 cell limit");
  }
  TransportSimplex simplex(cost, a, b);
  simplex.solve();
  TransportPlan plan;
  plan.a = a;
  plan.b = b;
  plan.coupling = simplex.plan();
  plan.cost = simplex.objective();
  return plan;
}

double exact_ot_small(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b) {
  return exact_ot_plan(cost, a, b).cost;
}

void EmbeddedDataset::validate() const {
  if (vectors.rows() == 0) throw DataError("embedded dataset \"" + source + "\" is empty");
  if (labels.size() != vectors.rows()) {
    throw DataError("embedded dataset \"" + source + "\": " + std::to_string(vectors.rows()) +
                    " vectors but " + std::to_string(labels.size()) + " labels");
  }
  if (!vectors.all_finite()) throw DataError("embedded dataset \"" + source + "\" has non-finite entries");
}

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
void symmetric_eig(const Matrix& input, Matrix& eigvecs, std::vector<double>& eigvals) {
  const std::size_t d = input.rows();
  Matrix a = input;
  eigvecs = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) eigvecs(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = eigvecs(k, p), vkq = eigvecs(k, q);
          eigvecs(k, p) = c * vkp - s * vkq;
          eigvecs(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  eigvals.resize(d);
  for (std::size_t i = 0; i < d; ++i) eigvals[i] = a(i, i);
}

struct GaussianFit {
  std::vector<double> mean;
  Matrix cov;  // regularized
};

GaussianFit fit_gaussian(const Matrix& points, const std::vector<std::size_t>& rows) {
  const std::size_t d = points.cols();
  GaussianFit fit;
  fit.mean.assign(d, 0.0);
  for (std::size_t r : rows) {
    const double* row = points.row(r);
    for (std::size_t j = 0; j < d; ++j) fit.mean[j] += row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (double& v : fit.mean) v *= inv_n;
  fit.cov = Matrix(d, d);
  for (std::size_t r : rows) {
    const double* row = points.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = row[i] - fit.mean[i];
      for (std::size_t j = 0; j < d; ++j) fit.cov(i, j) += ci * (row[j] - fit.mean[j]);
    }
  }
  for (double& v : fit.cov.data()) v *= inv_n;
  for (std::size_t i = 0; i < d; ++i) fit.cov(i, i) += 1e-6;
  return fit;
}

Matrix psd_sqrt(const Matrix& sym, const char* what) {
  Matrix vecs;
  std::vector<double> vals;
  symmetric_eig(sym, vecs, vals);
  const std::size_t d = sym.rows();
  for (double& v : vals) {
    if (v < -1e-9) throw NumericalError(std::string(what) + ": matrix is not PSD after regularization");
    v = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += vecs(i, k) * vals[k] * vecs(j, k);
      out(i, j) = acc;
    }
  }
  return out;
}

double bures_squared(const GaussianFit& ga, const GaussianFit& gb) {
  const std::size_t d = ga.mean.size();
  double mean_term = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = ga.mean[j] - gb.mean[j];
    mean_term += diff * diff;
  }
  double trace_a = 0.0, trace_b = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    trace_a += ga.cov(i, i);
    trace_b += gb.cov(i, i);
  }
  const Matrix root_a = psd_sqrt(ga.cov, "label_distances");
  const Matrix inner = matmul(matmul(root_a, gb.cov), root_a);
  Matrix vecs;
  std::vector<double> vals;
  symmetric_eig(inner, vecs, vals);
  double cross = 0.0;
  for (double v : vals) {
    if (v < -1e-9) throw NumericalError("label_distances: cross term is not PSD");
    cross += v > 0.0 ? std::sqrt(v) : 0.0;
  }
  // |mu_a - mu_b|^2 + tr(Sa) + tr(Sb) - 2 tr((Sa^1/2 Sb Sa^1/2)^1/2)
  double result = mean_term + trace_a + trace_b - 2.0 * cross;
  // identical fits cancel to eigensolver dust; snap that to an exact zero so
  // self-distances stay zero after the square root
  const double scale = mean_term + trace_a + trace_b;
  if (std::fabs(result) < 1e-12 * std::max(1.0, scale)) result = 0.0;
  return result;
}

std::vector<std::vector<std::size_t>> rows_by_class(const EmbeddedDataset& data) {
  std::vector<std::vector<std::size_t>> rows(3);
  for (std::size_t r = 0; r < data.labels.size(); ++r) {
    rows[static_cast<std::size_t>(data.labels[r])].push_back(r);
  }
  return rows;
}

double squared_euclidean(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  const double* x = a.row(i);
  const double* y = b.row(j);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double diff = x[k] - y[k];
    acc += diff * diff;
  }
  return acc;
}

double exact_cloud_w2sq(const EmbeddedDataset& a, const std::vector<std::size_t>& rows_a,
                        const EmbeddedDataset& b, const std::vector<std::size_t>& rows_b) {
  Matrix cost(rows_a.size(), rows_b.size());
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    for (std::size_t j = 0; j < rows_b.size(); ++j) {
      cost(i, j) = squared_euclidean(a.vectors, rows_a[i], b.vectors, rows_b[j]);
    }
  }
  const std::vector<double> ua(rows_a.size(), 1.0 / static_cast<double>(rows_a.size()));
  const std::vector<double> ub(rows_b.size(), 1.0 / static_cast<double>(rows_b.size()));
  if (rows_a.size() * rows_b.size() <= 10000) return exact_ot_small(cost, ua, ub);
  double max_cost = 0.0;
  for (double v : cost.data()) max_cost = std::max(max_cost, v);
  const double eps = std::max(1e-6, 1e-3 * max_cost);
  return sinkhorn(cost, ua, ub, eps).cost;
}

}  // namespace

Matrix label_distances(const EmbeddedDataset& a, const EmbeddedDataset& b, LabelDistMode mode) {
  a.validate();
  b.validate();
  const auto rows_a = rows_by_class(a);
  const auto rows_b = rows_by_class(b);
  Matrix out(3, 3, kNaN);
  std::vector<GaussianFit> fits_a(3), fits_b(3);
  if (mode == LabelDistMode::gaussian) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (!rows_a[c].empty()) fits_a[c] = fit_gaussian(a.vectors, rows_a[c]);
      if (!rows_b[c].empty()) fits_b[c] = fit_gaussian(b.vectors, rows_b[c]);
    }
  }
  for (std::size_t ca = 0; ca < 3; ++ca) {
    if (rows_a[ca].empty()) continue;
    for (std::size_t cb = 0; cb < 3; ++cb) {
      if (rows_b[cb].empty()) continue;
      out(ca, cb) = mode == LabelDistMode::gaussian
                        ? bures_squared(fits_a[ca], fits_b[cb])
                        : exact_cloud_w2sq(a, rows_a[ca], b, rows_b[cb]);
      if (out(ca, cb) < 0.0 && out(ca, cb) > -1e-9) out(ca, cb) = 0.0;  // numerical zero
    }
  }
  return out;
}

std::vector<std::size_t> downsample_indices(std::size_t n, std::size_t target, std::uint64_t seed) {
  if (target > n) {
    throw DataError("downsample: target " + std::to_string(target) + " exceeds size " + std::to_string(n));
  }
  if (target == n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  Rng rng(Rng::mix(seed, 0xd057));
  return rng.sample_indices(n, target);
}

EmbeddedDataset downsample(const EmbeddedDataset& data, std::size_t target, std::uint64_t seed) {
  const auto indices = downsample_indices(data.size(), target, seed);
  EmbeddedDataset out;
  out.source = data.source;
  out.vectors = Matrix(indices.size(), data.vectors.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double* src = data.vectors.row(indices[i]);
    double* dst = out.vectors.row(i);
    for (std::size_t j = 0; j < data.vectors.cols(); ++j) dst[j] = src[j];
    out.labels.push_back(data.labels[indices[i]]);
  }
  return out;
}

OtddReport otdd(const EmbeddedDataset& a, const EmbeddedDataset& b, const OtddConfig& config) {
  a.validate();
  b.validate();
  if (config.max_points < 10) throw DataError("otdd: subsample size must be >= 10");

  const EmbeddedDataset sub_a =
      a.size() > static_cast<std::size_t>(config.max_points)
          ? downsample(a, static_cast<std::size_t>(config.max_points), config.seed)
          : a;
  const EmbeddedDataset sub_b =
      b.size() > static_cast<std::size_t>(config.max_points)
          ? downsample(b, static_cast<std::size_t>(config.max_points), config.seed)
          : b;

  const Matrix class_dist = label_distances(a, b, config.label_mode);  // full datasets define the classes
  Matrix cost(sub_a.size(), sub_b.size());
  for (std::size_t i = 0; i < sub_a.size(); ++i) {
    for (std::size_t j = 0; j < sub_b.size(); ++j) {
      const double ld = class_dist(static_cast<std::size_t>(sub_a.labels[i]),
                                   static_cast<std::size_t>(sub_b.labels[j]));
      if (std::isnan(ld)) throw DataError("otdd: missing class distance (empty class)");
      cost(i, j) = squared_euclidean(sub_a.vectors, i, sub_b.vectors, j) + ld;
    }
  }
  const std::vector<double> ua(sub_a.size(), 1.0 / static_cast<double>(sub_a.size()));
  const std::vector<double> ub(sub_b.size(), 1.0 / static_cast<double>(sub_b.size()));

  double transport_cost = 0.0;
  if (config.solver == OtddConfig::Solver::exact) {
    transport_cost = exact_ot_small(cost, ua, ub);
  } else {
    transport_cost = sinkhorn(cost, ua, ub, config.epsilon, config.max_iters, config.tol).cost;
  }
  OtddReport report;
  report.source = a.source;
  report.target = b.source;
  report.raw = std::sqrt(std::max(0.0, transport_cost));
  report.solver_mode = config.solver == OtddConfig::Solver::exact ? "exact" : "sinkhorn";
  report.points_a = sub_a.size();
  report.points_b = sub_b.size();
  report.seed = config.seed;
  return report;
}

void normalize_by_max(std::vector<OtddReport>& reports) {
  double max_raw = 0.0;
  for (const OtddReport& r : reports) max_raw = std::max(max_raw, r.raw);
  for (OtddReport& r : reports) r.normalized = max_raw > 0.0 ? r.raw / max_raw : 0.0;
}

std::string otdd_csv(const std::vector<OtddReport>& reports) {
  std::ostringstream out;
  out << "source,target,raw,normalized\n";
  char buf[64];
  for (const OtddReport& r : reports) {
    out << r.source << ',' << r.target << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", r.raw);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", r.normalized);
    out << buf << '\n';
  }
  return out.str();
}

long TopicCounts::total() const {
  long sum = 0;
  for (const auto& [topic, count] : counts) sum += count;
  return sum;
}

Chi2Result chi_squared_shift(const TopicCounts& a, const TopicCounts& b) {
  std::vector<int> topics;
  for (const auto& [topic, count] : a.counts) topics.push_back(topic);
  for (const auto& [topic, count] : b.counts) {
    if (a.counts.count(topic) == 0) topics.push_back(topic);
  }
  std::sort(topics.begin(), topics.end());

  const double total_a = static_cast<double>(a.total());
  const double total_b = static_cast<double>(b.total());
  const double grand = total_a + total_b;
  if (grand <= 0.0) throw DataError("chi_squared_shift: all counts are zero");

  auto count_of = [](const TopicCounts& tc, int topic) -> double {
    auto it = tc.counts.find(topic);
    if (it == tc.counts.end()) return 0.0;
    if (it->second < 0) throw DataError("chi_squared_shift: negative count");
    return static_cast<double>(it->second);
  };

  // pool topics whose expected count is below 1 in either row
  std::vector<std::pair<double, double>> cells;
  double pooled_a = 0.0, pooled_b = 0.0;
  bool pooled_any = false;
  for (int topic : topics) {
    const double oa = count_of(a, topic), ob = count_of(b, topic);
    const double col = oa + ob;
    const double ea = total_a * col / grand;
    const double eb = total_b * col / grand;
    if (ea < 1.0 || eb < 1.0) {
      pooled_a += oa;
      pooled_b += ob;
      pooled_any = true;
    } else {
      cells.push_back({oa, ob});
    }
  }
  if (pooled_any) cells.push_back({pooled_a, pooled_b});
  if (cells.size() < 2) {
    throw NumericalError("chi_squared_shift: fewer than 2 topics remain after pooling");
  }

  double statistic = 0.0;
  for (const auto& [oa, ob] : cells) {
    const double col = oa + ob;
    const double ea = total_a * col / grand;
    const double eb = total_b * col / grand;
    if (ea > 0.0) statistic += (oa - ea) * (oa - ea) / ea;
    if (eb > 0.0) statistic += (ob - eb) * (ob - eb) / eb;
  }
  Chi2Result result;
  result.statistic = statistic;
  result.df = static_cast<int>(cells.size()) - 1;
  result.p = stats::chi_squared_sf(statistic, static_cast<double>(result.df));
  return result;
}

std::string shift_csv(const std::vector<ShiftRow>& rows) {
  std::ostringstream out;
  out << "Source,Target Language,Chi2 Statistic,p-value\n";
  char buf[64];
  for (const ShiftRow& row : rows) {
    out << row.source << ',' << row.target << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", row.result.statistic);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", row.result.p);
    out << buf << '\n';
  }
  return out.str();
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average of 1-based ranks
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("correlation: constant input sequence");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double correlation(const std::vector<double>& x, const std::vector<double>& y, CorrelationMethod method) {
  if (x.size() != y.size()) throw DataError("correlation: length mismatch");
  if (x.size() < 3) throw DataError("correlation: need at least 3 points");
  if (method == CorrelationMethod::spearman) {
    return pearson(average_ranks(x), average_ranks(y));
  }
  return pearson(x, y);
}

EmbeddedDataset load_embedded_dataset(const std::string& vectors_path, const std::string& labels_path,
                                      const std::string& source_tag) {
  std::ifstream in(vectors_path);
  if (!in) throw DataError("cannot open embeddings file \"" + vectors_path + "\"");
  std::size_t n = 0, d = 0;
  if (!(in >> n >> d) || n == 0 || d == 0) {
    throw DataError("embeddings file \"" + vectors_path + "\": first line must be \"n d\"");
  }
  EmbeddedDataset data;
  data.source = source_tag;
  data.vectors = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!(in >> data.vectors(i, j))) {
        throw DataError("embeddings file \"" + vectors_path + "\": truncated at row " + std::to_string(i));
      }
    }
  }
  std::ifstream lin(labels_path);
  if (!lin) throw DataError("cannot open labels file \"" + labels_path + "\"");
  std::string line;
  while (std::getline(lin, line)) {
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    data.labels.push_back(label_from_string(line));
  }
  data.validate();
  return data;
}

void save_embedded_dataset(const EmbeddedDataset& data, const std::string& vectors_path,
                           const std::string& labels_path) {
  std::ofstream out(vectors_path, std::ios::binary);
  if (!out) throw DataError("cannot write embeddings file \"" + vectors_path + "\"");
  out << data.vectors.rows() << ' ' << data.vectors.cols() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.vectors.rows(); ++i) {
    for (std::size_t j = 0; j < data.vectors.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.vectors(i, j));
      out << (j == 0 ? "" : " ") << buf;
    }
    out << '\n';
  }
  std::ofstream lout(labels_path, std::ios::binary);
  if (!lout) throw DataError("cannot write labels file \"" + labels_path + "\"");
  for (SentimentLabel label : data.labels) lout << to_string(label) << '\n';
}

std::vector<std::pair<std::string, int>> load_topic_assignments(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open topic assignment file \"" + csv_path + "\"");
  std::vector<std::pair<std::string, int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.find("doc_id") != std::string::npos) continue;  // header
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError("topic assignments line " + std::to_string(line_no) + ": expected doc_id,topic_id");
    }
    try {
      rows.push_back({line.substr(0, comma), std::stoi(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw DataError("topic assignments line " + std::to_string(line_no) + ": bad topic id");
    }
  }
  if (rows.empty()) throw DataError("topic assignment file \"" + csv_path + "\" is empty");
  return rows;
}

TopicCounts counts_from_assignments(const std::vector<std::pair<std::string, int>>& assignments) {
  TopicCounts counts;
  for (const auto& [doc_id, topic] : assignments) ++counts.counts[topic];
  return counts;
}

}  // namespace xlsent
