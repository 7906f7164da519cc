#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xlsent/label.hpp"
#include "xlsent/tensor.hpp"

namespace xlsent {

struct EmbeddedDataset {
  Matrix vectors;  // n x d
  std::vector<SentimentLabel> labels;
  std::string source;

  std::size_t size() const { return vectors.rows(); }
  void validate() const;
};

struct TransportPlan {
  Matrix coupling;  // n x m, non-negative
  std::vector<double> a, b;
  double cost = 0.0;
  int iterations = 0;
  double marginal_violation = 0.0;  // L1 at termination
};

// Entropic-regularized OT via log-domain Sinkhorn iterations. Terminates
// when the L1 marginal violation drops below tol; throws NumericalError
// (reporting the final violation) if max_iters is exhausted first.
TransportPlan sinkhorn(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b,
                       double epsilon, int max_iters = 20000, double tol = 1e-9);

// Exact transportation problem solved with the primal simplex on the
// transportation polytope (Bland's rule, so degenerate uniform marginals
// terminate). Limited to n*m <= 10^4.
double exact_ot_small(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b);

// Exact plan variant (same solver), used where the coupling itself matters.
TransportPlan exact_ot_plan(const Matrix& cost, const std::vector<double>& a, const std::vector<double>& b);

enum class LabelDistMode { gaussian, exact };

// Pairwise squared distances between class-conditional feature
// distributions: rows index classes of A, columns classes of B. Gaussian
// mode evaluates the closed-form Bures 2-Wasserstein distance with +1e-6*I
// covariance regularization; exact mode solves OT between the point clouds.
// Entries for classes absent on either side are NaN.
Matrix label_distances(const EmbeddedDataset& a, const EmbeddedDataset& b,
                       LabelDistMode mode = LabelDistMode::gaussian);

struct OtddConfig {
  enum class Solver { sinkhorn, exact };
  Solver solver = Solver::sinkhorn;
  LabelDistMode label_mode = LabelDistMode::gaussian;
  int max_points = 1000;  // seeded subsample cap per side
  double epsilon = 0.1;
  int max_iters = 20000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

struct OtddReport {
  std::string source, target;
  double raw = 0.0;
  double normalized = -1.0;  // filled by normalize_by_max
  std::string solver_mode;
  std::size_t points_a = 0, points_b = 0;
  std::uint64_t seed = 0;
};

// Ground cost |x - x'|^2 + labeldist^2(y, y'); raw distance is the square
// root of the optimal transport cost on (sub)samples.
OtddReport otdd(const EmbeddedDataset& a, const EmbeddedDataset& b, const OtddConfig& config = {});

// normalized = raw / max(raw) over the report set.
void normalize_by_max(std::vector<OtddReport>& reports);

std::string otdd_csv(const std::vector<OtddReport>& reports);

// Seeded uniform subsample without replacement, original order preserved.
std::vector<std::size_t> downsample_indices(std::size_t n, std::size_t target, std::uint64_t seed);
EmbeddedDataset downsample(const EmbeddedDataset& data, std::size_t target, std::uint64_t seed);

template <typename T>
std::vector<T> downsample(const std::vector<T>& items, std::size_t target, std::uint64_t seed) {
  std::vector<T> out;
  out.reserve(target);
  for (std::size_t i : downsample_indices(items.size(), target, seed)) out.push_back(items[i]);
  return out;
}

struct TopicCounts {
  std::map<int, long> counts;
  long total() const;
};

struct Chi2Result {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
};

// 2 x T test of homogeneity over the shared topic space. Topics whose
// expected count falls below 1 in either row are pooled into an "other"
// topic first; df = remaining topics - 1.
Chi2Result chi_squared_shift(const TopicCounts& a, const TopicCounts& b);

struct ShiftRow {
  std::string source, target;
  Chi2Result result;
};
std::string shift_csv(const std::vector<ShiftRow>& rows);  // Table-style columns

enum class CorrelationMethod { pearson, spearman };

double correlation(const std::vector<double>& x, const std::vector<double>& y,
                   CorrelationMethod method = CorrelationMethod::pearson);

// Embeddings file: first line "n d", then n rows of d floats; labels file
// has one label per line.
EmbeddedDataset load_embedded_dataset(const std::string& vectors_path, const std::string& labels_path,
                                      const std::string& source_tag);
void save_embedded_dataset(const EmbeddedDataset& data, const std::string& vectors_path,
                           const std::string& labels_path);

std::vector<std::pair<std::string, int>> load_topic_assignments(const std::string& csv_path);
TopicCounts counts_from_assignments(const std::vector<std::pair<std::string, int>>& assignments);

}  // namespace xlsent
