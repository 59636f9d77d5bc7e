#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slsoh/regression.hpp"

namespace slsoh {

// Cells (not rows) partitioned into k folds.
struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::string> cells;       // distinct cell ids, sorted
  std::vector<std::size_t> cell_fold;   // parallel to `cells`

  std::size_t fold_of(const std::string& cell_id) const;
  std::vector<std::size_t> fold_sizes() const;
};

// Distinct cells are shuffled with the seed and dealt round-robin, so fold
// sizes differ by at most one. Throws InvalidArgument when there are fewer
// distinct cells than folds.
FoldAssignment grouped_kfold(std::span<const std::string> cell_ids, std::size_t k,
                             std::uint64_t seed);

struct HyperGrid {
  std::vector<double> lambdas;
  std::vector<double> alphas;

  // lambda log-spaced over [1e-4, 1e1] in 11 points; alpha in {0.1, 0.5, 0.9}.
  static HyperGrid defaults();
};

struct CvRow {
  double lambda = 0.0;
  double alpha = 0.0;
  std::vector<double> fold_rmse;
  double mean_rmse = 0.0;
};

struct GridSearchResult {
  double best_lambda = 0.0;
  double best_alpha = 0.0;
  std::vector<CvRow> table;
};

// Grouped k-fold grid search over (lambda, alpha). Picks the pair with the
// lowest mean validation RMSE; exact ties go to the larger lambda, then the
// larger alpha.
GridSearchResult grid_search(std::span<const LabeledSnapshot> snapshots,
                             std::span<const std::string> feature_names, const HyperGrid& grid,
                             std::size_t k, std::uint64_t seed, const EnrOptions& base = {});

// `lambda,alpha,mean_rmse_ah,fold_1_rmse_ah,...`
void write_cv_table_csv(std::ostream& out, const GridSearchResult& result);

}  // namespace slsoh
