#include "slsoh/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "slsoh/error.hpp"
#include "slsoh/metrics.hpp"
#include "slsoh/random.hpp"

namespace slsoh {

std::size_t FoldAssignment::fold_of(const std::string& cell_id) const {
  const auto it = std::lower_bound(cells.begin(), cells.end(), cell_id);
  if (it == cells.end() || *it != cell_id)
    throw InvalidArgument("cell '" + cell_id + "' has no fold");
  return cell_fold[static_cast<std::size_t>(it - cells.begin())];
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : cell_fold) ++sizes[f];
  return sizes;
}

FoldAssignment grouped_kfold(std::span<const std::string> cell_ids, std::size_t k,
                             std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("grouped_kfold: k must be at least 2");
  FoldAssignment fa;
  fa.k = k;
  fa.cells.assign(cell_ids.begin(), cell_ids.end());
  std::sort(fa.cells.begin(), fa.cells.end());
  fa.cells.erase(std::unique(fa.cells.begin(), fa.cells.end()), fa.cells.end());
  if (fa.cells.size() < k)
    throw InvalidArgument("grouped_kfold: " + std::to_string(fa.cells.size()) +
                          " distinct cells cannot fill " + std::to_string(k) + " folds");

  std::vector<std::size_t> order(fa.cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);
  fa.cell_fold.assign(fa.cells.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) fa.cell_fold[order[pos]] = pos % k;
  return fa;
}

HyperGrid HyperGrid::defaults() {
  HyperGrid g;
  for (int i = 0; i <= 10; ++i) g.lambdas.push_back(std::pow(10.0, -4.0 + 0.5 * i));
  g.alphas = {0.1, 0.5, 0.9};
  return g;
}

GridSearchResult grid_search(std::span<const LabeledSnapshot> snapshots,
                             std::span<const std::string> feature_names, const HyperGrid& grid,
                             std::size_t k, std::uint64_t seed, const EnrOptions& base) {
  if (grid.lambdas.empty() || grid.alphas.empty()) throw InvalidArgument("grid_search: empty grid");

  std::vector<std::string> row_cells;
  for (const auto& s : snapshots) row_cells.push_back(s.cell_id);
  const FoldAssignment folds = grouped_kfold(row_cells, k, seed);
  std::vector<std::size_t> row_fold;
  for (const auto& c : row_cells) row_fold.push_back(folds.fold_of(c));

  const Matrix x = design_matrix(snapshots, feature_names);
  std::vector<double> y;
  for (const auto& s : snapshots) y.push_back(s.label_q_ch_c20_ah);
  const std::vector<std::string> names(feature_names.begin(), feature_names.end());

  // Per-fold train/validation splits are shared by every grid point.
  struct Split {
    Matrix x_train, x_val;
    std::vector<double> y_train, y_val;
  };
  std::vector<Split> splits(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t r = 0; r < x.rows(); ++r) (row_fold[r] == f ? va : tr).push_back(r);
    Split& s = splits[f];
    s.x_train = Matrix(tr.size(), x.cols());
    s.x_val = Matrix(va.size(), x.cols());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      std::copy(x.row(tr[i]).begin(), x.row(tr[i]).end(), s.x_train.row(i).begin());
      s.y_train.push_back(y[tr[i]]);
    }
    for (std::size_t i = 0; i < va.size(); ++i) {
      std::copy(x.row(va[i]).begin(), x.row(va[i]).end(), s.x_val.row(i).begin());
      s.y_val.push_back(y[va[i]]);
    }
  }

  GridSearchResult result;
  const CvRow* best = nullptr;
  for (double lambda : grid.lambdas) {
    for (double alpha : grid.alphas) {
      CvRow row;
      row.lambda = lambda;
      row.alpha = alpha;
      EnrOptions opt = base;
      opt.lambda = lambda;
      opt.alpha = alpha;
      double sum = 0.0;
      for (const Split& s : splits) {
        const EnrFit fit = enr_fit(s.x_train, s.y_train, names, opt);
        std::vector<double> pred;
        for (std::size_t i = 0; i < s.x_val.rows(); ++i)
          pred.push_back(enr_predict(fit.model, s.x_val.row(i)));
        const double rmse = metrics(pred, s.y_val).rmse_ah;
        row.fold_rmse.push_back(rmse);
        sum += rmse;
      }
      row.mean_rmse = sum / static_cast<double>(k);
      result.table.push_back(std::move(row));
    }
  }
  for (const CvRow& row : result.table) {
    if (best == nullptr || row.mean_rmse < best->mean_rmse ||
        (row.mean_rmse == best->mean_rmse &&
         (row.lambda > best->lambda || (row.lambda == best->lambda && row.alpha > best->alpha))))
      best = &row;
  }
  result.best_lambda = best->lambda;
  result.best_alpha = best->alpha;
  return result;
}

void write_cv_table_csv(std::ostream& out, const GridSearchResult& result) {
  out << "lambda,alpha,mean_rmse_ah";
  const std::size_t k = result.table.empty() ? 0 : result.table.front().fold_rmse.size();
  for (std::size_t f = 0; f < k; ++f) out << ",fold_" << (f + 1) << "_rmse_ah";
  out << '\n';
  for (const CvRow& row : result.table) {
    out << format_double(row.lambda) << ',' << format_double(row.alpha) << ','
        << format_double(row.mean_rmse);
    for (double v : row.fold_rmse) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace slsoh
