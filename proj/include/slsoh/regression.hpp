#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slsoh/features.hpp"

namespace slsoh {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Rows of `snapshots`, columns in the order of `names`.
Matrix design_matrix(std::span<const LabeledSnapshot> snapshots,
                     std::span<const std::string> names);

// Per-feature mean and population standard deviation of the training rows.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;

  // Throws InvalidArgument when a column has zero variance.
  static Standardizer fit(const Matrix& x, std::span<const std::string> names = {});
  double transform(std::size_t j, double raw) const { return (raw - means[j]) / stds[j]; }
};

struct EnrModel {
  std::vector<std::string> feature_names;
  Standardizer standardizer;
  std::vector<double> weights;  // standardized space
  double intercept = 0.0;       // Ah
  double lambda = 0.0;
  double alpha = 0.0;

  void validate() const;
};

struct EnrOptions {
  double lambda = 0.01;
  double alpha = 0.5;
  double tol = 1e-8;  // on the largest coefficient change in one sweep
  std::size_t max_iter = 10000;
#ifdef NDEBUG
  bool verify_descent = false;
#else
  bool verify_descent = true;
#endif
};

struct EnrFit {
  EnrModel model;
  std::size_t iterations = 0;
  bool converged = false;
  // y - enr_predict(model, row) for every training row.
  std::vector<double> residuals;
};

// Elastic net by cyclic coordinate descent on standardized features and a
// centered target, minimising
//   (1/2M) sum (y - b - x.w)^2 + lambda (alpha |w|_1 + (1 - alpha)/2 |w|_2^2).
// With verify_descent the objective is checked to be non-increasing after
// every sweep.
EnrFit enr_fit(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
               const EnrOptions& options = {});

// Raw feature row ordered as model.feature_names.
double enr_predict(const EnrModel& model, std::span<const double> raw_row);
// Looks each model feature up by name; throws InvalidArgument when missing.
double enr_predict(const EnrModel& model, const FeatureVector& features);
std::vector<double> enr_predict(const EnrModel& model, std::span<const LabeledSnapshot> snapshots);

// Penalised objective of `model` on raw rows.
double enr_objective(const EnrModel& model, const Matrix& x, std::span<const double> y);

// Largest violation of the elastic-net optimality conditions: for zero
// weights the amount by which |gradient| exceeds lambda*alpha, for non-zero
// weights the absolute stationarity residual.
double kkt_violation(const EnrModel& model, const Matrix& x, std::span<const double> y);

}  // namespace slsoh
