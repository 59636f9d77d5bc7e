#include "slsoh/regression.hpp"

#include <algorithm>
#include <cmath>

#include "slsoh/error.hpp"

namespace slsoh {

namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void check_finite(const Matrix& x, std::span<const double> y) {
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (double v : x.row(r))
      if (!std::isfinite(v)) throw InvalidArgument("enr_fit: non-finite feature value");
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidArgument("enr_fit: non-finite label");
}

// Standardized design in column-major order plus the centered target.
struct Prepared {
  std::vector<std::vector<double>> cols;
  std::vector<double> y_centered;
  double y_mean = 0.0;
};

Prepared prepare(const Standardizer& st, const Matrix& x, std::span<const double> y) {
  Prepared p;
  const std::size_t n = x.rows();
  p.cols.assign(x.cols(), std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < x.cols(); ++j) p.cols[j][r] = st.transform(j, x(r, j));
  double sum = 0.0;
  for (double v : y) sum += v;
  p.y_mean = sum / static_cast<double>(n);
  p.y_centered.resize(n);
  for (std::size_t r = 0; r < n; ++r) p.y_centered[r] = y[r] - p.y_mean;
  return p;
}

double penalty(const EnrModel& m) {
  double l1 = 0.0, l2 = 0.0;
  for (double w : m.weights) {
    l1 += std::abs(w);
    l2 += w * w;
  }
  return m.lambda * (m.alpha * l1 + 0.5 * (1.0 - m.alpha) * l2);
}

double half_mse(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return 0.5 * s / static_cast<double>(r.size());
}

}  // namespace

Matrix design_matrix(std::span<const LabeledSnapshot> snapshots,
                     std::span<const std::string> names) {
  Matrix x(snapshots.size(), names.size());
  for (std::size_t r = 0; r < snapshots.size(); ++r)
    for (std::size_t j = 0; j < names.size(); ++j)
      x(r, j) = feature_value(snapshots[r].features, names[j]);
  return x;
}

Standardizer Standardizer::fit(const Matrix& x, std::span<const std::string> names) {
  if (x.rows() < 2) throw InvalidArgument("standardizer needs at least 2 rows");
  Standardizer st;
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) var += (x(r, j) - mean) * (x(r, j) - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0) || !(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      const std::string name = j < names.size() ? names[j] : "#" + std::to_string(j);
      throw InvalidArgument("zero-variance feature '" + name + "'");
    }
    st.means.push_back(mean);
    st.stds.push_back(sd);
  }
  return st;
}

void EnrModel::validate() const {
  const std::size_t p = feature_names.size();
  if (weights.size() != p || standardizer.means.size() != p || standardizer.stds.size() != p)
    throw SchemaError("model arrays disagree with feature_names length");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw SchemaError("alpha must lie in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw SchemaError("lambda must be non-negative");
  if (!std::isfinite(intercept)) throw SchemaError("intercept is not finite");
  for (std::size_t j = 0; j < p; ++j) {
    if (!std::isfinite(weights[j]) || !std::isfinite(standardizer.means[j]))
      throw SchemaError("model contains non-finite values");
    if (!(standardizer.stds[j] > 0.0) || !std::isfinite(standardizer.stds[j]))
      throw SchemaError("standard deviations must be positive");
  }
}

EnrFit enr_fit(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
               const EnrOptions& options) {
  if (x.rows() != y.size()) throw InvalidArgument("enr_fit: row count mismatch");
  if (x.rows() < 2) throw InvalidArgument("enr_fit: at least 2 rows required");
  if (feature_names.size() != x.cols()) throw InvalidArgument("enr_fit: feature name count mismatch");
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (!(options.lambda >= 0.0) || !std::isfinite(options.lambda))
    throw InvalidArgument("lambda must be non-negative");
  if (!(options.tol > 0.0) || options.max_iter == 0)
    throw InvalidArgument("tol and max_iter must be positive");
  check_finite(x, y);

  EnrFit fit;
  EnrModel& m = fit.model;
  m.feature_names = std::move(feature_names);
  m.standardizer = Standardizer::fit(x, m.feature_names);
  m.lambda = options.lambda;
  m.alpha = options.alpha;

  const Prepared prep = prepare(m.standardizer, x, y);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double l1 = m.lambda * m.alpha;
  const double l2 = m.lambda * (1.0 - m.alpha);

  std::vector<double> z(p);
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (double v : prep.cols[j]) s += v * v;
    z[j] = s * inv_n;
  }

  std::vector<double> w(p, 0.0);
  std::vector<double> r = prep.y_centered;
  const auto objective = [&] {
    m.weights = w;
    return half_mse(r) + penalty(m);
  };
  double prev_obj = options.verify_descent ? objective() : 0.0;

  for (fit.iterations = 1; fit.iterations <= options.max_iter; ++fit.iterations) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const auto& col = prep.cols[j];
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += col[i] * r[i];
      rho = rho * inv_n + z[j] * w[j];
      const double w_new = soft_threshold(rho, l1) / (z[j] + l2);
      const double delta = w_new - w[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= col[i] * delta;
        w[j] = w_new;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (options.verify_descent) {
      const double obj = objective();
      if (obj > prev_obj + 1e-12 * std::max(1.0, std::abs(prev_obj)))
        throw Error("coordinate descent objective increased");
      prev_obj = obj;
    }
    if (max_change < options.tol) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) fit.iterations = options.max_iter;

  m.weights = w;
  m.intercept = prep.y_mean;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) fit.residuals[i] = y[i] - enr_predict(m, x.row(i));
  return fit;
}

double enr_predict(const EnrModel& model, std::span<const double> raw_row) {
  if (raw_row.size() != model.weights.size())
    throw InvalidArgument("enr_predict: feature count mismatch");
  double acc = model.intercept;
  for (std::size_t j = 0; j < raw_row.size(); ++j)
    acc += model.standardizer.transform(j, raw_row[j]) * model.weights[j];
  return acc;
}

double enr_predict(const EnrModel& model, const FeatureVector& features) {
  std::vector<double> row;
  row.reserve(model.feature_names.size());
  for (const auto& name : model.feature_names) row.push_back(feature_value(features, name));
  return enr_predict(model, row);
}

std::vector<double> enr_predict(const EnrModel& model, std::span<const LabeledSnapshot> snapshots) {
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(enr_predict(model, s.features));
  return out;
}

double enr_objective(const EnrModel& model, const Matrix& x, std::span<const double> y) {
  std::vector<double> r(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) r[i] = y[i] - enr_predict(model, x.row(i));
  return half_mse(r) + penalty(model);
}

double kkt_violation(const EnrModel& model, const Matrix& x, std::span<const double> y) {
  const Prepared prep = prepare(model.standardizer, x, y);
  const std::size_t n = x.rows();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - enr_predict(model, x.row(i));
  const double l1 = model.lambda * model.alpha;
  const double l2 = model.lambda * (1.0 - model.alpha);
  double worst = 0.0;
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    double corr = 0.0;
    for (std::size_t i = 0; i < n; ++i) corr += prep.cols[j][i] * r[i];
    corr /= static_cast<double>(n);
    const double wj = model.weights[j];
    const double v = wj == 0.0 ? std::max(0.0, std::abs(corr) - l1)
                               : std::abs(-corr + l2 * wj + l1 * (wj > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace slsoh
