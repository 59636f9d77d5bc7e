#include "slsoh/selection.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "slsoh/error.hpp"
#include "text_util.hpp"

namespace slsoh {

namespace {

// Entropy (nats) of a histogram given its non-zero counts. Counts are summed
// in sorted order so the result depends only on the multiset of counts.
double entropy(std::vector<double> counts, double n) {
  std::sort(counts.begin(), counts.end());
  double acc = 0.0;
  for (double c : counts) acc += c * std::log(c);
  return std::log(n) - acc / n;
}

std::vector<double> nonzero(const std::vector<std::size_t>& hist) {
  std::vector<double> out;
  for (auto c : hist)
    if (c > 0) out.push_back(static_cast<double>(c));
  return out;
}

bool is_constant(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *lo == *hi;
}

}  // namespace

std::vector<std::size_t> equal_frequency_bins(std::span<const double> x, std::size_t bins) {
  if (bins < 2) throw InvalidArgument("at least 2 bins required");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });

  std::vector<std::size_t> out(n);
  std::size_t rank = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos == 0 || x[order[pos]] != x[order[pos - 1]]) rank = pos;
    out[order[pos]] = rank * bins / n;
  }
  return out;
}

double mutual_information(std::span<const double> x, std::span<const double> y, std::size_t bins,
                          std::vector<std::string>* warnings) {
  if (x.size() != y.size()) throw InvalidArgument("mutual_information: length mismatch");
  if (x.size() < 4) throw InvalidArgument("mutual_information: at least 4 samples required");
  if (bins < 2) throw InvalidArgument("mutual_information: at least 2 bins required");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw InvalidArgument("mutual_information: non-finite input");

  if (is_constant(x) || is_constant(y)) {
    if (warnings) warnings->push_back("mutual_information: constant input series, MI set to 0");
    return 0.0;
  }

  const auto bx = equal_frequency_bins(x, bins);
  const auto by = equal_frequency_bins(y, bins);
  std::vector<std::size_t> hx(bins, 0), hy(bins, 0), hxy(bins * bins, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++hx[bx[i]];
    ++hy[by[i]];
    ++hxy[bx[i] * bins + by[i]];
  }
  const double n = static_cast<double>(x.size());
  const double mi = entropy(nonzero(hx), n) + entropy(nonzero(hy), n) - entropy(nonzero(hxy), n);
  return std::max(0.0, mi);
}

FeatureMatrix feature_matrix(std::span<const LabeledSnapshot> snapshots,
                             std::span<const std::string> names) {
  FeatureMatrix m;
  m.names.assign(names.begin(), names.end());
  for (const auto& name : names) {
    std::vector<double> col;
    col.reserve(snapshots.size());
    for (const auto& s : snapshots) col.push_back(feature_value(s.features, name));
    m.columns.push_back(std::move(col));
  }
  return m;
}

std::vector<double> labels_of(std::span<const LabeledSnapshot> snapshots) {
  std::vector<double> y;
  y.reserve(snapshots.size());
  for (const auto& s : snapshots) y.push_back(s.label_q_ch_c20_ah);
  return y;
}

std::vector<RankedFeature> mrmr_rank(const FeatureMatrix& features, std::span<const double> labels,
                                     const MutualInfoConfig& cfg,
                                     std::vector<std::string>* warnings) {
  const std::size_t p = features.names.size();
  if (p == 0 || features.columns.size() != p)
    throw InvalidArgument("mrmr_rank: feature names and columns disagree");
  if (features.rows() < 4) throw InvalidArgument("mrmr_rank: at least 4 rows required");
  for (const auto& col : features.columns)
    if (col.size() != labels.size()) throw InvalidArgument("mrmr_rank: row count mismatch");

  std::vector<double> relevance(p);
  for (std::size_t j = 0; j < p; ++j)
    relevance[j] = mutual_information(features.columns[j], labels, cfg.bins, warnings);

  std::vector<double> redundancy_sum(p, 0.0);
  std::vector<bool> taken(p, false);
  std::vector<RankedFeature> ranked;
  for (std::size_t step = 0; step < p; ++step) {
    std::size_t best = p;
    double best_score = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (taken[j]) continue;
      const double red = step == 0 ? 0.0 : redundancy_sum[j] / static_cast<double>(step);
      const double score = relevance[j] - red;
      if (best == p || score > best_score ||
          (score == best_score && features.names[j] < features.names[best])) {
        best = j;
        best_score = score;
      }
    }
    taken[best] = true;
    const double red = step == 0 ? 0.0 : redundancy_sum[best] / static_cast<double>(step);
    ranked.push_back({features.names[best], step + 1, best_score, relevance[best], red});
    for (std::size_t j = 0; j < p; ++j)
      if (!taken[j])
        redundancy_sum[j] += mutual_information(features.columns[j], features.columns[best],
                                                cfg.bins, warnings);
  }
  return ranked;
}

std::vector<std::string> select_top_k(std::span<const RankedFeature> ranked, std::size_t k) {
  if (k == 0) throw InvalidArgument("select_top_k: k must be at least 1");
  if (k > ranked.size()) throw InvalidArgument("select_top_k: k exceeds the number of features");
  std::vector<const RankedFeature*> order;
  for (const auto& r : ranked) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](auto a, auto b) { return a->rank < b->rank; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(order[i]->feature_name);
  return out;
}

void write_ranking_csv(std::ostream& out, std::span<const RankedFeature> ranked) {
  out << "rank,feature_name,score\n";
  for (const auto& r : ranked)
    out << r.rank << ',' << r.feature_name << ',' << format_double(r.score) << '\n';
}

std::vector<RankedFeature> read_ranking_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no)) throw MissingInput("ranking CSV is empty");
  if (detail::trim(line) != "rank,feature_name,score") throw SchemaError("ranking CSV header mismatch");
  std::vector<RankedFeature> out;
  while (detail::next_line(in, line, line_no)) {
    const auto f = detail::split_fields(line);
    if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
    const auto rank = detail::parse_index(f[0]);
    const auto score = detail::parse_number(f[2]);
    if (!rank || *rank == 0 || !score || f[1].empty()) throw ParseError(line_no, "invalid ranking row");
    RankedFeature r;
    r.rank = *rank;
    r.feature_name = std::string(f[1]);
    r.score = *score;
    out.push_back(std::move(r));
  }
  std::vector<std::size_t> ranks;
  for (const auto& r : out) ranks.push_back(r.rank);
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (ranks[i] != i + 1) throw SchemaError("ranking CSV ranks are not a permutation of 1..n");
  return out;
}

}  // namespace slsoh
