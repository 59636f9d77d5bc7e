#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slsoh/features.hpp"

namespace slsoh {

struct MutualInfoConfig {
  std::size_t bins = 8;
};

// Equal-frequency bin index of every value. Bins are assigned from ranks, and
// tied values share the bin of their lowest rank, so any strictly increasing
// transform of x yields identical bins.
std::vector<std::size_t> equal_frequency_bins(std::span<const double> x, std::size_t bins);

// Plug-in mutual information (nats) between equal-frequency binnings of x and
// y. Exactly symmetric and never negative. A constant input yields 0 and a
// warning.
double mutual_information(std::span<const double> x, std::span<const double> y,
                          std::size_t bins, std::vector<std::string>* warnings = nullptr);

struct RankedFeature {
  std::string feature_name;
  std::size_t rank = 0;      // 1-based
  double score = 0.0;        // relevance minus mean redundancy at selection
  double relevance = 0.0;
  double redundancy = 0.0;
};

// Column-major feature table.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

FeatureMatrix feature_matrix(std::span<const LabeledSnapshot> snapshots,
                             std::span<const std::string> names);
std::vector<double> labels_of(std::span<const LabeledSnapshot> snapshots);

// Greedy mRMR (difference form): the first pick maximises relevance
// MI(x, y); each later pick maximises MI(x, y) minus the mean MI against the
// already selected features. Ties go to the lexicographically smaller name.
std::vector<RankedFeature> mrmr_rank(const FeatureMatrix& features, std::span<const double> labels,
                                     const MutualInfoConfig& cfg = {},
                                     std::vector<std::string>* warnings = nullptr);

std::vector<std::string> select_top_k(std::span<const RankedFeature> ranked, std::size_t k = 6);

// `rank,feature_name,score`
void write_ranking_csv(std::ostream& out, std::span<const RankedFeature> ranked);
std::vector<RankedFeature> read_ranking_csv(std::istream& in);

}  // namespace slsoh
