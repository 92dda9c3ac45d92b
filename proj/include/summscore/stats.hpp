#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "summscore/types.hpp"

namespace summscore {

struct CorrelationResult {
  enum Flags : unsigned {
    kNone = 0,
    kConstantX = 1u << 0,       // zero variance in x values
    kConstantY = 1u << 1,       // zero variance in y values
    kConstantXRanks = 1u << 2,  // all x ranks tied
    kConstantYRanks = 1u << 3,  // all y ranks tied
  };

  double pearson = std::numeric_limits<double>::quiet_NaN();
  double spearman = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
  unsigned flags = kNone;

  bool pearson_defined() const { return !std::isnan(pearson); }
  bool spearman_defined() const { return !std::isnan(spearman); }
};

namespace detail {

// Two-pass centered Pearson on anything Eigen can evaluate as a column.
// Returns nullopt when either side has zero variance.
template <typename DerivedX, typename DerivedY>
std::optional<double> pearson_impl(const Eigen::MatrixBase<DerivedX>& xs,
                                   const Eigen::MatrixBase<DerivedY>& ys) {
  const Eigen::Index n = xs.size();
  const double mean_x = xs.template cast<double>().mean();
  const double mean_y = ys.template cast<double>().mean();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = static_cast<double>(xs(i)) - mean_x;
    const double dy = static_cast<double>(ys(i)) - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

void check_lengths(Eigen::Index nx, Eigen::Index ny);

}  // namespace detail

// Average (fractional) ranks, 1-based; tied values share the mean of their
// rank positions.
std::vector<double> average_ranks(const Eigen::Ref<const Eigen::VectorXd>& values);

// Sample Pearson correlation. Throws std::invalid_argument on length
// mismatch or n < 2; a degenerate (zero-variance) side yields nullopt rather
// than a silent zero.
template <typename DerivedX, typename DerivedY>
std::optional<double> pearson(const Eigen::MatrixBase<DerivedX>& xs,
                              const Eigen::MatrixBase<DerivedY>& ys) {
  detail::check_lengths(xs.size(), ys.size());
  return detail::pearson_impl(xs, ys);
}

std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Spearman rank correlation with average ranks for ties.
std::optional<double> spearman(const Eigen::Ref<const Eigen::VectorXd>& xs,
                               const Eigen::Ref<const Eigen::VectorXd>& ys);
std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Both coefficients plus degeneracy flags in one pass.
CorrelationResult correlate(const Eigen::Ref<const Eigen::VectorXd>& xs,
                            const Eigen::Ref<const Eigen::VectorXd>& ys);
CorrelationResult correlate(const std::vector<double>& xs, const std::vector<double>& ys);

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

// Metric rows x human-score columns grid of correlation results.
struct CorrelationTable {
  std::vector<std::string> metrics;     // row order
  std::vector<std::string> dimensions;  // column order
  // results[row][col] aligned with the two name lists above
  std::vector<std::vector<CorrelationResult>> cells;

  const CorrelationResult& cell(const std::string& metric, const std::string& dimension) const;
};

// Correlates every metric column against every human column. All columns
// must have equal lengths (they are aligned by example position).
CorrelationTable correlation_table(const std::vector<NamedColumn>& metric_columns,
                                   const std::vector<NamedColumn>& human_columns);

// CSV with one metric row and a pearson/spearman column pair per dimension,
// values printed with 4 decimals ("NA" for undefined cells).
void write_table_csv(const std::filesystem::path& path, const CorrelationTable& table);
// Full-precision line-delimited export (one record per cell).
void write_table_jsonl(const std::filesystem::path& path, const CorrelationTable& table);

std::string format_fixed(double value, int decimals);

}  // namespace summscore
