#include "summscore/stats.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "summscore/jsonl.hpp"

namespace summscore {

namespace detail {

void check_lengths(Eigen::Index nx, Eigen::Index ny) {
  if (nx != ny) {
    throw std::invalid_argument("correlation inputs have different lengths");
  }
  if (nx < 2) {
    throw std::invalid_argument("correlation needs at least two samples");
  }
}

}  // namespace detail

std::vector<double> average_ranks(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const auto n = static_cast<std::size_t>(values.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[static_cast<Eigen::Index>(a)] < values[static_cast<Eigen::Index>(b)]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           values[static_cast<Eigen::Index>(order[j + 1])] ==
               values[static_cast<Eigen::Index>(order[i])]) {
      ++j;
    }
    // positions i..j (0-based) share the average of ranks i+1..j+1
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = rank;
    }
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  return pearson(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
                 Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())));
}

std::optional<double> spearman(const Eigen::Ref<const Eigen::VectorXd>& xs,
                               const Eigen::Ref<const Eigen::VectorXd>& ys) {
  detail::check_lengths(xs.size(), ys.size());
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  return detail::pearson_impl(
      Eigen::Map<const Eigen::VectorXd>(rx.data(), static_cast<Eigen::Index>(rx.size())),
      Eigen::Map<const Eigen::VectorXd>(ry.data(), static_cast<Eigen::Index>(ry.size())));
}

std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  return spearman(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
                  Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())));
}

CorrelationResult correlate(const Eigen::Ref<const Eigen::VectorXd>& xs,
                            const Eigen::Ref<const Eigen::VectorXd>& ys) {
  detail::check_lengths(xs.size(), ys.size());
  CorrelationResult result;
  result.n = static_cast<int>(xs.size());

  const auto p = detail::pearson_impl(xs, ys);
  if (p) {
    result.pearson = *p;
  } else {
    const double mean_x = xs.mean();
    const double mean_y = ys.mean();
    if (((xs.array() - mean_x) == 0.0).all()) result.flags |= CorrelationResult::kConstantX;
    if (((ys.array() - mean_y) == 0.0).all()) result.flags |= CorrelationResult::kConstantY;
  }

  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const Eigen::Map<const Eigen::VectorXd> mrx(rx.data(), static_cast<Eigen::Index>(rx.size()));
  const Eigen::Map<const Eigen::VectorXd> mry(ry.data(), static_cast<Eigen::Index>(ry.size()));
  const auto s = detail::pearson_impl(mrx, mry);
  if (s) {
    result.spearman = *s;
  } else {
    if ((mrx.array() == mrx[0]).all()) result.flags |= CorrelationResult::kConstantXRanks;
    if ((mry.array() == mry[0]).all()) result.flags |= CorrelationResult::kConstantYRanks;
  }
  return result;
}

CorrelationResult correlate(const std::vector<double>& xs, const std::vector<double>& ys) {
  return correlate(Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
                   Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())));
}

const CorrelationResult& CorrelationTable::cell(const std::string& metric,
                                                const std::string& dimension) const {
  for (std::size_t r = 0; r < metrics.size(); ++r) {
    if (metrics[r] != metric) continue;
    for (std::size_t c = 0; c < dimensions.size(); ++c) {
      if (dimensions[c] == dimension) return cells[r][c];
    }
  }
  throw std::invalid_argument("no table cell for (" + metric + ", " + dimension + ")");
}

CorrelationTable correlation_table(const std::vector<NamedColumn>& metric_columns,
                                   const std::vector<NamedColumn>& human_columns) {
  CorrelationTable table;
  std::size_t expected = human_columns.empty() ? 0 : human_columns.front().values.size();
  for (const NamedColumn& h : human_columns) {
    if (h.values.size() != expected) {
      throw DataError("misaligned human column: " + h.name);
    }
    table.dimensions.push_back(h.name);
  }
  for (const NamedColumn& m : metric_columns) {
    if (m.values.size() != expected) {
      throw DataError("misaligned metric column: " + m.name);
    }
    table.metrics.push_back(m.name);
    std::vector<CorrelationResult> row;
    row.reserve(human_columns.size());
    for (const NamedColumn& h : human_columns) {
      row.push_back(correlate(m.values, h.values));
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

std::string format_fixed(double value, int decimals) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(decimals);
  out << value;
  return out.str();
}

void write_table_csv(const std::filesystem::path& path, const CorrelationTable& table) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write table: " + path.string());
  }
  out << "metric";
  for (const std::string& d : table.dimensions) {
    out << ',' << d << "_pearson," << d << "_spearman";
  }
  out << '\n';
  for (std::size_t r = 0; r < table.metrics.size(); ++r) {
    out << table.metrics[r];
    for (const CorrelationResult& cell : table.cells[r]) {
      out << ',' << (cell.pearson_defined() ? format_fixed(cell.pearson, 4) : "NA");
      out << ',' << (cell.spearman_defined() ? format_fixed(cell.spearman, 4) : "NA");
    }
    out << '\n';
  }
}

void write_table_jsonl(const std::filesystem::path& path, const CorrelationTable& table) {
  std::vector<Json> records;
  for (std::size_t r = 0; r < table.metrics.size(); ++r) {
    for (std::size_t c = 0; c < table.dimensions.size(); ++c) {
      const CorrelationResult& cell = table.cells[r][c];
      Json record{{"metric", table.metrics[r]},
                  {"dimension", table.dimensions[c]},
                  {"n", cell.n},
                  {"flags", cell.flags}};
      if (cell.pearson_defined()) record["pearson"] = cell.pearson;
      if (cell.spearman_defined()) record["spearman"] = cell.spearman;
      records.push_back(std::move(record));
    }
  }
  write_jsonl(path, records);
}

}  // namespace summscore
