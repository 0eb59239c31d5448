#include "ofter/frame.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "ofter/error.hpp"

namespace ofter::frame {

namespace {

constexpr std::string_view kModule = "frame";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

bool index_like_header(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  static const std::set<std::string> names = {"", "t", "time", "index", "date", "datetime", "timestamp"};
  return names.count(name) > 0;
}

bool index_increasing(const std::vector<std::string>& index, std::size_t* bad_row) {
  std::vector<double> numeric;
  numeric.reserve(index.size());
  for (const auto& label : index) {
    const auto v = parse_number(label);
    if (!v) {
      numeric.clear();
      break;
    }
    numeric.push_back(*v);
  }
  const bool use_numeric = numeric.size() == index.size();
  for (std::size_t i = 1; i < index.size(); ++i) {
    const bool ok = use_numeric ? numeric[i] > numeric[i - 1] : index[i] > index[i - 1];
    if (!ok) {
      if (bad_row) *bad_row = i;
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<Index> TimePanel::find_column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) return std::nullopt;
  return static_cast<Index>(it - columns.begin());
}

Index TimePanel::column_index(const std::string& name) const {
  const auto j = find_column(name);
  if (!j) throw Error(kModule, "no column named '" + name + "'");
  return *j;
}

Eigen::VectorXd TimePanel::column(const std::string& name) const {
  return values.col(column_index(name));
}

void TimePanel::validate() const {
  if (static_cast<Index>(columns.size()) != values.cols())
    throw Error(kModule, "column label count does not match the value matrix");
  if (static_cast<Index>(index.size()) != values.rows())
    throw Error(kModule, "index length does not match the value matrix");
  if (!values.allFinite()) throw Error(kModule, "panel contains non-finite values");
  std::set<std::string> seen;
  for (const auto& c : columns)
    if (!seen.insert(c).second) throw Error(kModule, "duplicate column '" + c + "'");
  std::size_t bad = 0;
  if (!index_increasing(index, &bad))
    throw Error(kModule, "index is not strictly increasing at row " + std::to_string(bad));
}

TimePanel make_panel(Eigen::MatrixXd values, std::vector<std::string> columns) {
  TimePanel p;
  if (columns.empty())
    for (Index j = 0; j < values.cols(); ++j) columns.push_back("c" + std::to_string(j));
  p.columns = std::move(columns);
  p.index.reserve(static_cast<std::size_t>(values.rows()));
  for (Index i = 0; i < values.rows(); ++i) p.index.push_back(std::to_string(i));
  p.values = std::move(values);
  p.validate();
  return p;
}

TimePanel load_csv(const std::string& path, bool has_header, IndexColumn index_mode) {
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open '" + path + "'");

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (has_header && header.empty() && rows.empty()) {
      header = std::move(cells);
      continue;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw Error(kModule, "'" + path + "' has no data rows");

  const std::size_t width = has_header ? header.size() : rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != width)
      throw Error(kModule, "ragged row " + std::to_string(r + 1) + ": expected " + std::to_string(width) +
                               " cells, found " + std::to_string(rows[r].size()));

  bool use_index = index_mode == IndexColumn::First;
  if (index_mode == IndexColumn::Auto && width > 1) {
    if (has_header && index_like_header(header.front())) use_index = true;
    for (const auto& row : rows)
      if (!row.front().empty() && !parse_number(row.front())) use_index = true;
  }
  const std::size_t first_data = use_index ? 1 : 0;
  if (width <= first_data) throw Error(kModule, "'" + path + "' has no data columns");

  TimePanel panel;
  panel.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width - first_data));
  for (std::size_t c = first_data; c < width; ++c)
    panel.columns.push_back(has_header ? header[c] : "c" + std::to_string(c - first_data));

  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (use_index) {
      if (rows[r].front().empty())
        throw Error(kModule, "blank index cell at row " + std::to_string(r + 1));
      panel.index.push_back(rows[r].front());
    } else {
      panel.index.push_back(std::to_string(r));
    }
    for (std::size_t c = first_data; c < width; ++c) {
      const auto& cell = rows[r][c];
      const auto v = parse_number(cell);
      const std::string where = "row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) + " ('" +
                                panel.columns[c - first_data] + "')";
      if (cell.empty()) throw Error(kModule, "missing value at " + where);
      if (!v) throw Error(kModule, "non-numeric cell '" + cell + "' at " + where);
      panel.values(static_cast<Index>(r), static_cast<Index>(c - first_data)) = *v;
    }
  }
  panel.validate();
  return panel;
}

void write_csv(const TimePanel& panel, const std::string& path, const std::string& index_name) {
  std::ofstream out(path);
  if (!out) throw Error(kModule, "cannot write '" + path + "'");
  out << index_name;
  for (const auto& c : panel.columns) out << ',' << c;
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < panel.rows(); ++i) {
    out << panel.index[static_cast<std::size_t>(i)];
    for (Index j = 0; j < panel.cols(); ++j) out << ',' << panel.values(i, j);
    out << '\n';
  }
  if (!out) throw Error(kModule, "write to '" + path + "' failed");
}

TimePanel build_lagged_features(const TimePanel& panel, int max_lag) {
  if (max_lag < 0) throw Error(kModule, "max_lag must be non-negative");
  const Index lag = max_lag;
  if (lag >= panel.rows())
    throw Error(kModule, "max_lag " + std::to_string(max_lag) + " must be smaller than the series length " +
                             std::to_string(panel.rows()));
  const Index t_out = panel.rows() - lag;
  const Index d = panel.cols();
  TimePanel out;
  out.values.resize(t_out, d * (lag + 1));
  for (Index k = 0; k <= lag; ++k) {
    out.values.middleCols(k * d, d) = panel.values.middleRows(lag - k, t_out);
    for (const auto& c : panel.columns) out.columns.push_back(c + ".lag" + std::to_string(k));
  }
  out.index.assign(panel.index.begin() + lag, panel.index.end());
  return out;
}

std::vector<bool> rank_mask(const Eigen::MatrixXd& values, double eps) {
  if (!(eps > 0.0)) throw Error(kModule, "rank tolerance must be positive");
  const Eigen::MatrixXd centered = values.rowwise() - values.colwise().mean();
  const Index n = centered.rows();
  std::vector<bool> mask(static_cast<std::size_t>(centered.cols()), false);
  // Orthonormal basis of the columns kept so far; the residual norm of the next
  // column against it equals |R_jj| of the QR factorisation of the kept set.
  Eigen::MatrixXd basis(n, 0);
  for (Index j = 0; j < centered.cols(); ++j) {
    Eigen::VectorXd r = centered.col(j);
    for (int pass = 0; pass < 2; ++pass)
      if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
    const double rjj = r.norm();
    if (rjj < eps) continue;
    mask[static_cast<std::size_t>(j)] = true;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = r / rjj;
  }
  return mask;
}

PruneResult prune_rank_deficient(const TimePanel& panel, double eps) {
  auto mask = rank_mask(panel.values, eps);
  const auto kept = std::count(mask.begin(), mask.end(), true);
  if (kept == 0) throw Error(kModule, "rank pruning removed every column (degenerate input)");
  PruneResult result;
  result.panel.index = panel.index;
  result.panel.values.resize(panel.rows(), kept);
  Index out = 0;
  for (Index j = 0; j < panel.cols(); ++j) {
    if (!mask[static_cast<std::size_t>(j)]) continue;
    result.panel.values.col(out++) = panel.values.col(j);
    result.panel.columns.push_back(panel.columns[static_cast<std::size_t>(j)]);
  }
  result.mask = std::move(mask);
  return result;
}

Eigen::VectorXd StandardizationState::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw Error(kModule, "standardize: dimension mismatch");
  return (x - mean).cwiseQuotient(scale);
}

Eigen::MatrixXd StandardizationState::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw Error(kModule, "standardize: dimension mismatch");
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Standardized standardize(const TimePanel& panel, RowRange window) {
  if (window.begin < 0 || window.end > panel.rows() || window.size() < 2)
    throw Error(kModule, "standardization window must lie inside the panel and hold at least two rows");
  const auto block = panel.values.middleRows(window.begin, window.size());
  Standardized out;
  out.state.mean = block.colwise().mean().transpose();
  out.state.scale.resize(panel.cols());
  for (Index j = 0; j < panel.cols(); ++j) {
    const double ss = (block.col(j).array() - out.state.mean(j)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(window.size() - 1));
    if (!(sd > 0.0))
      throw Error(kModule, "column '" + panel.columns[static_cast<std::size_t>(j)] +
                               "' is constant on the standardization window (zero scale)");
    out.state.scale(j) = sd;
  }
  out.state.active.assign(static_cast<std::size_t>(panel.cols()), true);
  out.panel.columns = panel.columns;
  out.panel.index = panel.index;
  out.panel.values = out.state.apply(panel.values);
  return out;
}

}  // namespace ofter::frame
