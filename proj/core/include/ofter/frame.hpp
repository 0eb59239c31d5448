#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ofter::frame {

using Index = Eigen::Index;

// T x d observations with column labels and a strictly increasing time index.
// Index labels are integer ticks or ISO dates; numeric labels compare
// numerically, anything else lexicographically.
struct TimePanel {
  Eigen::MatrixXd values;
  std::vector<std::string> columns;
  std::vector<std::string> index;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  std::optional<Index> find_column(const std::string& name) const;
  // Throws ofter::Error naming the column when it is absent.
  Index column_index(const std::string& name) const;
  Eigen::VectorXd column(const std::string& name) const;

  // Checks shape agreement, finiteness, unique columns and monotone index.
  void validate() const;
};

// Builds a panel with an integer index 0..T-1 and default column names c0..c{d-1}
// when names are not supplied.
TimePanel make_panel(Eigen::MatrixXd values, std::vector<std::string> columns = {});

enum class IndexColumn { Auto, None, First };

// Comma-separated file, optional single header row. With IndexColumn::Auto the
// leading column is consumed as the index when any of its cells is non-numeric
// or its header is one of t/time/index/date/datetime/timestamp (or empty).
TimePanel load_csv(const std::string& path, bool has_header, IndexColumn index_mode = IndexColumn::Auto);

// Writes a header row and the index as the leading column. Values are written
// with round-trip precision.
void write_csv(const TimePanel& panel, const std::string& path, const std::string& index_name = "t");

// Column block k (k = 0..max_lag) holds every input column shifted by k rows and
// is named "<col>.lag<k>". The first max_lag rows are dropped.
TimePanel build_lagged_features(const TimePanel& panel, int max_lag);

struct PruneResult {
  TimePanel panel;
  std::vector<bool> mask;  // true for retained input columns
};

// Left-to-right QR scan of the column-centred matrix; column j is dropped when
// its diagonal |R_jj| against the columns kept so far falls below eps.
PruneResult prune_rank_deficient(const TimePanel& panel, double eps = 1e-8);
std::vector<bool> rank_mask(const Eigen::MatrixXd& values, double eps = 1e-8);

// Half-open row range [begin, end).
struct RowRange {
  Index begin = 0;
  Index end = 0;
  Index size() const { return end - begin; }
};

struct StandardizationState {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;      // sample standard deviation on the fitting window
  std::vector<bool> active;   // columns surviving rank pruning

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct Standardized {
  TimePanel panel;
  StandardizationState state;
};

// Statistics come from `window` only; every row is transformed with them.
Standardized standardize(const TimePanel& panel, RowRange window);

}  // namespace ofter::frame
