#pragma once

// Sample clouds, rectangular grids and the cell bookkeeping the solver builds on.
//
// A Grid is the cartesian product of one AxisPartition per dimension. Cells are
// addressed by a CellIndex (one segment index per axis) or by a row-major linear
// index in which the last axis varies fastest. Only cells that hold samples are
// ever materialised, so grids with many empty cells cost nothing.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace gridot {

class SampleSet {
 public:
  /// `coords` holds the points back to back, `dim` values each.
  SampleSet(std::size_t dim, std::vector<double> coords);

  static SampleSet from_points(const std::vector<std::vector<double>>& points);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / dim_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double coord(std::size_t i, std::size_t axis) const { return coords_[i * dim_ + axis]; }
  const std::vector<double>& coords() const noexcept { return coords_; }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

/// Reads one point per CSV row. Blank lines are ignored; `has_header` skips the first line.
SampleSet load_samples(std::istream& in, bool has_header = false);
SampleSet load_samples(const std::filesystem::path& path, bool has_header = false);

/// Writes one point per row with 17 significant digits.
void write_samples(std::ostream& out, const SampleSet& samples);
void write_samples(const std::filesystem::path& path, const SampleSet& samples);

struct AxisPartition {
  std::size_t axis = 0;
  /// b_0 < b_1 < ... < b_K; segment k is [b_k, b_{k+1}), the last one closed.
  std::vector<double> breakpoints;
  /// Set when every sample shares one value on this axis.
  bool degenerate = false;

  std::size_t segments() const noexcept { return breakpoints.size() - 1; }
  double left(std::size_t k) const { return breakpoints[k]; }
  double right(std::size_t k) const { return breakpoints[k + 1]; }
  double width(std::size_t k) const { return breakpoints[k + 1] - breakpoints[k]; }
  double extent() const { return breakpoints.back() - breakpoints.front(); }

  /// Segment containing x; a value on an interior breakpoint goes right,
  /// the last breakpoint belongs to the last segment.
  std::optional<std::size_t> segment_of(double x) const;
};

struct CellIndex {
  std::vector<std::size_t> coords;

  std::size_t dim() const noexcept { return coords.size(); }
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

class Grid {
 public:
  explicit Grid(std::vector<AxisPartition> partitions);

  std::size_t dim() const noexcept { return axes_.size(); }
  const AxisPartition& axis(std::size_t l) const { return axes_[l]; }
  const std::vector<AxisPartition>& axes() const noexcept { return axes_; }

  std::uint64_t cell_count() const noexcept { return cell_count_; }
  std::uint64_t linear_index(const CellIndex& cell) const;
  CellIndex cell_index(std::uint64_t linear) const;
  bool contains(const CellIndex& cell) const;

  /// Euclidean length of the cell's diagonal.
  double cell_diameter(const CellIndex& cell) const;

 private:
  std::vector<AxisPartition> axes_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t cell_count_ = 1;
};

/// Each axis spans the sample range (padded by a relative 1e-9) split into two
/// equal segments. Constant axes get one segment of half-width 1e-9*max(1,|v|)
/// and are marked degenerate.
Grid initial_grid(const SampleSet& samples);

/// Throws OutOfSupportError when the point lies outside the grid.
CellIndex locate(const Grid& grid, std::span<const double> point);

/// Cells whose closed rectangles touch `cell`, excluding `cell` itself.
std::vector<CellIndex> cell_neighbors(const Grid& grid, const CellIndex& cell);

struct OccupiedCell {
  CellIndex index;
  std::uint64_t linear = 0;
  double weight = 0.0;
  std::vector<std::size_t> members;
};

/// Counting weights of the occupied cells of a grid. Cells are kept sorted by
/// linear index; a cell's position in that order is how the rest of the library
/// refers to it.
class WeightedPartition {
 public:
  WeightedPartition(Grid grid, std::vector<OccupiedCell> cells, std::size_t total);

  const Grid& grid() const noexcept { return grid_; }
  const std::vector<OccupiedCell>& cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const OccupiedCell& operator[](std::size_t pos) const { return cells_[pos]; }
  std::size_t total_samples() const noexcept { return total_; }

  std::optional<std::size_t> find(std::uint64_t linear) const;
  std::optional<std::size_t> find(const CellIndex& cell) const;

  /// Number of samples whose coordinate on `axis` falls in each segment.
  std::vector<std::size_t> segment_counts(std::size_t axis) const;

 private:
  Grid grid_;
  std::vector<OccupiedCell> cells_;
  std::size_t total_;
};

/// Throws OutOfSupportError naming the first sample outside the grid.
WeightedPartition assign_weights(const SampleSet& samples, const Grid& grid);

enum class RefinePolicy { standard, longest_axis };

struct Refinement {
  Grid grid;
  /// parent_segment[axis][child] = segment of the coarse axis it came from.
  std::vector<std::vector<std::size_t>> parent_segment;
  /// No segment was eligible; `grid` equals the input.
  bool fixpoint = false;

  CellIndex parent_of(const CellIndex& child) const;
};

/// Bisects every segment holding more than `n_min` sample coordinates
/// (standard), or only the eligible segments of one axis (longest_axis): the
/// axis whose widest eligible segment is widest, lowest index on ties.
/// Degenerate axes are never split.
Refinement refine_grid(const Grid& grid, const WeightedPartition& partition, RefinePolicy policy,
                       std::size_t n_min);

}  // namespace gridot
