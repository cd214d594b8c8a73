#include "gridot/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "gridot/errors.hpp"
#include "gridot/io.hpp"

namespace gridot {

namespace {

constexpr double kRelativePadding = 1e-9;
constexpr double kDegenerateHalfWidth = 1e-9;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(std::string_view field, std::size_t row) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(row, "non-numeric field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

SampleSet::SampleSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw DomainError("sample dimension must be positive");
  if (coords_.empty()) throw DomainError("sample set is empty");
  if (coords_.size() % dim_ != 0) throw DomainError("coordinate count is not a multiple of dim");
}

SampleSet SampleSet::from_points(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw DomainError("sample set is empty");
  const std::size_t dim = points.front().size();
  std::vector<double> coords;
  coords.reserve(points.size() * dim);
  for (const auto& p : points) {
    if (p.size() != dim) throw DomainError("points have inconsistent dimension");
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return SampleSet(dim, std::move(coords));
}

SampleSet load_samples(std::istream& in, bool has_header) {
  std::vector<double> coords;
  std::size_t dim = 0;
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++row;
    if (has_header && row == 1) continue;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      coords.push_back(parse_field(text.substr(start, comma - start), row));
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (dim == 0) {
      dim = fields;
    } else if (fields != dim) {
      throw ParseError(row, "expected " + std::to_string(dim) + " fields, found " +
                                std::to_string(fields));
    }
  }
  if (dim == 0) throw ParseError(0, "no samples in input");
  return SampleSet(dim, std::move(coords));
}

SampleSet load_samples(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return load_samples(in, has_header);
  } catch (const ParseError& e) {
    throw ParseError(e.row(), path.string() + ": " + e.what());
  }
}

void write_samples(std::ostream& out, const SampleSet& samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto p = samples.point(i);
    for (std::size_t l = 0; l < p.size(); ++l) {
      if (l) out << ',';
      out << format_double(p[l]);
    }
    out << '\n';
  }
}

void write_samples(const std::filesystem::path& path, const SampleSet& samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_samples(out, samples);
}

std::optional<std::size_t> AxisPartition::segment_of(double x) const {
  if (!(x >= breakpoints.front()) || x > breakpoints.back()) return std::nullopt;
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const auto k = static_cast<std::size_t>(it - breakpoints.begin());
  return std::min(k - 1, segments() - 1);
}

Grid::Grid(std::vector<AxisPartition> partitions) : axes_(std::move(partitions)) {
  if (axes_.empty()) throw DomainError("grid needs at least one axis");
  strides_.assign(axes_.size(), 1);
  for (std::size_t l = axes_.size(); l-- > 0;) {
    const auto& a = axes_[l];
    if (a.breakpoints.size() < 2) throw DomainError("axis partition needs two breakpoints");
    for (std::size_t k = 1; k < a.breakpoints.size(); ++k) {
      if (!(a.breakpoints[k] > a.breakpoints[k - 1])) {
        throw DomainError("breakpoints must be strictly increasing");
      }
    }
    strides_[l] = cell_count_;
    const auto segs = static_cast<std::uint64_t>(a.segments());
    if (cell_count_ > std::numeric_limits<std::uint64_t>::max() / segs) {
      throw DomainError("grid has too many cells to index");
    }
    cell_count_ *= segs;
  }
}

std::uint64_t Grid::linear_index(const CellIndex& cell) const {
  std::uint64_t idx = 0;
  for (std::size_t l = 0; l < axes_.size(); ++l) idx += cell.coords[l] * strides_[l];
  return idx;
}

CellIndex Grid::cell_index(std::uint64_t linear) const {
  CellIndex cell;
  cell.coords.resize(axes_.size());
  for (std::size_t l = 0; l < axes_.size(); ++l) {
    cell.coords[l] = static_cast<std::size_t>(linear / strides_[l]);
    linear %= strides_[l];
  }
  return cell;
}

bool Grid::contains(const CellIndex& cell) const {
  if (cell.dim() != dim()) return false;
  for (std::size_t l = 0; l < dim(); ++l) {
    if (cell.coords[l] >= axes_[l].segments()) return false;
  }
  return true;
}

double Grid::cell_diameter(const CellIndex& cell) const {
  double sq = 0.0;
  for (std::size_t l = 0; l < dim(); ++l) {
    const double w = axes_[l].width(cell.coords[l]);
    sq += w * w;
  }
  return std::sqrt(sq);
}

Grid initial_grid(const SampleSet& samples) {
  std::vector<AxisPartition> axes;
  axes.reserve(samples.dim());
  for (std::size_t l = 0; l < samples.dim(); ++l) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      lo = std::min(lo, samples.coord(i, l));
      hi = std::max(hi, samples.coord(i, l));
    }
    AxisPartition axis;
    axis.axis = l;
    if (lo == hi) {
      const double half = kDegenerateHalfWidth * std::max(1.0, std::abs(lo));
      axis.breakpoints = {lo - half, lo + half};
      axis.degenerate = true;
    } else {
      const double pad = kRelativePadding * (hi - lo);
      double left = lo - pad;
      double right = hi + pad;
      if (!(left < lo)) left = std::nextafter(lo, -std::numeric_limits<double>::infinity());
      if (!(right > hi)) right = std::nextafter(hi, std::numeric_limits<double>::infinity());
      axis.breakpoints = {left, 0.5 * (left + right), right};
    }
    axes.push_back(std::move(axis));
  }
  return Grid(std::move(axes));
}

CellIndex locate(const Grid& grid, std::span<const double> point) {
  if (point.size() != grid.dim()) throw DomainError("point dimension does not match grid");
  CellIndex cell;
  cell.coords.resize(grid.dim());
  for (std::size_t l = 0; l < grid.dim(); ++l) {
    const auto k = grid.axis(l).segment_of(point[l]);
    if (!k) throw OutOfSupportError({}, "point outside grid support on axis " + std::to_string(l));
    cell.coords[l] = *k;
  }
  return cell;
}

std::vector<CellIndex> cell_neighbors(const Grid& grid, const CellIndex& cell) {
  const std::size_t d = grid.dim();
  std::vector<CellIndex> out;
  // Odometer over offsets {-1,0,1}^d.
  std::vector<int> offset(d, -1);
  while (true) {
    bool valid = true;
    bool self = true;
    CellIndex n;
    n.coords.resize(d);
    for (std::size_t l = 0; l < d; ++l) {
      const auto c = static_cast<long long>(cell.coords[l]) + offset[l];
      if (c < 0 || c >= static_cast<long long>(grid.axis(l).segments())) {
        valid = false;
        break;
      }
      n.coords[l] = static_cast<std::size_t>(c);
      self = self && offset[l] == 0;
    }
    if (valid && !self) out.push_back(std::move(n));
    std::size_t l = d;
    while (l > 0 && offset[l - 1] == 1) offset[--l] = -1;
    if (l == 0) break;
    ++offset[l - 1];
  }
  return out;
}

WeightedPartition::WeightedPartition(Grid grid, std::vector<OccupiedCell> cells, std::size_t total)
    : grid_(std::move(grid)), cells_(std::move(cells)), total_(total) {}

std::optional<std::size_t> WeightedPartition::find(std::uint64_t linear) const {
  const auto it = std::lower_bound(cells_.begin(), cells_.end(), linear,
                                   [](const OccupiedCell& c, std::uint64_t v) { return c.linear < v; });
  if (it == cells_.end() || it->linear != linear) return std::nullopt;
  return static_cast<std::size_t>(it - cells_.begin());
}

std::optional<std::size_t> WeightedPartition::find(const CellIndex& cell) const {
  if (!grid_.contains(cell)) return std::nullopt;
  return find(grid_.linear_index(cell));
}

std::vector<std::size_t> WeightedPartition::segment_counts(std::size_t axis) const {
  std::vector<std::size_t> counts(grid_.axis(axis).segments(), 0);
  for (const auto& c : cells_) counts[c.index.coords[axis]] += c.members.size();
  return counts;
}

WeightedPartition assign_weights(const SampleSet& samples, const Grid& grid) {
  if (samples.dim() != grid.dim()) throw DomainError("sample dimension does not match grid");
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      keyed[i] = {grid.linear_index(locate(grid, samples.point(i))), i};
    } catch (const OutOfSupportError&) {
      throw OutOfSupportError({i}, "sample " + std::to_string(i) + " lies outside the grid");
    }
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<OccupiedCell> cells;
  const double total = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < keyed.size();) {
    OccupiedCell cell;
    cell.linear = keyed[k].first;
    cell.index = grid.cell_index(cell.linear);
    while (k < keyed.size() && keyed[k].first == cell.linear) cell.members.push_back(keyed[k++].second);
    cell.weight = static_cast<double>(cell.members.size()) / total;
    cells.push_back(std::move(cell));
  }
  return WeightedPartition(grid, std::move(cells), samples.size());
}

CellIndex Refinement::parent_of(const CellIndex& child) const {
  CellIndex parent;
  parent.coords.resize(child.dim());
  for (std::size_t l = 0; l < child.dim(); ++l) parent.coords[l] = parent_segment[l][child.coords[l]];
  return parent;
}

Refinement refine_grid(const Grid& grid, const WeightedPartition& partition, RefinePolicy policy,
                       std::size_t n_min) {
  const std::size_t d = grid.dim();
  std::vector<std::vector<bool>> eligible(d);
  for (std::size_t l = 0; l < d; ++l) {
    const auto counts = partition.segment_counts(l);
    eligible[l].resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      eligible[l][k] = !grid.axis(l).degenerate && counts[k] > n_min;
    }
  }

  if (policy == RefinePolicy::longest_axis) {
    std::optional<std::size_t> chosen;
    double widest = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
      for (std::size_t k = 0; k < eligible[l].size(); ++k) {
        if (eligible[l][k] && (!chosen || grid.axis(l).width(k) > widest)) {
          chosen = l;
          widest = grid.axis(l).width(k);
        }
      }
    }
    for (std::size_t l = 0; l < d; ++l) {
      if (!chosen || l != *chosen) std::fill(eligible[l].begin(), eligible[l].end(), false);
    }
  }

  Refinement out{grid, std::vector<std::vector<std::size_t>>(d), true};
  std::vector<AxisPartition> axes;
  axes.reserve(d);
  for (std::size_t l = 0; l < d; ++l) {
    const auto& src = grid.axis(l);
    AxisPartition axis{l, {src.breakpoints.front()}, src.degenerate};
    for (std::size_t k = 0; k < src.segments(); ++k) {
      if (eligible[l][k]) {
        const double mid = 0.5 * (src.left(k) + src.right(k));
        // Segments too narrow to split in floating point stay whole.
        if (mid > src.left(k) && mid < src.right(k)) {
          axis.breakpoints.push_back(mid);
          out.parent_segment[l].push_back(k);
          out.fixpoint = false;
        }
      }
      axis.breakpoints.push_back(src.right(k));
      out.parent_segment[l].push_back(k);
    }
    axes.push_back(std::move(axis));
  }
  if (!out.fixpoint) out.grid = Grid(std::move(axes));
  return out;
}

}  // namespace gridot
