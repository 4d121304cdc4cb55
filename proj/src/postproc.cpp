#include "nucsynth/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace nucsynth {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

const Index kNeigh8[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                             {0, 1},   {1, -1}, {1, 0},  {1, 1}};
}  // namespace

BinaryMask binarize(const Image& img, std::optional<double> threshold) {
  const double t = threshold.value_or(img.range.midpoint());
  return img.values >= t;
}

BinaryMask fill_holes(const BinaryMask& mask, std::int64_t max_hole_area) {
  if (max_hole_area < 0) throw std::invalid_argument("max_hole_area must be non-negative");
  const Index rows = mask.rows();
  const Index cols = mask.cols();
  BinaryMask out = mask;
  Grid<std::int8_t> visited = Grid<std::int8_t>::Constant(rows, cols, 0);

  std::vector<std::pair<Index, Index>> component;
  std::vector<std::pair<Index, Index>> stack;
  for (Index sr = 0; sr < rows; ++sr) {
    for (Index sc = 0; sc < cols; ++sc) {
      if (mask(sr, sc) || visited(sr, sc)) continue;
      component.clear();
      stack.assign(1, {sr, sc});
      visited(sr, sc) = 1;
      bool touches_border = false;
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        component.emplace_back(r, c);
        if (r == 0 || c == 0 || r == rows - 1 || c == cols - 1) touches_border = true;
        const Index nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& n : nbr) {
          if (n[0] < 0 || n[1] < 0 || n[0] >= rows || n[1] >= cols) continue;
          if (mask(n[0], n[1]) || visited(n[0], n[1])) continue;
          visited(n[0], n[1]) = 1;
          stack.push_back({n[0], n[1]});
        }
      }
      if (!touches_border && static_cast<std::int64_t>(component.size()) <= max_hole_area)
        for (const auto& [r, c] : component) out(r, c) = true;
    }
  }
  return out;
}

namespace {

// 1D squared-distance lower envelope (parabola sweep) over one row of f.
// Infinite parabolas are skipped; an all-infinite row stays infinite.
void edt_pass_1d(const double* f, double* d, Index n, std::vector<Index>& v,
                 std::vector<double>& z) {
  Index k = -1;
  for (Index q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s;
    while (k >= 0) {
      const Index p = v[static_cast<std::size_t>(k)];
      s = (f[q] + static_cast<double>(q * q) - f[p] - static_cast<double>(p * p)) /
          (2.0 * static_cast<double>(q - p));
      if (s > z[static_cast<std::size_t>(k)]) break;
      --k;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
    } else {
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = s;
      z[static_cast<std::size_t>(k) + 1] = kInf;
    }
  }
  if (k < 0) {
    for (Index q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  Index j = 0;
  for (Index q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j) + 1] < static_cast<double>(q)) ++j;
    const Index p = v[static_cast<std::size_t>(j)];
    const double dq = static_cast<double>(q - p);
    d[q] = dq * dq + f[p];
  }
}

}  // namespace

Grid<double> squared_distance_transform(const BinaryMask& mask) {
  const Index rows = mask.rows();
  const Index cols = mask.cols();

  // column pass: distance to nearest background pixel within each column
  Grid<double> work(rows, cols);
  std::vector<Index> v(static_cast<std::size_t>(std::max(rows, cols)) + 1);
  std::vector<double> z(static_cast<std::size_t>(std::max(rows, cols)) + 2);
  std::vector<double> f(static_cast<std::size_t>(std::max(rows, cols)));
  std::vector<double> d(static_cast<std::size_t>(std::max(rows, cols)));

  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r)
      f[static_cast<std::size_t>(r)] = mask(r, c) ? kInf : 0.0;
    edt_pass_1d(f.data(), d.data(), rows, v, z);
    for (Index r = 0; r < rows; ++r) work(r, c) = d[static_cast<std::size_t>(r)];
  }
  // row pass over the column results
  Grid<double> sq(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) f[static_cast<std::size_t>(c)] = work(r, c);
    edt_pass_1d(f.data(), d.data(), cols, v, z);
    for (Index c = 0; c < cols; ++c) sq(r, c) = d[static_cast<std::size_t>(c)];
  }
  return sq;
}

DistanceMap distance_transform(const BinaryMask& mask) {
  return squared_distance_transform(mask).sqrt();
}

InstanceMask watershed_instances(const DistanceMap& dist, const BinaryMask& mask,
                                 double min_marker_distance, double min_marker_height) {
  const Index rows = mask.rows();
  const Index cols = mask.cols();
  if (dist.rows() != rows || dist.cols() != cols)
    throw std::invalid_argument("distance map shape does not match mask");

  auto in_bounds = [&](Index r, Index c) { return r >= 0 && c >= 0 && r < rows && c < cols; };

  // candidate markers: 8-neighborhood local maxima above the height floor
  struct Peak {
    double height;
    Index r, c;
  };
  std::vector<Peak> peaks;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      if (!mask(r, c) || dist(r, c) < min_marker_height) continue;
      bool is_max = true;
      for (const auto& n : kNeigh8) {
        const Index nr = r + n[0], nc = c + n[1];
        if (in_bounds(nr, nc) && dist(nr, nc) > dist(r, c)) {
          is_max = false;
          break;
        }
      }
      if (is_max) peaks.push_back({dist(r, c), r, c});
    }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.height != b.height) return a.height > b.height;
    if (a.r != b.r) return a.r < b.r;
    return a.c < b.c;
  });

  // thin: taller peaks claim their surroundings first
  std::vector<Peak> markers;
  const double min_sep_sq = min_marker_distance * min_marker_distance;
  for (const Peak& p : peaks) {
    bool clear = true;
    for (const Peak& m : markers) {
      const double dr = static_cast<double>(p.r - m.r);
      const double dc = static_cast<double>(p.c - m.c);
      if (dr * dr + dc * dc < min_sep_sq) {
        clear = false;
        break;
      }
    }
    if (clear) markers.push_back(p);
  }

  // every foreground component must keep at least one marker or it would
  // silently drop out of the labeling
  Grid<std::int32_t> component = Grid<std::int32_t>::Constant(rows, cols, 0);
  std::int32_t component_count = 0;
  {
    std::vector<std::pair<Index, Index>> stack;
    for (Index sr = 0; sr < rows; ++sr)
      for (Index sc = 0; sc < cols; ++sc) {
        if (!mask(sr, sc) || component(sr, sc) != 0) continue;
        ++component_count;
        component(sr, sc) = component_count;
        stack.assign(1, {sr, sc});
        while (!stack.empty()) {
          const auto [r, c] = stack.back();
          stack.pop_back();
          for (const auto& n : kNeigh8) {
            const Index nr = r + n[0], nc = c + n[1];
            if (!in_bounds(nr, nc) || !mask(nr, nc) || component(nr, nc) != 0) continue;
            component(nr, nc) = component_count;
            stack.push_back({nr, nc});
          }
        }
      }
  }
  std::vector<bool> has_marker(static_cast<std::size_t>(component_count) + 1, false);
  for (const Peak& m : markers) has_marker[static_cast<std::size_t>(component(m.r, m.c))] = true;
  std::vector<Peak> best(static_cast<std::size_t>(component_count) + 1,
                         Peak{-1.0, 0, 0});
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const std::int32_t comp = component(r, c);
      if (comp == 0 || has_marker[static_cast<std::size_t>(comp)]) continue;
      if (dist(r, c) > best[static_cast<std::size_t>(comp)].height)
        best[static_cast<std::size_t>(comp)] = {dist(r, c), r, c};
    }
  for (std::int32_t k = 1; k <= component_count; ++k)
    if (!has_marker[static_cast<std::size_t>(k)])
      markers.push_back(best[static_cast<std::size_t>(k)]);

  // priority flood, total order (height desc, row, col)
  Grid<std::int32_t> labels = Grid<std::int32_t>::Constant(rows, cols, 0);
  struct Entry {
    double height;
    Index r, c;
  };
  auto later = [](const Entry& a, const Entry& b) {
    if (a.height != b.height) return a.height < b.height;
    if (a.r != b.r) return a.r > b.r;
    return a.c > b.c;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> queue(later);
  std::int32_t next_label = 0;
  for (const Peak& m : markers) {
    labels(m.r, m.c) = ++next_label;
    queue.push({m.height, m.r, m.c});
  }
  while (!queue.empty()) {
    const Entry e = queue.top();
    queue.pop();
    const std::int32_t label = labels(e.r, e.c);
    for (const auto& n : kNeigh8) {
      const Index nr = e.r + n[0], nc = e.c + n[1];
      if (!in_bounds(nr, nc) || !mask(nr, nc) || labels(nr, nc) != 0) continue;
      labels(nr, nc) = label;
      queue.push({dist(nr, nc), nr, nc});
    }
  }
  return InstanceMask(std::move(labels));
}

}  // namespace nucsynth
