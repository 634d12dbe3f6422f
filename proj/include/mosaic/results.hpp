#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mosaic/box.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/mdp.hpp"
#include "mosaic/rtree.hpp"

namespace mosaic {

enum class RegionVerdict { safe, unsafe, precision_limited };

inline const char* verdict_name(RegionVerdict v) {
  switch (v) {
    case RegionVerdict::safe:
      return "safe";
    case RegionVerdict::unsafe:
      return "unsafe";
    case RegionVerdict::precision_limited:
      return "precision_limited";
  }
  return "?";
}

// One initial subregion with its failure-probability upper bound. safe iff
// the bound is strictly below p_safe; otherwise the region is unsafe while
// still splittable and precision_limited once below the split precision.
struct RegionResult {
  Box box;
  double upper_bound = 0.0;
  RegionVerdict verdict = RegionVerdict::safe;
  int generation = 0;
};

inline RegionVerdict classify_region(double upper_bound, double max_width, double p_safe,
                                     double eps) {
  if (upper_bound < p_safe) return RegionVerdict::safe;
  return max_width < eps ? RegionVerdict::precision_limited : RegionVerdict::unsafe;
}

// Initial states proven safe: regions whose bound is strictly below p_safe.
inline std::vector<Box> safe_set(const std::vector<RegionResult>& results, double p_safe) {
  std::vector<Box> out;
  for (const RegionResult& r : results)
    if (r.upper_bound < p_safe) out.push_back(r.box);
  return out;
}

// Largest upper bound among regions meeting the query. The query must be
// fully covered by analyzed regions; anything sticking out is unknown space
// and an error, not a silent 0.
inline double worst_case(const std::vector<RegionResult>& results, const Box& query) {
  if (results.empty()) fail(errc::uncovered, "results", "no analyzed regions");
  if (query.size() != results.front().box.size())
    fail(errc::dim_mismatch, "results",
         "query dimension " + std::to_string(query.size()) + " does not match regions");
  RTree<std::size_t> tree(query.size());
  for (std::size_t i = 0; i < results.size(); ++i) tree.insert(results[i].box, i);
  if (!tree.coverage_gaps(query).empty())
    fail(errc::uncovered, "results", "query extends beyond the analyzed initial regions");
  double best = 0.0;
  bool any = false;
  tree.visit_window(query, [&](const RTree<std::size_t>::Entry& e) {
    // Face-only touches do not count: a region contributes only where it
    // overlaps the query with positive width in every non-degenerate query
    // dimension, so a query equal to one region reports that region alone.
    const Box& b = results[e.value].box;
    for (std::size_t d = 0; d < query.size(); ++d) {
      const double lo = std::max(query[d].lo, b[d].lo);
      const double hi = std::min(query[d].hi, b[d].hi);
      if (!(hi > lo) && !query[d].degenerate()) return;
    }
    best = std::max(best, results[e.value].upper_bound);
    any = true;
  });
  if (!any) fail(errc::uncovered, "results", "query meets no analyzed region");
  return best;
}

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  double volume = 0.0;
};

// Region volume grouped by upper bound. Bins are left-closed right-open,
// the last bin closed; edges must be strictly increasing and cover [0, 1].
inline std::vector<HistogramBin> volume_histogram(const std::vector<RegionResult>& results,
                                                  const std::vector<double>& edges) {
  if (edges.size() < 2) fail(errc::bad_bins, "results", "need at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i - 1] < edges[i]))
      fail(errc::bad_bins, "results", "bin edges must be strictly increasing");
  if (edges.front() > 0.0 || edges.back() < 1.0)
    fail(errc::bad_bins, "results", "bin edges must cover [0, 1]");
  std::vector<HistogramBin> bins(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) bins[i] = {edges[i], edges[i + 1], 0.0};
  for (const RegionResult& r : results) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), r.upper_bound);
    std::size_t idx = static_cast<std::size_t>(it - edges.begin());
    idx = idx == 0 ? 0 : idx - 1;                          // left-closed
    if (idx >= bins.size()) idx = bins.size() - 1;         // last bin closed
    bins[idx].volume += r.box.volume();
  }
  return bins;
}

inline void export_regions_csv(const std::vector<RegionResult>& results, std::ostream& out) {
  if (results.empty()) {
    out << "upper_bound,verdict,generation\n";
    return;
  }
  const std::size_t dim = results.front().box.size();
  for (std::size_t d = 0; d < dim; ++d) out << "dim" << d << "_lo,dim" << d << "_hi,";
  out << "upper_bound,verdict,generation\n";
  for (const RegionResult& r : results) {
    for (std::size_t d = 0; d < dim; ++d)
      out << detail::fmt17(r.box[d].lo) << "," << detail::fmt17(r.box[d].hi) << ",";
    out << detail::fmt17(r.upper_bound) << "," << verdict_name(r.verdict) << ","
        << r.generation << "\n";
  }
}

inline void export_regions_csv(const std::vector<RegionResult>& results,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "results", "cannot open '" + path + "' for writing");
  export_regions_csv(results, out);
}

inline nlohmann::json regions_to_json(const std::vector<RegionResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RegionResult& r : results) {
    nlohmann::json jb = nlohmann::json::array();
    for (std::size_t d = 0; d < r.box.size(); ++d)
      jb.push_back({r.box[d].lo, r.box[d].hi});
    arr.push_back({{"box", std::move(jb)},
                   {"upper_bound", r.upper_bound},
                   {"verdict", verdict_name(r.verdict)},
                   {"generation", r.generation}});
  }
  return arr;
}

inline void export_regions_json(const std::vector<RegionResult>& results,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "results", "cannot open '" + path + "' for writing");
  out << regions_to_json(results).dump(2) << "\n";
}

// Heatmap of a 2-D region table: each region drawn in its native
// coordinates, colour linear in the bound from blue (0) to red (1).
inline void export_heatmap_svg(const std::vector<RegionResult>& results,
                               const std::string& path) {
  if (results.empty()) fail(errc::domain, "results", "no regions to draw");
  if (results.front().box.size() != 2)
    fail(errc::domain, "results", "heatmap export needs 2-D regions");
  Box hull = results.front().box;
  for (const RegionResult& r : results)
    for (std::size_t d = 0; d < 2; ++d) hull[d] = mosaic::hull(hull[d], r.box[d]);
  const double w = hull[0].width(), h = hull[1].width();
  if (!(w > 0.0) || !(h > 0.0))
    fail(errc::domain, "results", "degenerate region extent, nothing to draw");
  const double px_w = 800.0;
  const double px_h = px_w * h / w;
  const double sx = px_w / w, sy = px_h / h;
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "results", "cannot open '" + path + "' for writing");
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 ";
  std::snprintf(buf, sizeof(buf), "%.2f %.2f", px_w, px_h);
  out << buf << "\">\n";
  out << "<!-- axis 0 along x, axis 1 along y (up); fill colour is the failure-probability\n"
         "     upper bound on a linear scale: rgb(0,0,255) at 0 to rgb(255,0,0) at 1 -->\n";
  for (const RegionResult& r : results) {
    const double t = std::clamp(r.upper_bound, 0.0, 1.0);
    const int red = static_cast<int>(t * 255.0 + 0.5);
    const int blue = 255 - red;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" "
                  "fill=\"rgb(%d,0,%d)\" stroke=\"#333\" stroke-width=\"0.3\"/>\n",
                  (r.box[0].lo - hull[0].lo) * sx, (hull[1].hi - r.box[1].hi) * sy,
                  r.box[0].width() * sx, r.box[1].width() * sy, red, blue);
    out << buf;
  }
  out << "</svg>\n";
}

}  // namespace mosaic
