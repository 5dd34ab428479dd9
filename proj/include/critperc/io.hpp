#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "critperc/chain_bound.hpp"
#include "critperc/curve_map.hpp"
#include "critperc/good_set.hpp"
#include "critperc/percolation.hpp"
#include "critperc/preimage.hpp"

namespace critperc {

using nlohmann::json;

/// Shortest text that reads back to the same double.
std::string format_double(double x);

json to_json(const Site& v);
json to_json(const Point& v);
json to_json(const Box& b);
json to_json(const EstimatorResult& r);
json to_json(const GrowthTrace& t);
json to_json(const GoodPath& p);
json to_json(const std::vector<Curve>& curves);
json to_json(const BoundaryReport& r);
json to_json(const FacePreservationReport& r);
json to_json(const ChainCertificate& c, const ChainBound& b);
json to_json(const ExponentTable& t);
json to_json(const ExponentFit& f);

Site site_from_json(const json& j);
Point point_from_json(const json& j);
EstimatorResult estimator_from_json(const json& j);
GrowthTrace trace_from_json(const json& j);
std::vector<Curve> curves_from_json(const json& j);

/// "1,-2,0" or "1 -2 0"
Site parse_site(const std::string& s, int d);
Point parse_point(const std::string& s, int d);

std::string classification_csv(const std::vector<Classification>& rows);
std::string g_eval_csv(const std::vector<GEval>& rows);
std::string preimage_csv(const std::vector<PreimageResult>& rows);

/// One target per line with d comma-separated coordinates. Blank lines,
/// lines starting with '#', and a non-numeric header line are skipped.
std::vector<Point> read_targets_csv(std::istream& in, int d);

struct ChainRow {
  Site x;
  int n = 0;
  double p = 0.0;
  EstimatorResult direct;
  Box direct_box;   // box the direct value was computed in
  ChainCertificate certificate;
  ChainBound bound;
  BoundVerdict verdict;          // direct against bound.value
  BoundVerdict explicit_verdict; // direct against bound.explicit_form
};

std::string chain_csv(const std::vector<ChainRow>& rows);

/// Writes `content` to `path` (binary mode, so LF stays LF).
void write_file(const std::string& path, const std::string& content);
std::string dump(const json& j);

}  // namespace critperc
