#include "critperc/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace critperc {

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

json to_json(const Site& v) {
  json j = json::array();
  for (int i = 0; i < v.dim(); ++i) j.push_back(v[i]);
  return j;
}

json to_json(const Point& v) {
  json j = json::array();
  for (int i = 0; i < v.dim; ++i) j.push_back(v[i]);
  return j;
}

json to_json(const Box& b) { return {{"center", to_json(b.center())}, {"radius", b.radius()}}; }

json to_json(const EstimatorResult& r) {
  return {{"estimate", r.estimate}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high},
          {"n_samples", r.n_samples}, {"hits", r.hits}};
}

json to_json(const GrowthTrace& t) {
  json steps = json::array();
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    steps.push_back({{"step", k},
                     {"gamma_hash", s.gamma_hash},
                     {"gamma_size", s.gamma_size},
                     {"boundary_size", s.boundary_size},
                     {"candidates", s.candidates},
                     {"chosen", to_json(s.chosen)},
                     {"estimate", to_json(s.estimate)},
                     {"seed", s.seed}});
  }
  json gamma = json::array();
  for (const Site& v : t.final_gamma) gamma.push_back(to_json(v));
  return {{"n", t.n},         {"d", t.d},
          {"p", t.p},         {"method", to_string(t.method)},
          {"seed", t.seed},   {"n_samples", t.n_samples},
          {"steps", steps},   {"final_gamma", gamma},
          {"terminal", to_json(t.terminal)}};
}

namespace {

json path_json(const LatticePath& p) {
  json j = json::array();
  for (const Site& v : p.vertices()) j.push_back(to_json(v));
  return j;
}

}  // namespace

json to_json(const GoodPath& p) { return {{"face", p.face}, {"path", path_json(p.path)}, {"raw", path_json(p.raw)}}; }

json to_json(const std::vector<Curve>& curves) {
  json j = json::array();
  for (std::size_t k = 0; k < curves.size(); ++k)
    j.push_back({{"axis", k}, {"steps", curves[k].steps()}, {"vertices", path_json(LatticePath(curves[k].vertices()))}});
  return j;
}

json to_json(const BoundaryReport& r) {
  json faces = json::array();
  for (const auto& f : r.faces) {
    json viol = json::array();
    for (const Point& t : f.violations) viol.push_back(to_json(t));
    faces.push_back({{"axis", f.axis}, {"side", f.side}, {"worst_margin", f.worst_margin},
                     {"worst_t", to_json(f.worst_t)}, {"violations", viol}});
  }
  return {{"ok", r.ok()}, {"evaluations", r.evaluations}, {"faces", faces}};
}

json to_json(const FacePreservationReport& r) {
  return {{"ok", r.ok()},
          {"samples", r.samples},
          {"off_boundary", r.off_boundary},
          {"antipodal_hits", r.antipodal_hits},
          {"min_antipodal_distance", r.min_antipodal_distance}};
}

json to_json(const ChainCertificate& c, const ChainBound& b) {
  json events = json::array();
  for (const auto& e : c.events)
    events.push_back({{"source", to_json(e.source)}, {"target", to_json(e.target)}, {"box", to_json(e.box)},
                      {"final", e.final_step}});
  json z = json::array();
  for (const Site& v : c.dec.z) z.push_back(to_json(v));
  return {{"x", to_json(c.x)},
          {"n", c.n},
          {"t", to_json(c.dec.t)},
          {"s", to_json(c.dec.s)},
          {"z", z},
          {"residual", to_json(c.dec.residual)},
          {"events", events},
          {"small_n", c.small_n},
          {"contained", c.contained},
          {"final_length", c.final_length},
          {"bound",
           {{"chain", b.chain},
            {"steps", b.steps},
            {"final_factor", b.final_factor},
            {"half_dim_final", b.half_dim_final},
            {"small_n_value", b.small_n_value},
            {"value", b.value},
            {"explicit_form", b.explicit_form}}}};
}

json to_json(const ExponentTable& t) {
  return {{"d", t.d}, {"cerf", t.cerf}, {"adapted", t.adapted}, {"this_work", t.this_work}};
}

json to_json(const ExponentFit& f) {
  return {{"exponent", f.exponent}, {"intercept", f.intercept}, {"residuals", f.residuals},
          {"used", f.used},         {"excluded", f.excluded},   {"warnings", f.warnings}};
}

Site site_from_json(const json& j) {
  std::vector<int> c = j.get<std::vector<int>>();
  return Site::from_span(c);
}

Point point_from_json(const json& j) {
  const auto c = j.get<std::vector<double>>();
  if (c.empty() || c.size() > kMaxDim) throw std::invalid_argument("point dimension out of range");
  Point p(static_cast<int>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) p[static_cast<int>(i)] = c[i];
  return p;
}

EstimatorResult estimator_from_json(const json& j) {
  EstimatorResult r;
  r.estimate = j.at("estimate").get<double>();
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  r.n_samples = j.at("n_samples").get<std::uint64_t>();
  r.hits = j.at("hits").get<std::uint64_t>();
  return r;
}

GrowthTrace trace_from_json(const json& j) {
  GrowthTrace t;
  t.n = j.at("n").get<int>();
  t.d = j.at("d").get<int>();
  t.p = j.at("p").get<double>();
  t.method = method_from_string(j.at("method").get<std::string>());
  t.seed = j.at("seed").get<std::uint64_t>();
  t.n_samples = j.at("n_samples").get<std::uint64_t>();
  for (const auto& s : j.at("steps")) {
    GrowthStep g;
    g.gamma_hash = s.at("gamma_hash").get<std::uint64_t>();
    g.gamma_size = s.at("gamma_size").get<std::size_t>();
    g.boundary_size = s.at("boundary_size").get<std::size_t>();
    g.candidates = s.at("candidates").get<std::size_t>();
    g.chosen = site_from_json(s.at("chosen"));
    g.estimate = estimator_from_json(s.at("estimate"));
    g.seed = s.at("seed").get<std::uint64_t>();
    t.steps.push_back(g);
  }
  std::vector<Site> gamma;
  for (const auto& v : j.at("final_gamma")) gamma.push_back(site_from_json(v));
  t.final_gamma = make_site_set(std::move(gamma));
  t.terminal = site_from_json(j.at("terminal"));
  return t;
}

std::vector<Curve> curves_from_json(const json& j) {
  std::vector<Curve> out;
  for (const auto& c : j) {
    std::vector<Site> vs;
    for (const auto& v : c.at("vertices")) vs.push_back(site_from_json(v));
    out.emplace_back(LatticePath(std::move(vs)));
  }
  return out;
}

namespace {

std::vector<std::string> split_coords(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != '(' && ch != ')' && ch != '\r') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <class T>
T parse_number(const std::string& tok) {
  T v{};
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) throw std::invalid_argument("not a number: '" + tok + "'");
  return v;
}

}  // namespace

Site parse_site(const std::string& s, int d) {
  const auto toks = split_coords(s);
  if (static_cast<int>(toks.size()) != d)
    throw std::invalid_argument("expected " + std::to_string(d) + " coordinates in '" + s + "'");
  Site v(d);
  for (int i = 0; i < d; ++i) v[i] = parse_number<int>(toks[static_cast<std::size_t>(i)]);
  return v;
}

Point parse_point(const std::string& s, int d) {
  const auto toks = split_coords(s);
  if (static_cast<int>(toks.size()) != d)
    throw std::invalid_argument("expected " + std::to_string(d) + " coordinates in '" + s + "'");
  Point v(d);
  for (int i = 0; i < d; ++i) v[i] = parse_number<double>(toks[static_cast<std::size_t>(i)]);
  return v;
}

namespace {

std::string join_site(const Site& v) {
  std::string s;
  for (int i = 0; i < v.dim(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

std::string join_point(const Point& v) {
  std::string s;
  for (int i = 0; i < v.dim; ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

}  // namespace

std::string classification_csv(const std::vector<Classification>& rows) {
  std::string out = "v,label,estimate,ci_low,ci_high,n_samples\n";
  for (const auto& r : rows)
    out += join_site(r.v) + "," + to_string(r.label) + "," + format_double(r.probability.estimate) + "," +
           format_double(r.probability.ci_low) + "," + format_double(r.probability.ci_high) + "," +
           std::to_string(r.probability.n_samples) + "\n";
  return out;
}

std::string g_eval_csv(const std::vector<GEval>& rows) {
  std::string out = "t,g,signs\n";
  for (const auto& r : rows) {
    const int d = r.t.dim;
    std::string signs;
    for (int i = 0; i < d; ++i) {
      if (i) signs += ";";
      for (int j = 0; j < d; ++j) signs += r.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0 ? '+' : '-';
    }
    out += join_point(r.t) + "," + join_point(r.value) + "," + signs + "\n";
  }
  return out;
}

std::string preimage_csv(const std::vector<PreimageResult>& rows) {
  std::string out = "y,t,error,nodes,status\n";
  for (const auto& r : rows)
    out += join_point(r.target) + "," + join_point(r.t) + "," + format_double(r.error) + "," +
           std::to_string(r.nodes) + "," + to_string(r.status) + "\n";
  return out;
}

std::vector<Point> read_targets_csv(std::istream& in, int d) {
  std::vector<Point> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const bool header_candidate = first;
    first = false;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    try {
      out.push_back(parse_point(line, d));
    } catch (const std::invalid_argument&) {
      if (header_candidate) continue;
      throw;
    }
  }
  return out;
}

std::string chain_csv(const std::vector<ChainRow>& rows) {
  std::string out = "x,n,p,direct,direct_box_radius,chain,value,explicit_form,margin,verdict,explicit_verdict\n";
  for (const auto& r : rows)
    out += join_site(r.x) + "," + std::to_string(r.n) + "," + format_double(r.p) + "," + format_double(r.verdict.direct) +
           "," + std::to_string(r.direct_box.radius()) + "," + format_double(r.bound.chain) + "," +
           format_double(r.bound.value) + "," + format_double(r.bound.explicit_form) + "," +
           format_double(r.verdict.margin) + "," + (r.verdict.pass ? "PASS" : "FAIL") + "," +
           (r.explicit_verdict.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace critperc
