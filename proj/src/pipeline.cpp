#include "critperc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "critperc/errors.hpp"
#include "critperc/literature.hpp"
#include "critperc/rng.hpp"
#include "parallel.hpp"

namespace critperc {

void ExperimentConfig::validate() const {
  if (d < 2 || d > kMaxDim) throw ConfigError("dim must be between 2 and " + std::to_string(kMaxDim));
  if (n < 1 || n > 100) throw ConfigError("n must be between 1 and 100");
  if (p && !(*p >= 0.0 && *p <= 1.0)) throw ConfigError("p must lie in [0,1], got " + format_double(*p));
  if (!p && !literature_pc(d)) throw ConfigError("no default p for this dimension; pass p explicitly");
  if (n_samples < 1) throw ConfigError("samples must be >= 1");
  if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("tol must be a positive finite number");
  if (budget < 1) throw ConfigError("budget must be >= 1");
  if (boundary_samples < 1) throw ConfigError("boundary_samples must be >= 1");
  if (out_dir.empty()) throw ConfigError("out must not be empty");
}

double ExperimentConfig::effective_p() const { return p ? *p : literature_pc(d).value(); }

PercParams ExperimentConfig::params() const {
  PercParams pp;
  pp.p = effective_p();
  pp.d = d;
  pp.seed = seed;
  pp.n_samples = n_samples;
  pp.workers = workers;
  return pp;
}

json to_json(const ExperimentConfig& c, bool with_workers) {
  json j = {{"d", c.d},
            {"n", c.n},
            {"p", c.p ? json(*c.p) : json(nullptr)},
            {"n_samples", c.n_samples},
            {"seed", c.seed},
            {"tol", c.tol},
            {"budget", c.budget},
            {"out_dir", c.out_dir},
            {"oracle", to_string(c.oracle)},
            {"boundary_samples", c.boundary_samples}};
  if (with_workers) j["workers"] = c.workers;
  return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"d", "n", "p", "n_samples", "seed", "tol", "budget",
                                           "out_dir", "oracle", "workers", "boundary_samples"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  try {
    if (j.contains("d")) base.d = j.at("d").get<int>();
    if (j.contains("n")) base.n = j.at("n").get<int>();
    if (j.contains("p")) base.p = j.at("p").is_null() ? std::nullopt : std::optional<double>(j.at("p").get<double>());
    if (j.contains("n_samples")) base.n_samples = j.at("n_samples").get<std::uint64_t>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) base.tol = j.at("tol").get<double>();
    if (j.contains("budget")) base.budget = j.at("budget").get<std::uint64_t>();
    if (j.contains("out_dir")) base.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("oracle")) base.oracle = method_from_string(j.at("oracle").get<std::string>());
    if (j.contains("workers")) base.workers = j.at("workers").get<unsigned>();
    if (j.contains("boundary_samples")) base.boundary_samples = j.at("boundary_samples").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, base);
}

json error_record(const std::string& stage, const std::string& type, const std::string& message) {
  return {{"status", "error"}, {"stage", stage}, {"type", type}, {"message", message}};
}

namespace {

constexpr std::uint64_t kGoodSetStream = 1;
constexpr std::uint64_t kDirectStream = 2;

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ (0x9e3779b97f4a7c15ull * stream));
}

Site abs_site(const Site& v) {
  Site a = v;
  for (int i = 0; i < v.dim(); ++i) a[i] = std::abs(v[i]);
  return a;
}

Site round_site(const Point& y) {
  Site s(y.dim);
  for (int i = 0; i < y.dim; ++i) s[i] = static_cast<int>(std::lround(y[i]));
  return s;
}

// mirrors a decomposition of |x| onto x
Decomposition reflect_to(const Decomposition& dec, const Site& x) {
  Decomposition out = dec;
  for (int i = 0; i < x.dim(); ++i) {
    if (x[i] >= 0) continue;
    for (auto& z : out.z) z[i] = -z[i];
    for (auto& s : out.partial_sums) s[i] = -s[i];
    out.x[i] = -out.x[i];
    out.residual[i] = -out.residual[i];
  }
  return out;
}

template <class Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig config) : cfg_(std::move(config)) { cfg_.validate(); }

std::vector<Classification> Pipeline::good_set() {
  if (!good_) {
    good_ = run_stage("goodset", [&] {
      PercParams pp = cfg_.params();
      pp.seed = stage_seed(cfg_.seed, kGoodSetStream);
      return classify_all(cfg_.n, pp, cfg_.oracle);
    });
  }
  return *good_;
}

const GrowthTrace& Pipeline::trace() {
  if (!trace_) trace_ = run_stage("grow", [&] { return grow_gamma(cfg_.n, cfg_.params(), cfg_.oracle); });
  return *trace_;
}

const GoodPath& Pipeline::good_path() {
  if (!path_) {
    const GrowthTrace& t = trace();
    path_ = run_stage("curves", [&] { return extract_good_path(t); });
  }
  return *path_;
}

const GMap& Pipeline::gmap() {
  if (!gmap_) {
    const GoodPath& gp = good_path();
    gmap_.emplace(run_stage("curves", [&] { return GMap(build_curves(gp, cfg_.n), cfg_.n); }));
  }
  return *gmap_;
}

const BoundaryReport& Pipeline::boundary() {
  if (!boundary_) {
    const GMap& g = gmap();
    boundary_ = run_stage("boundary", [&] { return check_boundary_conditions(g, cfg_.boundary_samples, cfg_.seed); });
    if (!boundary_->ok()) throw StageError("boundary", "g violates the face conditions");
  }
  return *boundary_;
}

const FacePreservationReport& Pipeline::face_preservation() {
  if (!faces_) {
    const GMap& g = gmap();
    faces_ = run_stage("boundary", [&] {
      return face_preservation_check(clamp_map(normalized_map(g)), cfg_.d, cfg_.boundary_samples, cfg_.seed);
    });
    if (!faces_->ok()) throw StageError("boundary", "clamped g/n does not preserve the cube boundary");
  }
  return *faces_;
}

std::vector<PreimageResult> Pipeline::preimages(const std::vector<Point>& targets) {
  const GMap& g = gmap();
  boundary();
  return run_stage("preimage", [&] { return find_preimages(g, targets, cfg_.tol, cfg_.budget, cfg_.workers); });
}

const std::vector<PreimageResult>& Pipeline::preimages() {
  if (!preimages_) {
    preimages_ = preimages(lattice_targets(cfg_.d, cfg_.n));
    for (const auto& r : *preimages_)
      if (!r.found())
        throw StageError("preimage", "target " + r.target.to_string() + ": " + to_string(r.status) + " after " +
                                         std::to_string(r.nodes) + " nodes");
  }
  return *preimages_;
}

EstimatorResult Pipeline::good_probability(const Site& z) {
  good_set();
  return (*good_)[Box::lambda(cfg_.d, cfg_.n).index_of(z)].probability;
}

void Pipeline::ensure_direct() {
  if (!direct_.empty()) return;
  const Box outer = Box::lambda(cfg_.d, 4 * cfg_.n);
  const Box inner = Box::lambda(cfg_.d, cfg_.n);
  direct_.assign(outer.size(), EstimatorResult{});
  direct_box_.assign(outer.size(), outer);
  run_stage("chain", [&] {
    if (cfg_.oracle == Method::MonteCarlo) {
      PercParams pp = cfg_.params();
      pp.seed = stage_seed(cfg_.seed, kDirectStream);
      direct_ = estimate_connections_from(pp, outer, Site(cfg_.d));
    } else {
      // one evaluation per orbit of the signed permutations fixing the origin
      std::map<Site, std::vector<Site>> orbits;
      for (const Site& x : inner.sites()) {
        const Site a = abs_site(x);
        std::vector<int> c;
        for (int i = 0; i < a.dim(); ++i) c.push_back(a[i]);
        std::sort(c.begin(), c.end(), std::greater<>());
        orbits[Site::from_span(c)].push_back(x);
      }
      std::vector<std::pair<Site, std::vector<Site>>> work(orbits.begin(), orbits.end());
      std::vector<BoxedExact> values(work.size());
      detail::parallel_count(work.size(), cfg_.workers, 0, [&](std::uint64_t b, std::uint64_t e, auto&) {
        for (std::uint64_t k = b; k < e; ++k)
          values[k] = exact_connection_lower(cfg_.effective_p(), outer, Site(cfg_.d), work[k].first);
      });
      for (std::size_t k = 0; k < work.size(); ++k)
        for (const Site& x : work[k].second) {
          direct_[outer.index_of(x)] = exact_result(values[k].value);
          direct_box_[outer.index_of(x)] = values[k].box;
        }
    }
    return 0;
  });
}

const std::vector<ChainRow>& Pipeline::chain() {
  if (chain_) return *chain_;
  const GMap& g = gmap();
  const auto& pre = preimages();
  ensure_direct();
  good_set();
  const int d = cfg_.d, n = cfg_.n;
  const double p = cfg_.effective_p();
  const Box inner = Box::lambda(d, n), outer = Box::lambda(d, 4 * n);
  const auto targets = lattice_targets(d, n);

  chain_ = run_stage("chain", [&] {
    std::vector<ChainRow> rows;
    for (const Site& x : inner.sites()) {
      const Site a = abs_site(x);
      std::size_t k = 0;
      while (round_site(targets[k]) != a) ++k;
      const Decomposition dec = reflect_to(g.decompose(pre[k].t), x);

      ChainRow row;
      row.x = x;
      row.n = n;
      row.p = p;
      row.certificate = chain_events(x, dec, n);
      std::vector<double> measured;
      for (const Site& z : dec.z) {
        const auto r = good_probability(z);
        measured.push_back(r.is_exact() ? r.estimate : r.ci_low);
      }
      row.bound = chain_lower_bound(row.certificate, p, &measured);
      row.direct = direct_[outer.index_of(x)];
      row.direct_box = direct_box_[outer.index_of(x)];
      row.verdict = verify_bound(row.direct, row.bound.value);
      row.explicit_verdict = verify_bound(row.direct, row.bound.explicit_form);
      rows.push_back(std::move(row));
    }
    return rows;
  });
  return *chain_;
}

json Pipeline::summary() {
  const auto& rows = chain();
  const auto& pre = preimages();
  const auto& bnd = boundary();
  const auto& fp = face_preservation();
  const GoodPath& gp = good_path();
  const GrowthTrace& tr = trace();
  const int d = cfg_.d;

  return run_stage("report", [&] {
    json j;
    j["config"] = to_json(cfg_, false);
    j["p"] = cfg_.effective_p();
    j["p_source"] = cfg_.p ? "user" : "literature";

    j["growth"] = {{"steps", tr.steps.size()}, {"gamma_size", tr.final_gamma.size()},
                   {"terminal", to_json(tr.terminal)}, {"face", gp.face}, {"path_length", gp.path.size()}};

    double worst = std::numeric_limits<double>::infinity();
    for (const auto& f : bnd.faces) worst = std::min(worst, f.worst_margin);
    j["boundary"] = {{"ok", bnd.ok()}, {"worst_margin", worst}, {"face_preservation_ok", fp.ok()}};

    std::size_t found = 0;
    std::uint64_t total_nodes = 0, max_nodes = 0;
    double max_err = 0.0;
    for (const auto& r : pre) {
      found += r.found();
      total_nodes += r.nodes;
      max_nodes = std::max(max_nodes, r.nodes);
      max_err = std::max(max_err, r.error);
    }
    j["preimages"] = {{"targets", pre.size()}, {"found", found}, {"max_error", max_err},
                      {"max_nodes", max_nodes}, {"total_nodes", total_nodes}, {"tol", cfg_.tol}};

    std::size_t pass = 0, explicit_pass = 0, contained = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> measurements;
    for (const auto& r : rows) {
      pass += r.verdict.pass;
      explicit_pass += r.explicit_verdict.pass;
      contained += r.certificate.contained;
      min_margin = std::min(min_margin, r.verdict.margin);
      if (!r.x.is_origin()) measurements.emplace_back(r.x.linf(), r.verdict.direct);
    }
    j["chain"] = {{"rows", rows.size()},
                  {"pass", pass},
                  {"fail", rows.size() - pass},
                  {"explicit_pass", explicit_pass},
                  {"contained", contained},
                  {"small_n", 2 * cfg_.n <= d},
                  {"min_margin", min_margin},
                  {"direct_box_radius", rows.empty() ? 0 : rows.front().direct_box.radius()}};

    json exps = json::array();
    for (int k = 2; k <= std::max(4, d); ++k) exps.push_back(to_json(compare_exponents(k)));
    j["exponents"] = exps;
    j["explicit_constant"] = explicit_constant(d, cfg_.effective_p());
    j["best_constant"] = best_constant(measurements, d);
    std::set<double> norms;
    for (const auto& m : measurements)
      if (m.second > 0) norms.insert(m.first);
    if (norms.size() >= 3) {
      const auto fit = exponent_fit(measurements);
      j["exponent_fit"] = to_json(fit);
      j["exponent_fit"]["consistent"] = fit.consistent_with(d);
    } else {
      j["exponent_fit"] = {{"skipped", "needs three distinct norms with positive probability (n >= 3)"}};
    }
    return j;
  });
}

namespace {

std::vector<GEval> grid_evaluations(const GMap& g, int per_axis) {
  const int d = g.dim();
  std::vector<GEval> out;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Point t(d);
    for (int j = 0; j < d; ++j) t[j] = static_cast<double>(idx[static_cast<std::size_t>(j)]) / (per_axis - 1);
    out.push_back(g.eval(t));
    int j = d - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == per_axis - 1) idx[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace

PipelineOutcome run_pipeline(const ExperimentConfig& cfg) {
  PipelineOutcome out;
  std::string stage = "validate";
  auto write = [&](const std::string& name, const std::string& content) {
    const std::string path = (std::filesystem::path(cfg.out_dir) / name).string();
    write_file(path, content);
    out.files.push_back(path);
  };
  try {
    cfg.validate();
    stage = "write";
    std::filesystem::create_directories(cfg.out_dir);
    write("config.json", dump(to_json(cfg, false)));

    Pipeline pl(cfg);
    stage = "grow";
    write("trace.json", dump(to_json(pl.trace())));
    stage = "curves";
    write("curves.json", dump({{"good_path", to_json(pl.good_path())}, {"curves", to_json(pl.gmap().curves())}}));
    write("gmap.csv", g_eval_csv(grid_evaluations(pl.gmap(), cfg.d <= 3 ? 9 : 3)));
    stage = "boundary";
    write("boundary.json", dump({{"conditions", to_json(pl.boundary())}, {"face_preservation", to_json(pl.face_preservation())}}));
    stage = "preimage";
    write("preimages.csv", preimage_csv(pl.preimages()));
    stage = "goodset";
    write("goodset.csv", classification_csv(pl.good_set()));
    stage = "chain";
    json certs = json::array();
    for (const auto& r : pl.chain()) certs.push_back(to_json(r.certificate, r.bound));
    write("certificates.json", dump(certs));
    write("chain.csv", chain_csv(pl.chain()));
    stage = "report";
    write("summary.json", dump(pl.summary()));
    out.ok = true;
  } catch (const StageError& e) {
    out.stage = e.stage();
    out.error = e.what();
  } catch (const ConfigError& e) {
    out.stage = "validate";
    out.error = e.what();
  } catch (const std::exception& e) {
    out.stage = stage;
    out.error = e.what();
  }
  if (!out.ok) {
    try {
      std::filesystem::create_directories(cfg.out_dir);
      write("error.json", dump(error_record(out.stage, out.stage == "validate" ? "invalid_config" : "stage_failure", out.error)));
    } catch (const std::exception&) {
      // the record still goes to stderr through the caller
    }
  }
  return out;
}

}  // namespace critperc
