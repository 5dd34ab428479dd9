#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "critperc/pipeline.hpp"

using namespace critperc;

namespace {

struct Flags {
  ExperimentConfig cfg;
  double p = 0.0;
  std::string oracle = "mc";
  std::string config_path;
};

struct Options {
  CLI::Option* p = nullptr;
  CLI::Option* out = nullptr;
};

Options add_common(CLI::App* sub, Flags& f) {
  Options o;
  sub->add_option("--dim", f.cfg.d, "lattice dimension d")->capture_default_str();
  sub->add_option("--n", f.cfg.n, "box radius n")->capture_default_str();
  o.p = sub->add_option("--p", f.p, "site occupation probability (default: literature p_c for d)");
  sub->add_option("--samples", f.cfg.n_samples, "Monte Carlo samples per estimate")->capture_default_str();
  sub->add_option("--seed", f.cfg.seed, "random seed")->capture_default_str();
  sub->add_option("--tol", f.cfg.tol, "preimage tolerance in sup norm")->capture_default_str();
  sub->add_option("--budget", f.cfg.budget, "branch-and-bound node budget")->capture_default_str();
  o.out = sub->add_option("--out", f.cfg.out_dir, "output directory")->capture_default_str();
  sub->add_option("--oracle", f.oracle, "probability oracle")->check(CLI::IsMember({"exact", "mc"}))->capture_default_str();
  sub->add_option("--workers", f.cfg.workers, "worker threads (0: all cores)")->capture_default_str();
  sub->add_option("--boundary-samples", f.cfg.boundary_samples, "random samples per face")->capture_default_str();
  sub->add_option("--config", f.config_path, "JSON config file; its fields override flags");
  return o;
}

ExperimentConfig resolve(Flags& f, const Options& o) {
  ExperimentConfig cfg = f.cfg;
  if (o.p->count()) cfg.p = f.p;
  cfg.oracle = method_from_string(f.oracle);
  if (!f.config_path.empty()) cfg = load_config(f.config_path, cfg);
  cfg.validate();
  return cfg;
}

// stdout unless --out was given (on the command line or in the config file)
void emit(const ExperimentConfig& cfg, bool to_dir, const std::string& name, const std::string& content) {
  if (!to_dir) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / name).string();
  write_file(path, content);
  std::cout << path << "\n";
}

int fail(const std::string& stage, const std::string& type, const std::string& message, int code) {
  std::cerr << error_record(stage, type, message).dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical site percolation: good-vertex growth, curve map, preimages and chain bounds"};
  app.require_subcommand(1);

  Flags f;
  std::vector<std::pair<CLI::App*, Options>> subs;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    subs.emplace_back(s, add_common(s, f));
    return s;
  };

  std::string x_str, y_str = "", targets_path;
  std::vector<std::string> t_strs;
  int radius = -1, grid = 5;

  auto* estimate = sub("estimate", "P(x <-> y in a box) by Monte Carlo or exact enumeration");
  estimate->add_option("--x", x_str, "first site, e.g. 1,1")->required();
  estimate->add_option("--y", y_str, "second site (default: origin)");
  estimate->add_option("--radius", radius, "box radius (default: n)");
  sub("goodset", "classify every vertex of Λ(n)");
  sub("grow", "greedy growth trace as JSON");
  auto* gmap = sub("gmap", "evaluate g on a grid or at given points");
  gmap->add_option("--t", t_strs, "evaluation point, e.g. 0.5,0.25 (repeatable)");
  gmap->add_option("--grid", grid, "grid points per axis when no --t is given")->check(CLI::Range(2, 1000));
  auto* preimage = sub("preimage", "find preimages of lattice targets or of a CSV of targets");
  preimage->add_option("--targets", targets_path, "CSV file with one target per line");
  sub("chain", "chain certificates and bound verdicts for every x in Λ(n)");
  sub("report", "summary JSON with exponent table and fitted constants");
  sub("all", "run the full pipeline and write every artifact into --out");

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  const Options* opts = nullptr;
  for (const auto& [s, o] : subs)
    if (s == chosen) opts = &o;

  ExperimentConfig cfg;
  try {
    cfg = resolve(f, *opts);
  } catch (const std::invalid_argument& e) {
    return fail("validate", "invalid_config", e.what(), 2);
  }
  const bool to_dir = opts->out->count() > 0 || !f.config_path.empty();
  const std::string name = chosen->get_name();

  try {
    if (name == "all") {
      const auto outcome = run_pipeline(cfg);
      for (const auto& file : outcome.files) std::cout << file << "\n";
      if (!outcome.ok) return fail(outcome.stage, "stage_failure", outcome.error, 1);
      return 0;
    }
    if (name == "estimate") {
      const int d = cfg.d;
      const Site x = parse_site(x_str, d);
      const Site y = y_str.empty() ? Site(d) : parse_site(y_str, d);
      const Box box = Box::lambda(d, radius >= 0 ? radius : cfg.n);
      const PercParams pp = cfg.params();
      EstimatorResult r;
      if (cfg.oracle == Method::Exact) {
        const auto e = exact_connection_lower(pp.p, box, x, y);
        if (!e.full) throw std::invalid_argument("box too large for the exact oracle");
        r = exact_result(e.value);
      } else {
        r = estimate_connection(pp, box, x, y);
      }
      emit(cfg, to_dir, "estimate.csv", estimate_csv_header() + "\n" + estimate_csv_row(pp, box, x, y, r) + "\n");
      return 0;
    }

    Pipeline pl(cfg);
    if (name == "goodset") {
      emit(cfg, to_dir, "goodset.csv", classification_csv(pl.good_set()));
    } else if (name == "grow") {
      emit(cfg, to_dir, "trace.json", dump(to_json(pl.trace())));
    } else if (name == "gmap") {
      const GMap& g = pl.gmap();
      std::vector<GEval> rows;
      if (!t_strs.empty()) {
        for (const auto& s : t_strs) rows.push_back(g.eval(parse_point(s, cfg.d)));
      } else {
        std::vector<int> idx(static_cast<std::size_t>(cfg.d), 0);
        while (true) {
          Point t(cfg.d);
          for (int j = 0; j < cfg.d; ++j) t[j] = static_cast<double>(idx[static_cast<std::size_t>(j)]) / (grid - 1);
          rows.push_back(g.eval(t));
          int j = cfg.d - 1;
          while (j >= 0 && idx[static_cast<std::size_t>(j)] == grid - 1) idx[static_cast<std::size_t>(j--)] = 0;
          if (j < 0) break;
          ++idx[static_cast<std::size_t>(j)];
        }
      }
      emit(cfg, to_dir, "gmap.csv", g_eval_csv(rows));
    } else if (name == "preimage") {
      if (targets_path.empty()) {
        emit(cfg, to_dir, "preimages.csv", preimage_csv(pl.preimages()));
      } else {
        std::ifstream in(targets_path);
        if (!in) throw std::invalid_argument("cannot read targets file " + targets_path);
        const auto res = pl.preimages(read_targets_csv(in, cfg.d));
        emit(cfg, to_dir, "preimages.csv", preimage_csv(res));
        for (const auto& r : res)
          if (!r.found()) return fail("preimage", "stage_failure", "target " + r.target.to_string() + ": " + to_string(r.status), 1);
      }
    } else if (name == "chain") {
      emit(cfg, to_dir, "chain.csv", chain_csv(pl.chain()));
    } else if (name == "report") {
      emit(cfg, to_dir, "summary.json", dump(pl.summary()));
    }
  } catch (const StageError& e) {
    return fail(e.stage(), "stage_failure", e.what(), 1);
  } catch (const std::invalid_argument& e) {
    return fail(name, "invalid_input", e.what(), 2);
  } catch (const std::exception& e) {
    return fail(name, "stage_failure", e.what(), 1);
  }
  return 0;
}
