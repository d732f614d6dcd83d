#include "nsclust/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "toml.hpp"

#include "nsclust/dataset.hpp"
#include "nsclust/errors.hpp"
#include "nsclust/evaluation.hpp"
#include "nsclust/labeling.hpp"
#include "nsclust/optimizer.hpp"
#include "nsclust/svg.hpp"

namespace nsclust {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Raised for bad flag or config values; maps to the usage exit code.
struct UsageError : Error {
  using Error::Error;
};

// Every setting is optional so that a config file and flags can be layered.
struct Settings {
  std::optional<int> k;
  std::optional<double> eps;
  std::optional<double> eps_quantile;
  std::optional<int> tr;
  std::optional<double> alpha;
  std::optional<double> fuzzifier;
  std::optional<double> boundary_t;
  std::optional<double> stop_eps;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> normalize;
  std::optional<std::string> label_col;
  std::optional<std::string> out_dir;
  std::optional<std::string> gen;
  std::optional<int> seeds;
  std::optional<double> jitter;
  std::optional<bool> binarize_labels;
  std::optional<bool> drop_constant;
  std::optional<bool> no_header;
  std::optional<bool> record_timing;
};

template <class T>
void overlay(std::optional<T>& base, const std::optional<T>& top) {
  if (top) base = top;
}

void overlay(Settings& base, const Settings& top) {
  overlay(base.k, top.k);
  overlay(base.eps, top.eps);
  overlay(base.eps_quantile, top.eps_quantile);
  overlay(base.tr, top.tr);
  overlay(base.alpha, top.alpha);
  overlay(base.fuzzifier, top.fuzzifier);
  overlay(base.boundary_t, top.boundary_t);
  overlay(base.stop_eps, top.stop_eps);
  overlay(base.max_iter, top.max_iter);
  overlay(base.seed, top.seed);
  overlay(base.normalize, top.normalize);
  overlay(base.label_col, top.label_col);
  overlay(base.out_dir, top.out_dir);
  overlay(base.gen, top.gen);
  overlay(base.seeds, top.seeds);
  overlay(base.jitter, top.jitter);
  overlay(base.binarize_labels, top.binarize_labels);
  overlay(base.drop_constant, top.drop_constant);
  overlay(base.no_header, top.no_header);
  overlay(base.record_timing, top.record_timing);
}

template <class T>
std::optional<T> toml_number(const toml::node& node, const std::string& key) {
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node.value<double>()) return *v;
  } else {
    if (auto v = node.value<std::int64_t>()) {
      if (*v < 0 && std::is_unsigned_v<T>) throw UsageError("config key '" + key + "' must be non-negative");
      return static_cast<T>(*v);
    }
  }
  throw UsageError("config key '" + key + "' has the wrong type");
}

std::string toml_string(const toml::node& node, const std::string& key) {
  if (auto v = node.value<std::string>()) return *v;
  throw UsageError("config key '" + key + "' must be a string");
}

bool toml_bool(const toml::node& node, const std::string& key) {
  if (auto v = node.value<bool>()) return *v;
  throw UsageError("config key '" + key + "' must be true or false");
}

Settings load_config(const std::string& path) {
  if (!fs::exists(path)) throw MissingFile(path);
  toml::table table;
  try {
    table = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "cannot parse config " << path << ": " << e.description() << " at line "
        << e.source().begin.line;
    throw UsageError(msg.str());
  }
  Settings s;
  for (const auto& [key_view, node] : table) {
    const std::string key(key_view.str());
    if (key == "k") s.k = toml_number<int>(node, key);
    else if (key == "eps") s.eps = toml_number<double>(node, key);
    else if (key == "eps_quantile") s.eps_quantile = toml_number<double>(node, key);
    else if (key == "tr") s.tr = toml_number<int>(node, key);
    else if (key == "alpha") s.alpha = toml_number<double>(node, key);
    else if (key == "fuzzifier") s.fuzzifier = toml_number<double>(node, key);
    else if (key == "boundary_t") s.boundary_t = toml_number<double>(node, key);
    else if (key == "stop_eps") s.stop_eps = toml_number<double>(node, key);
    else if (key == "max_iter") s.max_iter = toml_number<int>(node, key);
    else if (key == "seed") s.seed = toml_number<std::uint64_t>(node, key);
    else if (key == "normalize") s.normalize = toml_string(node, key);
    else if (key == "label_col") {
      if (auto idx = node.value<std::int64_t>()) s.label_col = std::to_string(*idx);
      else s.label_col = toml_string(node, key);
    }
    else if (key == "out_dir") s.out_dir = toml_string(node, key);
    else if (key == "gen") s.gen = toml_string(node, key);
    else if (key == "seeds") s.seeds = toml_number<int>(node, key);
    else if (key == "jitter") s.jitter = toml_number<double>(node, key);
    else if (key == "binarize_labels") s.binarize_labels = toml_bool(node, key);
    else if (key == "drop_constant") s.drop_constant = toml_bool(node, key);
    else if (key == "no_header") s.no_header = toml_bool(node, key);
    else if (key == "record_timing") s.record_timing = toml_bool(node, key);
    else throw UsageError("unknown config key '" + key + "' in " + path);
  }
  return s;
}

template <class T>
void add_value(CLI::App* app, const std::string& name, std::optional<T>& target,
               const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void add_switch(CLI::App* app, const std::string& name, std::optional<bool>& target,
                const std::string& help) {
  app->add_flag_function(name, [&target](std::int64_t count) { target = count > 0; }, help);
}

void add_algorithm_options(CLI::App* app, Settings& s) {
  add_value(app, "--k", s.k, "number of main clusters");
  add_value(app, "--eps", s.eps, "neighbourhood radius for the certainty estimate");
  add_value(app, "--eps-quantile", s.eps_quantile,
            "radius as a quantile of pairwise distances (default 0.1)");
  add_value(app, "--tr", s.tr, "neighbour count for full certainty (default 4)");
  add_value(app, "--alpha", s.alpha, "certainty of dense points (default 0.95)");
  add_value(app, "--fuzzifier", s.fuzzifier, "membership exponent m (default 2)");
  add_value(app, "--boundary-t", s.boundary_t, "boundary threshold t (default 0.4)");
  add_value(app, "--stop-eps", s.stop_eps, "stop when the cost changes by less (default 1e-6)");
  add_value(app, "--max-iter", s.max_iter, "iteration limit (default 300)");
  add_value(app, "--seed", s.seed, "random seed (default 0)");
  add_value(app, "--normalize", s.normalize, "none, minmax or zscore");
  add_value(app, "--label-col", s.label_col, "label column name or 0-based index");
  add_value(app, "--out-dir", s.out_dir, "output directory (default .)");
  add_switch(app, "--binarize-labels", s.binarize_labels,
             "map the smallest label to 0 and all others to 1");
  add_switch(app, "--drop-constant", s.drop_constant, "remove constant feature columns");
  add_switch(app, "--no-header", s.no_header, "input has no header row");
}

NsConfig make_ns_config(const Settings& s, int default_k, double default_stop_eps) {
  NsConfig cfg;
  cfg.k = s.k.value_or(default_k);
  cfg.fuzzifier = s.fuzzifier.value_or(cfg.fuzzifier);
  cfg.stop_eps = s.stop_eps.value_or(default_stop_eps);
  cfg.max_iter = s.max_iter.value_or(cfg.max_iter);
  cfg.seed = s.seed.value_or(0);
  cfg.boundary_t = s.boundary_t.value_or(cfg.boundary_t);
  if (s.eps && s.eps_quantile) throw UsageError("--eps and --eps-quantile are mutually exclusive");
  if (s.eps) cfg.certainty.eps_policy = EpsExplicit{*s.eps};
  if (s.eps_quantile) cfg.certainty.eps_policy = EpsQuantile{*s.eps_quantile};
  cfg.certainty.tr = s.tr.value_or(cfg.certainty.tr);
  cfg.certainty.alpha = s.alpha.value_or(cfg.certainty.alpha);
  try {
    cfg.validate();
  } catch (const InvalidConfig& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

json config_json(const NsConfig& cfg, NormalizationMode mode) {
  json c;
  c["k"] = cfg.k;
  c["fuzzifier"] = cfg.fuzzifier;
  c["stop_eps"] = cfg.stop_eps;
  c["max_iter"] = cfg.max_iter;
  c["dist_floor"] = cfg.dist_floor;
  c["noise_floor"] = cfg.noise_floor;
  c["seed"] = cfg.seed;
  c["boundary_t"] = cfg.boundary_t;
  c["normalize"] = to_string(mode);
  json cert;
  if (const auto* e = std::get_if<EpsExplicit>(&cfg.certainty.eps_policy)) {
    cert["eps_policy"] = "explicit";
    cert["eps"] = e->value;
  } else {
    cert["eps_policy"] = "quantile";
    cert["eps_quantile"] = std::get<EpsQuantile>(cfg.certainty.eps_policy).q;
  }
  cert["tr"] = cfg.certainty.tr;
  cert["alpha"] = cfg.certainty.alpha;
  c["certainty"] = cert;
  return c;
}

std::optional<ColumnRef> label_ref(const Settings& s) {
  if (!s.label_col) return std::nullopt;
  return ColumnRef{*s.label_col};
}

struct Prepared {
  DataSet ds;
  NormalizationMode mode;
  std::string source;
};

DataSet apply_transforms(DataSet ds, const Settings& s) {
  if (s.drop_constant.value_or(false)) ds = drop_constant_columns(ds);
  if (s.binarize_labels.value_or(false)) ds = binarize_labels(ds);
  return ds;
}

NormalizationMode normalization_of(const Settings& s, NormalizationMode fallback) {
  if (!s.normalize) return fallback;
  try {
    return parse_normalization(*s.normalize);
  } catch (const InvalidConfig& e) {
    throw UsageError(e.what());
  }
}

std::string format12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

fs::path output_dir(const Settings& s) {
  fs::path dir = s.out_dir.value_or(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw MissingFile(dir.string());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw MissingFile(path.string());
  f << text;
  if (!f) throw MissingFile(path.string());
}

int cmd_cluster(const Settings& s, const std::optional<std::string>& input, std::ostream& out) {
  if (input && s.gen) throw UsageError("give either an input file or --gen, not both");
  if (!input && !s.gen) throw UsageError("an input CSV or --gen <preset> is required");

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<DataSet> ds;
  NormalizationMode mode;
  int default_k = 2;
  double default_stop = 1e-6;
  std::string source;
  if (s.gen) {
    ScatterPreset preset;
    try {
      preset = preset_by_name(*s.gen);
    } catch (const InvalidSpec& e) {
      throw UsageError(e.what());
    }
    if (s.jitter) preset.spec.jitter = *s.jitter;
    ds = gen_scatter(preset.spec, preset.name);
    default_k = preset.k;
    default_stop = preset.stop_eps;
    mode = normalization_of(s, preset.normalization);
    source = "preset:" + preset.name;
  } else {
    ds = load_csv(*input, label_ref(s), !s.no_header.value_or(false));
    mode = normalization_of(s, NormalizationMode::MinMaxUnit);
    source = *input;
  }
  DataSet data = normalize(apply_transforms(*ds, s), mode);
  const NsConfig cfg = make_ns_config(s, default_k, default_stop);

  const NsState st = fit(data, cfg);
  const auto verdicts = classify_points(st, cfg.boundary_t);
  const auto k = static_cast<std::size_t>(cfg.k);

  const fs::path dir = output_dir(s);
  std::ostringstream csv;
  csv << "id";
  for (std::size_t j = 0; j < k; ++j) csv << ",T" << j + 1;
  csv << ",F,D,verdict\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    csv << i + 1;
    for (std::size_t j = 0; j < k; ++j) csv << ',' << format12(st.t_mem(i, j));
    csv << ',' << format12(st.f_mem[i]) << ',' << format12(st.certainty[i]) << ','
        << '"' << verdicts[i].to_string() << "\"\n";
  }
  write_text(dir / "memberships.csv", csv.str());

  json summary;
  summary["dataset"] = {{"name", data.name()},
                        {"source", source},
                        {"n", data.n()},
                        {"d", data.d()},
                        {"feature_names", data.feature_names()}};
  summary["config"] = config_json(cfg, mode);
  summary["seed"] = cfg.seed;
  summary["eps"] = st.eps;
  summary["converged"] = st.converged;
  summary["iterations"] = st.iterations;
  summary["frozen_centroid_events"] = st.frozen_centroid_events;
  summary["cost_history"] = st.cost_history;
  json centroids = json::array();
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = st.centroids.row(j);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  summary["centroids"] = centroids;
  std::map<std::string, int> counts{{"main", 0}, {"boundary", 0}, {"outlier", 0}};
  json points = json::array();
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto x = data.point(i);
    const auto t = st.t_mem.row(i);
    json p;
    p["id"] = i + 1;
    p["coords"] = std::vector<double>(x.begin(), x.end());
    p["T"] = std::vector<double>(t.begin(), t.end());
    p["F"] = st.f_mem[i];
    p["D"] = st.certainty[i];
    p["verdict"] = verdicts[i].to_string();
    if (data.has_labels()) p["label"] = (*data.labels())[i];
    points.push_back(p);
    switch (verdicts[i].kind) {
      case VerdictKind::Main: ++counts["main"]; break;
      case VerdictKind::Boundary: ++counts["boundary"]; break;
      case VerdictKind::Outlier: ++counts["outlier"]; break;
    }
  }
  summary["verdict_counts"] = {{"main", counts["main"]},
                               {"boundary", counts["boundary"]},
                               {"outlier", counts["outlier"]}};
  if (data.has_labels() && !s.gen) {
    summary["accuracy"] = accuracy(hard_labels(st), *data.labels()).accuracy;
  }
  summary["points"] = points;
  if (s.record_timing.value_or(false)) {
    const auto t1 = std::chrono::steady_clock::now();
    summary["wall_time_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  out << data.name() << ": n=" << data.n() << " d=" << data.d() << " k=" << cfg.k << ", "
      << (st.converged ? "converged" : "stopped at max_iter") << " after " << st.iterations
      << " iterations; main " << counts["main"] << ", boundary " << counts["boundary"]
      << ", outlier " << counts["outlier"] << "\n";
  out << "wrote " << (dir / "memberships.csv").string() << " and "
      << (dir / "summary.json").string() << "\n";
  return st.converged ? kExitOk : kExitNotConverged;
}

json method_json(const MethodSummary& m) {
  json runs = json::array();
  for (const auto& r : m.runs) {
    runs.push_back({{"seed", r.seed},
                    {"accuracy", r.accuracy},
                    {"iterations", r.iterations},
                    {"converged", r.converged}});
  }
  return {{"best", m.best}, {"mean", m.mean}, {"runs", runs}};
}

int cmd_eval(const Settings& s, const std::string& input, std::ostream& out) {
  if (!s.label_col) throw UsageError("label column required (--label-col)");
  const auto t0 = std::chrono::steady_clock::now();
  const DataSet raw = load_csv(input, label_ref(s), !s.no_header.value_or(false));
  const NormalizationMode mode = normalization_of(s, NormalizationMode::MinMaxUnit);
  const DataSet data = normalize(apply_transforms(raw, s), mode);
  const std::set<int> classes(data.labels()->begin(), data.labels()->end());
  const NsConfig cfg = make_ns_config(s, static_cast<int>(classes.size()), 1e-6);
  FcmConfig fcm;
  fcm.k = cfg.k;
  fcm.fuzzifier = cfg.fuzzifier;
  fcm.stop_eps = cfg.stop_eps;
  fcm.max_iter = cfg.max_iter;
  fcm.seed = cfg.seed;
  const int seeds = s.seeds.value_or(10);
  if (seeds < 1) throw UsageError("--seeds must be at least 1");

  const Comparison cmp = compare(data, cfg, fcm, seeds);

  json report;
  report["dataset"] = {{"name", data.name()},
                       {"source", input},
                       {"n", data.n()},
                       {"d", data.d()},
                       {"classes", classes.size()}};
  report["config"] = config_json(cfg, mode);
  report["seeds"] = seeds;
  report["proposed"] = method_json(cmp.proposed);
  report["fcm"] = method_json(cmp.fcm);
  if (s.record_timing.value_or(false)) {
    const auto t1 = std::chrono::steady_clock::now();
    report["wall_time_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  const fs::path dir = output_dir(s);
  write_text(dir / "comparison.json", report.dump(2) + "\n");

  char line[160];
  std::snprintf(line, sizeof(line), "%-10s best %.4f  mean %.4f\n", "proposed", cmp.proposed.best,
                cmp.proposed.mean);
  out << data.name() << ": n=" << data.n() << " d=" << data.d() << " k=" << cfg.k << ", "
      << seeds << " seeds, " << to_string(mode) << " normalization\n"
      << line;
  std::snprintf(line, sizeof(line), "%-10s best %.4f  mean %.4f\n", "fcm", cmp.fcm.best,
                cmp.fcm.mean);
  out << line << "wrote " << (dir / "comparison.json").string() << "\n";
  return kExitOk;
}

int cmd_gen(const Settings& s, const std::string& preset_name,
            const std::optional<std::string>& out_file, std::ostream& out) {
  ScatterPreset preset;
  try {
    preset = preset_by_name(preset_name);
  } catch (const InvalidSpec& e) {
    throw UsageError(e.what());
  }
  if (s.jitter) {
    if (*s.jitter < 0) throw UsageError("--jitter must be non-negative");
    preset.spec.jitter = *s.jitter;
  }
  preset.spec.seed = s.seed.value_or(0);
  const DataSet ds = gen_scatter(preset.spec, preset.name);
  const fs::path path = out_file ? fs::path(*out_file) : output_dir(s) / (preset.name + ".csv");
  write_csv(ds, path.string());
  out << "wrote " << ds.n() << " points (k=" << preset.k << ") to " << path.string() << "\n";
  return kExitOk;
}

PlotData plot_data_from(const json& summary) {
  PlotData data;
  data.title = summary.at("dataset").at("name").get<std::string>();
  for (const auto& c : summary.at("centroids")) data.centroids.push_back(c.get<std::vector<double>>());
  for (const auto& p : summary.at("points")) {
    PlotPoint pt;
    pt.coords = p.at("coords").get<std::vector<double>>();
    pt.t = p.at("T").get<std::vector<double>>();
    pt.f = p.at("F").get<double>();
    pt.verdict = p.at("verdict").get<std::string>();
    data.points.push_back(std::move(pt));
  }
  return data;
}

int cmd_plot(const std::string& summary_path, const std::optional<std::string>& out_file,
             bool bars_only, std::ostream& out) {
  std::ifstream in(summary_path);
  if (!in) throw MissingFile(summary_path);
  json summary;
  PlotData data;
  try {
    summary = json::parse(in);
    data = plot_data_from(summary);
  } catch (const json::exception& e) {
    throw ParseError(0, 0, "summary " + summary_path + " is not a cluster summary: " + e.what());
  }
  std::string svg;
  try {
    svg = render_svg(data, !bars_only);
  } catch (const ShapeMismatch& e) {
    throw UsageError(std::string(e.what()) + "; use --bars-only");
  }
  const fs::path path =
      out_file ? fs::path(*out_file) : fs::path(summary_path).replace_extension(".svg");
  write_text(path, svg);
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certainty-weighted fuzzy clustering with a noise cluster", "nsclust"};
  app.require_subcommand(1);

  Settings flags;
  std::optional<std::string> config_path;
  auto add_config = [&](CLI::App* sub) {
    add_value(sub, "--config", config_path, "TOML file with settings; flags take precedence");
  };

  std::optional<std::string> cluster_input;
  auto* cluster = app.add_subcommand("cluster", "cluster a CSV file or a generated preset");
  add_value(cluster, "input", cluster_input, "input CSV file");
  add_value(cluster, "--gen", flags.gen, "generated preset (x13, x37, x43) instead of a file");
  add_value(cluster, "--jitter", flags.jitter, "noise added to generated cluster points");
  add_switch(cluster, "--record-timing", flags.record_timing, "add wall_time_ms to the summary");
  add_algorithm_options(cluster, flags);
  add_config(cluster);

  std::string eval_input;
  auto* eval = app.add_subcommand("eval", "compare against fuzzy c-means on labelled data");
  eval->add_option("input", eval_input, "labelled CSV file")->required();
  add_value(eval, "--seeds", flags.seeds, "number of seeds per method (default 10)");
  add_switch(eval, "--record-timing", flags.record_timing, "add wall_time_ms to the report");
  add_algorithm_options(eval, flags);
  add_config(eval);

  std::string gen_name;
  std::optional<std::string> gen_out;
  auto* gen = app.add_subcommand("gen", "write a generated preset as CSV");
  gen->add_option("preset", gen_name, "x13, x37 or x43")->required();
  add_value(gen, "--out", gen_out, "output CSV path (default <out-dir>/<preset>.csv)");
  add_value(gen, "--jitter", flags.jitter, "noise added to cluster points");
  add_value(gen, "--seed", flags.seed, "random seed for the jitter");
  add_value(gen, "--out-dir", flags.out_dir, "output directory (default .)");
  add_config(gen);

  std::string plot_input;
  std::optional<std::string> plot_out;
  bool bars_only = false;
  auto* plot = app.add_subcommand("plot", "render a cluster summary as SVG");
  plot->add_option("summary", plot_input, "summary.json written by cluster")->required();
  add_value(plot, "--out", plot_out, "output SVG path (default: summary path with .svg)");
  plot->add_flag("--bars-only", bars_only, "only draw the membership bars");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Settings s;
    if (config_path) s = load_config(*config_path);
    overlay(s, flags);
    if (cluster->parsed()) return cmd_cluster(s, cluster_input, out);
    if (eval->parsed()) return cmd_eval(s, eval_input, out);
    if (gen->parsed()) return cmd_gen(s, gen_name, gen_out, out);
    return cmd_plot(plot_input, plot_out, bars_only, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MissingFile& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const EmptyDataset& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NonFinite& e) {
    err << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace nsclust
