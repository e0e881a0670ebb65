/* Copyright 2026 The latentprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "latentprobe/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "latentprobe/parallel.hpp"
#include "latentprobe/probe.hpp"
#include "latentprobe/raster_io.hpp"
#include "latentprobe/recon.hpp"

namespace latentprobe {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::vector<std::string> manifests;
  std::vector<std::string> fit_manifests;
  std::vector<std::string> eval_manifests;
  double tau = 0.4;
  double dp_tol = 0.5;
  RefineParams refine;
  std::string classifier = "mlc";
  std::vector<double> w = {0.0005, 0.005, 0.05, 0.1};
  std::string refine_mode = "none";
  std::vector<double> grid;
  std::string out = ".";
  int workers = 1;
};

/// A per-tile failure carrying a message that already names the tile.
struct TileFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

TileManifest load_all(const std::vector<std::string>& paths) {
  TileManifest all;
  for (const auto& p : paths) {
    auto m = load_manifest(p);
    all.insert(all.end(), m.begin(), m.end());
  }
  return all;
}

const fs::path& require(const TileEntry& tile, const fs::path& path, const char* key) {
  if (path.empty()) throw TileFailure(tile.name + ": manifest has no '" + key + "' entry");
  if (!fs::exists(path)) throw TileFailure(tile.name + ": missing file " + path.string());
  return path;
}

/// Grayscale PNGs are building masks; color PNGs go through the palette and
/// the building label becomes the mask.
BinaryMask load_building_truth(const fs::path& path) {
  if (png_has_color(path)) {
    return (load_label_png(path, ColorPalette::isprs()).array() == kBuildingLabel).cast<std::uint8_t>();
  }
  return load_mask_png(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// Runs fn on every tile through the worker pool. Results land by index;
/// failures are reported in tile order.
template <typename Result, typename Fn>
std::vector<std::optional<Result>> for_tiles(const TileManifest& tiles, int workers, std::ostream& err,
                                             bool& failed, Fn&& fn) {
  std::vector<std::optional<Result>> results(tiles.size());
  std::vector<std::string> errors(tiles.size());
  parallel_for(tiles.size(), workers, [&](std::size_t i) {
    try {
      results[i] = fn(tiles[i]);
    } catch (const TileFailure& e) {
      errors[i] = e.what();
    } catch (const std::exception& e) {
      errors[i] = tiles[i].name + ": " + e.what();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) {
      err << "error: " << e << '\n';
      failed = true;
    }
  }
  return results;
}

int cmd_recon(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto tiles = load_all(config.manifests);
  ReconParams params;
  params.tau = config.tau;
  params.dp_tolerance = config.dp_tol;
  params.refine = config.refine;
  const fs::path dir = config.out;
  fs::create_directories(dir);

  bool failed = false;
  const auto reports = for_tiles<ReconstructionReport>(
      tiles, resolve_workers(config.workers), err, failed, [&](const TileEntry& t) {
        const auto prob = load_probability(require(t, t.probability, "probability"));
        const auto truth = load_building_truth(require(t, t.labels, "labels"));
        return reconstruction_analysis(prob, truth, params);
      });

  std::ostringstream csv;
  csv << "tile,tau,iou_pixel_cls,iou_pixel_recon,iou_bldg_cls,iou_bldg_recon,tp,fp,fn\n";
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (!reports[i]) continue;
    const auto& r = *reports[i];
    csv << tiles[i].name << ',' << num(config.tau, 4) << ',' << num(r.classification.per_pixel_iou) << ','
        << num(r.reconstruction.per_pixel_iou) << ',' << num(r.classification.per_building_iou) << ','
        << num(r.reconstruction.per_building_iou) << ',' << r.reconstruction.tp << ','
        << r.reconstruction.fp << ',' << r.reconstruction.fn << '\n';
    save_mask_png(r.reconstructed, dir / (tiles[i].name + "_recon.png"));
  }
  write_text(dir / "recon.csv", csv.str());
  out << "wrote " << (dir / "recon.csv").string() << '\n';
  return failed ? kExitTileFailure : 0;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto tiles = load_all(config.manifests);
  const std::vector<double> taus = config.grid.empty() ? default_tau_grid() : config.grid;
  const fs::path dir = config.out;
  fs::create_directories(dir);

  bool failed = false;
  const auto sweeps = for_tiles<std::vector<SweepPoint>>(
      tiles, resolve_workers(config.workers), err, failed, [&](const TileEntry& t) {
        const auto prob = load_probability(require(t, t.probability, "probability"));
        const auto truth = load_building_truth(require(t, t.labels, "labels"));
        return threshold_sweep(prob, truth, taus);
      });

  std::ostringstream csv;
  csv << "tile,tau,iou\n";
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (!sweeps[i]) continue;
    for (const auto& pt : *sweeps[i]) csv << tiles[i].name << ',' << num(pt.tau, 4) << ',' << num(pt.iou) << '\n';
  }
  write_text(dir / "sweep.csv", csv.str());
  out << "wrote " << (dir / "sweep.csv").string() << '\n';
  return failed ? kExitTileFailure : 0;
}

ProbeTile load_probe_tile(const TileEntry& t, bool for_eval, double tau) {
  ProbeTile tile{t.name, load_activations(require(t, t.activations, "activations")), {},
                 load_label_png(require(t, t.labels, "labels"), ColorPalette::isprs()), {}};
  if (for_eval) {
    tile.se = load_se_weights(require(t, t.se_weights, "se_weights"));
    tile.building = threshold(load_probability(require(t, t.probability, "probability")), tau);
  }
  return tile;
}

/// Loads fit and eval tiles; a failure on any tile is reported and nullopt
/// returned.
std::optional<std::pair<std::vector<ProbeTile>, std::vector<ProbeTile>>> load_probe_sets(
    const RunConfig& config, std::ostream& err) {
  bool failed = false;
  const int workers = resolve_workers(config.workers);
  auto load = [&](const std::vector<std::string>& manifests, bool eval) {
    const auto entries = load_all(manifests);
    auto loaded = for_tiles<ProbeTile>(entries, workers, err, failed,
                                       [&](const TileEntry& t) { return load_probe_tile(t, eval, config.tau); });
    std::vector<ProbeTile> tiles;
    for (auto& t : loaded) {
      if (t) tiles.push_back(std::move(*t));
    }
    return tiles;
  };
  auto fit = load(config.fit_manifests, false);
  auto eval = load(config.eval_manifests, true);
  if (failed) return std::nullopt;
  return std::make_pair(std::move(fit), std::move(eval));
}

ProbeOptions probe_options(const RunConfig& config) {
  ProbeOptions o;
  o.refine = config.refine_mode == "multilabel";
  o.refine_params = config.refine;
  o.workers = resolve_workers(config.workers);
  return o;
}

std::string f1_csv(const EvalReport& r, const std::vector<std::string>& names) {
  std::ostringstream csv;
  csv << "class,precision,recall,f1\n";
  for (std::size_t l = 0; l < names.size(); ++l) {
    csv << names[l] << ',' << num(r.precision(l)) << ',' << num(r.recall(l)) << ',' << num(r.f1(l)) << '\n';
  }
  return csv.str();
}

std::string confusion_csv(const EvalReport& r, const std::vector<std::string>& names) {
  std::ostringstream csv;
  csv << "truth\\pred";
  for (const auto& n : names) csv << ',' << n;
  csv << '\n';
  for (std::size_t g = 0; g < names.size(); ++g) {
    csv << names[g];
    for (std::size_t p = 0; p < names.size(); ++p) csv << ',' << r.confusion(g, p);
    csv << '\n';
  }
  return csv.str();
}

int cmd_probe(const RunConfig& config, std::ostream& out, std::ostream& err) {
  ProbeOptions options = probe_options(config);
  if (config.classifier == "map-mrf") {
    if (config.w.size() != 1) {
      err << "error: probe with --classifier map-mrf takes exactly one --w value\n";
      return kExitTileFailure;
    }
    options.classifier = Classifier::kMapMrf;
    options.w = config.w.front();
  }
  const auto sets = load_probe_sets(config, err);
  if (!sets) return kExitTileFailure;
  const auto palette = ColorPalette::isprs();
  const fs::path dir = config.out;
  fs::create_directories(dir);

  const ClassPDFTable table = fit_probe(sets->first, palette.names(), options.fit);
  table.save(dir / "pdf_table.json");
  bool failed = false;
  for (const auto& tile : sets->second) {
    try {
      const ProbeOutput o = run_probe(table, tile, options);
      save_label_png(o.subclassification, palette, dir / (o.name + "_sub.png"));
      save_label_png(o.overlay, palette, dir / (o.name + "_overlay.png"));
      write_text(dir / (o.name + "_f1.csv"), f1_csv(o.report, table.names()));
      write_text(dir / (o.name + "_confusion.csv"), confusion_csv(o.report, table.names()));
      out << o.name << ": accuracy " << num(o.report.accuracy, 4) << '\n';
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      failed = true;
    }
  }
  return failed ? kExitTileFailure : 0;
}

int cmd_ablate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto sets = load_probe_sets(config, err);
  if (!sets) return kExitTileFailure;
  const auto palette = ColorPalette::isprs();
  const fs::path dir = config.out;
  fs::create_directories(dir);
  const ClassPDFTable table = fit_probe(sets->first, palette.names(), {});
  const auto& eval = sets->second;
  if (eval.empty()) throw std::runtime_error("ablation needs at least one eval tile");

  struct Row {
    std::string method;
    std::optional<double> w;
  };
  std::vector<Row> rows = {{"mlc", std::nullopt}};
  for (double w : config.w) rows.push_back({"map-mrf", w});

  std::ostringstream csv;
  csv << "method,w";
  for (const auto& n : table.names()) csv << ",f1_" << n;
  csv << '\n';
  out << "method,w,compute_time_s\n";
  for (const auto& row : rows) {
    ProbeOptions options = probe_options(config);
    if (row.w) {
      options.classifier = Classifier::kMapMrf;
      options.w = *row.w;
    }
    Eigen::VectorXd f1 = Eigen::VectorXd::Zero(table.labels());
    const auto start = std::chrono::steady_clock::now();
    for (const auto& tile : eval) f1 += run_probe(table, tile, options).report.f1;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    f1 /= static_cast<double>(eval.size());

    const std::string w = row.w ? num(*row.w, 6) : "";
    csv << row.method << ',' << w;
    for (Eigen::Index l = 0; l < f1.size(); ++l) csv << ',' << num(f1(l));
    csv << '\n';
    out << row.method << ',' << w << ',' << num(elapsed.count(), 3) << '\n';
  }
  write_text(dir / "ablation.csv", csv.str());
  out << "wrote " << (dir / "ablation.csv").string() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Building reconstruction accuracy and latent-knowledge probing.", "latentprobe"};
  app.require_subcommand(1);
  RunConfig config;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", config.out, "Output directory")->capture_default_str();
    cmd->add_option("--workers", config.workers, "Worker threads (LATENTPROBE_WORKERS overrides)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };
  auto add_refine = [&](CLI::App* cmd) {
    cmd->add_option("--data-cost", config.refine.data_cost, "MRF data cost")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--smooth-cost", config.refine.smooth_cost, "MRF smoothness cost")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_flag("--literal-smoothness", config.refine.literal_smoothness,
                  "Charge smoothness only where the observed labels agree");
  };
  auto add_tau = [&](CLI::App* cmd) {
    cmd->add_option("--tau", config.tau, "Building probability threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  };

  auto* recon = app.add_subcommand("recon", "Classification vs reconstruction accuracy per tile");
  recon->add_option("--manifest", config.manifests, "Tile manifest (repeatable)")->required();
  add_tau(recon);
  recon->add_option("--dp-tol", config.dp_tol, "Douglas-Peucker tolerance in pixels")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_refine(recon);
  add_common(recon);

  auto* sweep = app.add_subcommand("sweep", "Per-pixel IoU over a threshold grid");
  sweep->add_option("--manifest", config.manifests, "Tile manifest (repeatable)")->required();
  sweep->add_option("--grid", config.grid, "Comma-separated thresholds (default 0.05..0.95 step 0.05)")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  add_common(sweep);

  auto add_probe_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--fit-manifest", config.fit_manifests, "Manifest of PDF fitting tiles (repeatable)")
        ->required();
    cmd->add_option("--eval-manifest", config.eval_manifests, "Manifest of evaluation tiles (repeatable)")
        ->required();
    cmd->add_option("--w", config.w, "MAP-MRF pairwise weight(s), comma-separated")
        ->delimiter(',')
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--refine", config.refine_mode, "Multi-label refinement of the sub-classification")
        ->check(CLI::IsMember({"none", "multilabel"}))
        ->capture_default_str();
    add_tau(cmd);
    add_refine(cmd);
    add_common(cmd);
  };
  auto* probe = app.add_subcommand("probe", "Sub-classify the non-building label from activations");
  probe->add_option("--classifier", config.classifier, "Per-map classifier")
      ->check(CLI::IsMember({"mlc", "map-mrf"}))
      ->capture_default_str();
  add_probe_inputs(probe);
  auto* ablate = app.add_subcommand("ablate", "MLC baseline against MAP-MRF over the --w grid");
  add_probe_inputs(ablate);

  std::vector<std::string> argv_store = {"latentprobe"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (ablate->parsed() && config.w.empty()) {
    err << "error: --w grid is empty\n";
    return kExitTileFailure;
  }

  try {
    if (recon->parsed()) return cmd_recon(config, out, err);
    if (sweep->parsed()) return cmd_sweep(config, out, err);
    if (probe->parsed()) return cmd_probe(config, out, err);
    return cmd_ablate(config, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitTileFailure;
  }
}

}  // namespace latentprobe
