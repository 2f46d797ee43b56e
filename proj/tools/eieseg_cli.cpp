/* Copyright 2026 The eieseg Authors. All Rights Reserved.

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

// eieseg command-line driver.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or format error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eieseg/eieseg.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace eieseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) { return format_double(v); }

void print_config(const CLI::App& sub) {
  std::cout << "# " << sub.get_name() << " configuration\n";
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "--help-all") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? " " : "") + res[i];
    } else {
      value = opt->get_default_str();
    }
    if (opt->get_items_expected_max() == 0) value = opt->count() > 0 ? "true" : "false";
    std::cout << "#   " << opt->get_name() << " = " << value << '\n';
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  detail::write_file_bytes(path.string(), text);
}

// ---------------------------------------------------------------- energy

struct EnergyArgs {
  std::string pred, gt, csv;
  double alpha = 1.0;
  bool logits = false;
};

int cmd_energy(const EnergyArgs& a) {
  if (!(a.alpha > 0.0) || !std::isfinite(a.alpha)) throw UsageError("--alpha must be > 0");
  const TensorStack pred_raw = read_tensor(a.pred);
  const TensorStack gt_raw = read_tensor(a.gt);
  if (pred_raw.classes() != gt_raw.classes() || !pred_raw[0].same_shape(gt_raw[0])) {
    throw DimensionError("pred and gt dims differ");
  }
  const LabelStack gt(gt_raw.channels());
  std::vector<Field2D> prob;
  if (a.logits) {
    prob = softmax(LogitStack(pred_raw.channels())).channels();
  } else {
    prob = pred_raw.channels();
  }

  std::ostringstream csv;
  csv << "class,energy,self_pred,self_gt,interaction\n";
  double total = 0.0;
  for (std::size_t c = 0; c < prob.size(); ++c) {
    const double e = eie_energy(combined_field(prob[c], gt.layers()[c], a.alpha));
    const EnergyParts parts = energy_decompose(scaled(prob[c], a.alpha), gt.layers()[c]);
    total += e;
    std::cout << "class " << c << ": energy=" << fmt(e) << " self_pred=" << fmt(parts.self_pred)
              << " self_gt=" << fmt(parts.self_gt) << " interaction=" << fmt(parts.interaction) << '\n';
    csv << c << ',' << fmt(e) << ',' << fmt(parts.self_pred) << ',' << fmt(parts.self_gt) << ','
        << fmt(parts.interaction) << '\n';
  }
  std::cout << "total energy=" << fmt(total) << '\n';
  csv << "total," << fmt(total) << ",,,\n";
  if (!a.csv.empty()) write_text(a.csv, csv.str());
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::size_t h = 8, w = 8, classes = 3;
  std::uint64_t seed = 42;
  double eps = 1e-6;
};

constexpr double kGradcheckTolerance = 1e-5;

struct CheckResult {
  double rel_error = 0.0;
  std::size_t worst = 0;  // flat index of the largest absolute deviation
};

CheckResult compare(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  CheckResult r;
  double max_diff = -1.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = std::abs(analytic[i] - numeric[i]);
    if (d > max_diff) {
      max_diff = d;
      r.worst = i;
    }
    scale = std::max(scale, std::abs(numeric[i]));
  }
  r.rel_error = scale == 0.0 ? max_diff : max_diff / scale;
  return r;
}

int cmd_gradcheck(const GradcheckArgs& a) {
  if (a.h < 2 || a.w < 2) throw UsageError("--h and --w must be >= 2");
  if (a.classes < 2) throw UsageError("--classes must be >= 2 (softmax over one class is degenerate)");
  if (!(a.eps > 0.0) || !std::isfinite(a.eps)) throw UsageError("--eps must be > 0");

  SplitMix64 rng(a.seed);
  SplitMix64 field_rng = rng.fork(0), logit_rng = rng.fork(1), label_rng = rng.fork(2);

  Field2D d(a.h, a.w);
  for (double& v : d.values()) v = field_rng.uniform(-1.0, 1.0);
  const Field2D g = eie_gradient(d);
  std::vector<double> numeric(d.size());
  for (std::size_t p = 0; p < d.size(); ++p) {
    Field2D plus = d, minus = d;
    plus[p] += a.eps;
    minus[p] -= a.eps;
    numeric[p] = (eie_energy(plus) - eie_energy(minus)) / (2.0 * a.eps);
  }
  const CheckResult energy_check = compare(std::vector<double>(g.values().begin(), g.values().end()), numeric);

  LogitStack logits(a.classes, a.h, a.w);
  for (Field2D& c : logits.channels())
    for (double& v : c.values()) v = logit_rng.uniform(-2.0, 2.0);
  ClassMap map{a.h, a.w, std::vector<int>(a.h * a.w)};
  for (int& l : map.labels) l = static_cast<int>(label_rng.below(a.classes));
  const LabelStack labels = LabelStack::from_class_map(map, a.classes);
  const EieConfig cfg;
  const LogitStack grad = combined_loss_backward(logits, labels, cfg);
  std::vector<double> analytic, fd;
  for (std::size_t c = 0; c < a.classes; ++c) {
    for (std::size_t p = 0; p < logits.pixels(); ++p) {
      LogitStack plus = logits, minus = logits;
      plus[c][p] += a.eps;
      minus[c][p] -= a.eps;
      fd.push_back((combined_loss(plus, labels, cfg).total - combined_loss(minus, labels, cfg).total) / (2.0 * a.eps));
      analytic.push_back(grad[c][p]);
    }
  }
  const CheckResult loss_check = compare(analytic, fd);

  const std::size_t pixels = a.h * a.w;
  const std::size_t ep = energy_check.worst, lc = loss_check.worst / pixels, lp = loss_check.worst % pixels;
  std::cout << "eie_gradient: max_rel_error=" << fmt(energy_check.rel_error) << " worst_pixel=(" << ep / a.w << ','
            << ep % a.w << ")\n";
  std::cout << "combined_loss_backward: max_rel_error=" << fmt(loss_check.rel_error) << " worst_class=" << lc
            << " worst_pixel=(" << lp / a.w << ',' << lp % a.w << ")\n";
  const double worst = std::max(energy_check.rel_error, loss_check.rel_error);
  std::cout << "max_rel_error=" << fmt(worst) << " tolerance=1e-5" << '\n';
  if (!(worst <= kGradcheckTolerance)) {
    if (!(energy_check.rel_error <= kGradcheckTolerance)) {
      std::cerr << "gradcheck FAILED: eie_gradient at pixel (" << ep / a.w << ',' << ep % a.w << ")\n";
    } else {
      std::cerr << "gradcheck FAILED: combined_loss_backward at class " << lc << " pixel (" << lp / a.w << ','
                << lp % a.w << ")\n";
    }
    return kExitNumeric;
  }
  std::cout << "gradcheck OK\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evolve

constexpr std::size_t kUnstableIncreaseRun = 10;

struct EvolveRun {
  Trajectory trajectory;
  int exit_code = kExitOk;
};

std::string snapshot_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%05zu.pgm", step);
  return buf;
}

EvolveRun evolve_to_dir(const Field2D& gt, const Field2D& init, const EvolveParams& params, const fs::path& dir) {
  EvolveRun run{run_evolution(gt, init, params)};
  const Trajectory& t = run.trajectory;
  fs::create_directories(dir);
  write_text(dir / "trajectory.csv", trajectory_csv(t));
  for (const Snapshot& s : t.snapshots) write_pgm((dir / snapshot_name(s.step)).string(), s.sigma);
  std::cout << "initial_energy=" << fmt(t.energy.front()) << " final_energy=" << fmt(t.energy.back())
            << " initial_components=" << t.components.front() << " final_components=" << t.final_components << '\n';
  if (t.max_increase_run > kUnstableIncreaseRun) {
    std::cerr << "warning: energy increased for " << t.max_increase_run
              << " consecutive steps; eta may be unstable\n";
  }
  if (!t.finite) {
    std::cerr << "error: non-finite values in evolution\n";
    run.exit_code = kExitNumeric;
  }
  return run;
}

struct EvolveArgs {
  std::string gt, init, out_dir;
  EvolveParams params;
};

int cmd_evolve(const EvolveArgs& a) {
  const Field2D gt = read_pgm_mask(a.gt);
  const Field2D init = read_pgm_mask(a.init);
  require_same_shape(gt, init, "evolve");
  try {
    a.params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return evolve_to_dir(gt, init, a.params, a.out_dir).exit_code;
}

// ---------------------------------------------------------------- train-toy

struct TrainArgs {
  std::string scene = "mixed", report = "train_report.csv";
  bool compare = false;
  TrainConfig cfg;
};

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_filename(path.stem().string() + suffix + path.extension().string());
  return out;
}

void print_final(const std::string& arm, const TrainReport& r) {
  const EpochRecord& last = r.epochs.back();
  std::cout << arm << ": epochs=" << last.epoch << " converged=" << (r.converged ? "true" : "false")
            << " final_loss=" << fmt(last.total) << " val_miou=" << fmt(last.val.miou);
  for (std::size_t c = 0; c < last.val.per_class.size(); ++c) std::cout << " iou" << c << '=' << fmt(last.val.per_class[c]);
  std::cout << '\n';
}

// Returns nullopt on divergence after reporting it.
std::optional<TrainReport> train_arm(const TrainConfig& cfg, const std::string& arm) {
  try {
    return train(cfg);
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: arm " << arm << " diverged at epoch " << e.epoch() << '\n';
    return std::nullopt;
  }
}

int cmd_train_toy(TrainArgs a) {
  a.cfg.scene_kind = parse_scene_kind(a.scene);
  try {
    a.cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.compare) {
    const auto r = train_arm(a.cfg, a.cfg.eie.lambda1 == 0.0 ? "ce" : "eiel");
    if (!r) return kExitNumeric;
    write_text(a.report, report_csv(*r));
    print_final("report", *r);
    return kExitOk;
  }
  TrainConfig base = a.cfg;
  base.eie.lambda1 = 0.0;
  const auto ce = train_arm(base, "ce");
  if (!ce) return kExitNumeric;
  const auto eiel = train_arm(a.cfg, "eiel");
  if (!eiel) return kExitNumeric;
  write_text(with_suffix(a.report, "_ce"), report_csv(*ce));
  write_text(with_suffix(a.report, "_eiel"), report_csv(*eiel));
  print_final("ce", *ce);
  print_final("eiel", *eiel);
  const double gain = 100.0 * (eiel->epochs.back().val.per_class[kThinClass] - ce->epochs.back().val.per_class[kThinClass]);
  std::cout << "thin_iou_gain_points=" << fmt(gain) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred, gt, metric, csv;
  int tol = kDefaultTuSimpleTolerancePx;
  std::size_t classes = 0;
  double iou_threshold = 0.5;
};

ClassMap class_map_from_plane(const Field2D& plane, const char* what) {
  ClassMap m{plane.height(), plane.width(), std::vector<int>(plane.size())};
  for (std::size_t p = 0; p < plane.size(); ++p) {
    const double v = plane[p];
    if (!(v >= 0.0) || v != std::floor(v) || v > kIgnoreLabel) {
      throw FormatError(std::string(what) + ": class map values must be integers in [0, 255]", 0);
    }
    m.labels[p] = static_cast<int>(v);
  }
  return m;
}

std::vector<Field2D> binarize(const TensorStack& s) {
  std::vector<Field2D> out = s.channels();
  for (Field2D& f : out)
    for (double& v : f.values()) v = v > 0.5 ? 1.0 : 0.0;
  return out;
}

int cmd_eval(const EvalArgs& a) {
  std::vector<std::pair<std::string, double>> rows;
  if (a.metric == "miou") {
    const TensorStack pred = read_tensor(a.pred);
    const TensorStack gt = read_tensor(a.gt);
    if (gt.classes() != 1) throw DimensionError("miou: gt must be a 1xHxW class map");
    if (!pred[0].same_shape(gt[0])) throw DimensionError("miou: pred and gt dims differ");
    ClassMap pm;
    std::size_t classes = a.classes;
    if (pred.classes() == 1) {
      if (classes < 2) throw UsageError("miou: --classes is required when pred is a class map");
      pm = class_map_from_plane(pred[0], "pred");
    } else {
      if (classes != 0 && classes != pred.classes()) throw DimensionError("miou: --classes disagrees with pred");
      classes = pred.classes();
      pm = argmax(pred);
    }
    for (int l : pm.labels)
      if (static_cast<std::size_t>(l) >= classes) throw FormatError("miou: pred label out of range", 0);
    const IouReport r = iou_scores(pm, LabelStack::from_class_map(class_map_from_plane(gt[0], "gt"), classes));
    rows.emplace_back("miou", r.miou);
    for (std::size_t c = 0; c < classes; ++c) rows.emplace_back("iou_class" + std::to_string(c), r.per_class[c]);
  } else if (a.metric == "pixf1") {
    rows.emplace_back("pixel_f1", pixel_f1(read_pgm_mask(a.pred), read_pgm_mask(a.gt)));
  } else if (a.metric == "tusimple") {
    if (a.tol < 0) throw UsageError("--tol must be >= 0");
    const LanePoints gt = parse_lane_csv(detail::read_file_bytes(a.gt));
    const LanePoints pred = match_lanes_greedy(parse_lane_csv(detail::read_file_bytes(a.pred)), gt);
    rows.emplace_back("tusimple_accuracy", tusimple_accuracy(pred, gt, a.tol));
    rows.emplace_back("tol_px", a.tol);
  } else if (a.metric == "lane-f1") {
    const TensorStack pred = read_tensor(a.pred);
    const TensorStack gt = read_tensor(a.gt);
    if (!pred[0].same_shape(gt[0])) throw DimensionError("lane-f1: pred and gt dims differ");
    const LaneF1 r = lane_f1(binarize(pred), binarize(gt), a.iou_threshold);
    rows.emplace_back("lane_f1", r.f1);
    rows.emplace_back("tp", static_cast<double>(r.tp));
    rows.emplace_back("fp", static_cast<double>(r.fp));
    rows.emplace_back("fn", static_cast<double>(r.fn));
  }
  std::ostringstream csv;
  csv << "metric,value\n";
  for (const auto& [name, v] : rows) {
    std::cout << name << '=' << fmt(v) << '\n';
    csv << name << ',' << fmt(v) << '\n';
  }
  if (!a.csv.empty()) write_text(a.csv, csv.str());
  return kExitOk;
}

// ---------------------------------------------------------------- demo

struct DemoArgs {
  std::string out_dir;
  std::size_t epochs = 0;  // 0 = pinned value
};

nlohmann::json params_json(const EvolveParams& p) {
  return {{"eta", p.eta}, {"steps", p.steps}, {"alpha", p.alpha}, {"snapshot_every", p.snapshot_every}};
}

int cmd_demo(const DemoArgs& a) {
  const fs::path root = a.out_dir;
  nlohmann::json manifest;
  manifest["generator"] = "splitmix64";
  int status = kExitOk;

  for (const EvolveScenario& sc : evolve_scenarios()) {
    const fs::path dir = root / "evolve" / sc.name;
    fs::create_directories(dir);
    write_pgm((dir / "gt.pgm").string(), sc.gt);
    write_pgm((dir / "init.pgm").string(), sc.init);
    std::cout << sc.name << ": ";
    const EvolveRun run = evolve_to_dir(sc.gt, sc.init, sc.params, dir);
    if (run.exit_code != kExitOk) status = run.exit_code;
    const Trajectory& t = run.trajectory;
    manifest["evolve"].push_back({{"name", sc.name},
                                  {"params", params_json(sc.params)},
                                  {"height", sc.gt.height()},
                                  {"width", sc.gt.width()},
                                  {"initial_energy", fmt(t.energy.front())},
                                  {"final_energy", fmt(t.energy.back())},
                                  {"initial_components", t.components.front()},
                                  {"final_components", t.final_components},
                                  {"initial_foreground", foreground_pixels(sc.init)},
                                  {"final_foreground", foreground_pixels(t.final_sigma)}});
  }

  for (std::uint64_t seed : kTrainCompareSeeds) {
    TrainConfig cfg = train_compare_demo_config(seed);
    if (a.epochs > 0) cfg.epochs = a.epochs;
    TrainConfig base = cfg;
    base.eie.lambda1 = 0.0;
    const std::string tag = "seed" + std::to_string(seed);
    const auto ce = train_arm(base, tag + "/ce");
    const auto eiel = ce ? train_arm(cfg, tag + "/eiel") : std::nullopt;
    if (!ce || !eiel) return kExitNumeric;
    write_text(root / "train" / (tag + "_ce.csv"), report_csv(*ce));
    write_text(root / "train" / (tag + "_eiel.csv"), report_csv(*eiel));
    const double thin_ce = ce->epochs.back().val.per_class[kThinClass];
    const double thin_eiel = eiel->epochs.back().val.per_class[kThinClass];
    std::cout << tag << ": thin_iou ce=" << fmt(thin_ce) << " eiel=" << fmt(thin_eiel) << '\n';
    manifest["train_compare"].push_back({{"seed", seed},
                                         {"scene", to_string(cfg.scene_kind)},
                                         {"max_epochs", cfg.epochs},
                                         {"convergence_tol", cfg.convergence_tol},
                                         {"convergence_window", cfg.convergence_window},
                                         {"standardize", cfg.standardize},
                                         {"learning_rate", cfg.learning_rate},
                                         {"lambda1", cfg.eie.lambda1},
                                         {"lambda2", cfg.eie.lambda2},
                                         {"alpha", cfg.eie.alpha},
                                         {"train_count", cfg.train_count},
                                         {"val_count", cfg.val_count},
                                         {"height", cfg.height},
                                         {"width", cfg.width},
                                         {"epochs_ce", ce->epochs.size()},
                                         {"epochs_eiel", eiel->epochs.size()},
                                         {"converged_ce", ce->converged},
                                         {"converged_eiel", eiel->converged},
                                         {"thin_iou_ce", fmt(thin_ce)},
                                         {"thin_iou_eiel", fmt(thin_eiel)}});
  }
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic interaction energy segmentation toolkit"};
  app.require_subcommand(1);
  // gradcheck uses --h for height, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  EnergyArgs energy;
  CLI::App* energy_cmd = app.add_subcommand("energy", "Per-class elastic interaction energy and its decomposition");
  energy_cmd->add_option("--pred", energy.pred, "Prediction tensor (.fld, CxHxW probabilities or logits)")->required();
  energy_cmd->add_option("--gt", energy.gt, "Ground-truth one-hot tensor (.fld, CxHxW)")->required();
  energy_cmd->add_option("--alpha", energy.alpha, "Prediction scale")->capture_default_str();
  energy_cmd->add_flag("--logits", energy.logits, "Treat --pred as logits and apply softmax");
  energy_cmd->add_option("--csv", energy.csv, "Optional CSV output path");

  GradcheckArgs gc;
  CLI::App* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the energy and loss gradients");
  gc_cmd->add_option("--h", gc.h, "Grid height")->capture_default_str();
  gc_cmd->add_option("--w", gc.w, "Grid width")->capture_default_str();
  gc_cmd->add_option("--classes", gc.classes, "Number of classes")->capture_default_str();
  gc_cmd->add_option("--seed", gc.seed, "Random seed")->capture_default_str();
  gc_cmd->add_option("--eps", gc.eps, "Central-difference step")->capture_default_str();

  EvolveArgs ev;
  CLI::App* ev_cmd = app.add_subcommand("evolve", "Gradient flow of a prediction field toward a ground-truth mask");
  ev_cmd->add_option("--gt", ev.gt, "Ground-truth mask (PGM P2/P5, >127 is foreground)")->required();
  ev_cmd->add_option("--init", ev.init, "Initial prediction mask (PGM)")->required();
  ev_cmd->add_option("--steps", ev.params.steps, "Number of steps")->capture_default_str();
  ev_cmd->add_option("--eta", ev.params.eta, "Step size")->capture_default_str();
  ev_cmd->add_option("--alpha", ev.params.alpha, "Prediction scale")->capture_default_str();
  ev_cmd->add_option("--snapshot-every", ev.params.snapshot_every, "Snapshot interval")->capture_default_str();
  ev_cmd->add_option("--out-dir", ev.out_dir, "Output directory for trajectory.csv and snapshots")->required();

  TrainArgs tr;
  CLI::App* tr_cmd = app.add_subcommand("train-toy", "Train the per-pixel classifier on synthetic scenes");
  tr_cmd->add_option("--scene", tr.scene, "Scene kind")->check(CLI::IsMember({"lanes", "blobs", "mixed"}))->capture_default_str();
  tr_cmd->add_option("--epochs", tr.cfg.epochs, "Full-batch epochs")->capture_default_str();
  tr_cmd->add_option("--lambda1", tr.cfg.eie.lambda1, "Energy term weight")->capture_default_str();
  tr_cmd->add_option("--lambda2", tr.cfg.eie.lambda2, "Cross-entropy weight")->capture_default_str();
  tr_cmd->add_option("--alpha", tr.cfg.eie.alpha, "Prediction scale")->capture_default_str();
  tr_cmd->add_option("--lr", tr.cfg.learning_rate, "Learning rate")->capture_default_str();
  tr_cmd->add_option("--tol", tr.cfg.convergence_tol,
                     "Stop when the relative loss change over --window epochs is below this (0 = run all epochs)")
      ->capture_default_str();
  tr_cmd->add_option("--window", tr.cfg.convergence_window, "Convergence window in epochs")->capture_default_str();
  tr_cmd->add_flag("--standardize,!--no-standardize", tr.cfg.standardize,
                   "Standardize feature planes with training-set statistics");
  tr_cmd->add_option("--seed", tr.cfg.seed, "Run seed")->capture_default_str();
  tr_cmd->add_option("--train-count", tr.cfg.train_count, "Training scenes")->capture_default_str();
  tr_cmd->add_option("--val-count", tr.cfg.val_count, "Validation scenes")->capture_default_str();
  tr_cmd->add_option("--height", tr.cfg.height, "Scene height")->capture_default_str();
  tr_cmd->add_option("--width", tr.cfg.width, "Scene width")->capture_default_str();
  tr_cmd->add_option("--report", tr.report, "Report CSV path (compare mode adds _ce/_eiel)")->capture_default_str();
  tr_cmd->add_flag("--compare", tr.compare, "Also train a lambda1 = 0 arm on the same scenes");

  EvalArgs evl;
  CLI::App* evl_cmd = app.add_subcommand("eval", "Segmentation and lane metrics");
  evl_cmd->footer(
      "Formats:\n"
      "  miou      pred .fld CxHxW scores (argmax) or 1xHxW class map with --classes;\n"
      "            gt .fld 1xHxW class map, 255 = ignore\n"
      "  pixf1     pred/gt PGM masks\n"
      "  tusimple  pred/gt CSV 'lane_id,row,col', col -1 = missing; pred lanes are\n"
      "            greedily matched to gt lanes before scoring\n"
      "  lane-f1   pred/gt .fld LxHxW lane masks (>0.5 is inside)");
  evl_cmd->add_option("--pred", evl.pred, "Prediction file")->required();
  evl_cmd->add_option("--gt", evl.gt, "Ground-truth file")->required();
  evl_cmd->add_option("--metric", evl.metric, "Metric")->required()->check(CLI::IsMember({"miou", "pixf1", "tusimple", "lane-f1"}));
  evl_cmd->add_option("--tol", evl.tol, "TuSimple column tolerance in pixels")->capture_default_str();
  evl_cmd->add_option("--classes", evl.classes, "Class count for class-map predictions")->capture_default_str();
  evl_cmd->add_option("--iou-threshold", evl.iou_threshold, "Lane match IoU threshold")->capture_default_str();
  evl_cmd->add_option("--csv", evl.csv, "Optional CSV output path");

  DemoArgs demo;
  CLI::App* demo_cmd = app.add_subcommand("demo", "Run the pinned evolution scenarios and the seeded training comparison");
  demo_cmd->add_option("--out-dir", demo.out_dir, "Output directory")->required();
  demo_cmd->add_option("--epochs", demo.epochs, "Override training epochs (0 = pinned)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  print_config(*sub);
  try {
    if (sub == energy_cmd) return cmd_energy(energy);
    if (sub == gc_cmd) return cmd_gradcheck(gc);
    if (sub == ev_cmd) return cmd_evolve(ev);
    if (sub == tr_cmd) return cmd_train_toy(tr);
    if (sub == evl_cmd) return cmd_eval(evl);
    if (sub == demo_cmd) return cmd_demo(demo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
