#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/io.hpp"
#include "pml/manifest.hpp"
#include "pml/metrics.hpp"
#include "pml/model.hpp"
#include "pml/trainer.hpp"

namespace pml {

struct RunSummary {
  std::string setting;  // e.g. "PAL_0.3"
  LossKind loss_kind = LossKind::Proposed;
  std::uint64_t seed = 0;
  int epochs = 0;
  double map = 0.0;
  std::string out_dir;
};

struct ResolvedData {
  Matrix train_features;
  LabelMatrix train_labels;  // after masking
  Dataset test;              // fully labeled
};

/// Materializes the manifest's data source and applies the one-time mask.
/// Synthetic sources derive their generation and mask seeds from the run
/// seed; file sources are used as-is (an already partially labeled train
/// file skips masking and requires setting = FAL).
inline ResolvedData resolve_data(const ExperimentManifest& manifest) {
  ResolvedData out;
  MaskSpec mask = manifest.mask;
  mask.seed = derive_seed(manifest.train.seed, SeedStream::Mask);

  if (manifest.dataset.synthetic) {
    SyntheticSpec spec;
    spec.n_instances = manifest.dataset.train_instances + manifest.dataset.test_instances;
    spec.n_features = manifest.dataset.n_features;
    spec.n_classes = manifest.dataset.n_classes;
    spec.mean_positives_per_instance = manifest.dataset.mean_positives;
    spec.noise_scale = manifest.dataset.noise_scale;
    spec.seed = derive_seed(manifest.train.seed, SeedStream::Dataset);
    const Dataset full = generate_synthetic(spec);

    const std::size_t n_train = manifest.dataset.train_instances;
    out.train_features = Matrix(n_train, spec.n_features);
    BinaryLabels train_labels(n_train, spec.n_classes);
    for (std::size_t i = 0; i < n_train; ++i) {
      for (std::size_t f = 0; f < spec.n_features; ++f) out.train_features(i, f) = full.features(i, f);
      for (std::size_t j = 0; j < spec.n_classes; ++j) train_labels(i, j) = full.labels(i, j);
    }
    const std::size_t n_test = manifest.dataset.test_instances;
    out.test.features = Matrix(n_test, spec.n_features);
    out.test.labels = BinaryLabels(n_test, spec.n_classes);
    for (std::size_t i = 0; i < n_test; ++i) {
      for (std::size_t f = 0; f < spec.n_features; ++f)
        out.test.features(i, f) = full.features(n_train + i, f);
      for (std::size_t j = 0; j < spec.n_classes; ++j)
        out.test.labels(i, j) = full.labels(n_train + i, j);
    }
    out.test.class_names = full.class_names;
    out.train_labels = apply_mask(train_labels, mask);
  } else {
    const LoadedDataset train = load_dataset(manifest.dataset.train_path);
    out.train_features = train.features;
    if (has_missing(train.labels)) {
      if (manifest.mask.setting != MaskSetting::FAL)
        throw ConfigError("resolve_data: '" + manifest.dataset.train_path +
                          "' is already partially labeled; re-masking it is not supported");
      out.train_labels = train.labels;
    } else {
      out.train_labels = apply_mask(to_full(train).labels, mask);
    }
    out.test = to_full(load_dataset(manifest.dataset.test_path));
  }
  return out;
}

inline nlohmann::json to_json(const EpochReport& r) {
  return {{"epoch", r.epoch},        {"mean_loss", r.mean_loss}, {"map", r.map},
          {"alpha_mean", r.alpha_mean}, {"beta_mean", r.beta_mean}, {"d", r.d},
          {"lr", r.lr},              {"wall_clock_sec", r.wall_clock_sec}};
}

inline nlohmann::json to_json(const EvalResult& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (double ap : r.per_class_ap) {
    if (std::isnan(ap)) per_class.push_back(nullptr);
    else per_class.push_back(ap);
  }
  return {{"map", r.mean_ap}, {"per_class_ap", per_class}, {"skipped_classes", r.skipped_classes}};
}

inline std::string summary_text(const RunSummary& s, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::json j{{"setting", s.setting},
                       {"loss", to_string(s.loss_kind)},
                       {"seed", s.seed},
                       {"epochs", s.epochs},
                       {"map", s.map}};
      out << j.dump() << "\n";
      break;
    }
    case ReportFormat::Csv:
      out << "setting,loss,seed,epochs,map\n";
      out << s.setting << ',' << to_string(s.loss_kind) << ',' << s.seed << ',' << s.epochs << ','
          << format_double(s.map) << "\n";
      break;
    case ReportFormat::Markdown:
      out << "| setting | loss | seed | epochs | mAP |\n";
      out << "|---|---|---|---|---|\n";
      out << "| " << s.setting << " | " << to_string(s.loss_kind) << " | " << s.seed << " | "
          << s.epochs << " | " << format_double(s.map) << " |\n";
      break;
  }
  return out.str();
}

/// Runs one experiment end to end and writes its artifacts into out_dir:
/// masked_train.txt, epochs.jsonl, checkpoint.txt, eval.json, the summary in
/// the chosen format, and optionally pseudo.csv. Deterministic per
/// (manifest, seed); timing fields aside, reruns reproduce the same bytes.
inline RunSummary run_experiment(const ExperimentManifest& manifest) {
  manifest.validate();
  const std::filesystem::path dir(manifest.out_dir);
  std::filesystem::create_directories(dir);

  const ResolvedData data = resolve_data(manifest);
  save_dataset(data.train_features, data.train_labels, dir / "masked_train.txt");

  ModelConfig model_config;
  model_config.arch = manifest.arch;
  model_config.hidden_dim = manifest.arch == Arch::Mlp1 ? manifest.hidden_dim : 0;

  const TrainResult trained =
      train(data.train_features, data.train_labels, data.test, manifest.train, model_config);

  {
    std::ofstream epochs(dir / "epochs.jsonl");
    for (const EpochReport& r : trained.reports) epochs << to_json(r).dump() << "\n";
  }
  save_checkpoint(trained.params, dir / "checkpoint.txt");

  const EvalResult eval = evaluate(forward(trained.params, data.test.features).predictions, data.test.labels);
  {
    std::ofstream out(dir / "eval.json");
    out << to_json(eval).dump(2) << "\n";
  }

  if (manifest.dump_pseudo) {
    std::ofstream out(dir / "pseudo.csv");
    out << "row,col,value\n";
    for (const auto& e : trained.pseudo.entries())
      out << e.row << ',' << e.col << ',' << format_double(e.value) << "\n";
  }

  RunSummary summary;
  summary.setting = manifest.mask.name();
  summary.loss_kind = manifest.train.loss_kind;
  summary.seed = manifest.train.seed;
  summary.epochs = manifest.train.epochs;
  summary.map = eval.mean_ap;
  summary.out_dir = dir.string();

  const std::string ext = manifest.format == ReportFormat::Json ? "json"
                          : manifest.format == ReportFormat::Csv ? "csv"
                                                                 : "md";
  std::ofstream out(dir / ("summary." + ext));
  out << summary_text(summary, manifest.format);
  return summary;
}

struct SweepCell {
  double mean_map = 0.0;
  std::size_t runs = 0;
  bool failed = false;
  std::string error;
};

struct SweepTable {
  std::vector<LossKind> losses;       // rows
  std::vector<std::string> settings;  // columns
  std::vector<SweepCell> cells;       // row-major losses x settings
  bool any_failed = false;

  const SweepCell& cell(std::size_t row, std::size_t col) const {
    return cells[row * settings.size() + col];
  }
};

/// Expands the manifest's sweep axes (defaulting each to the manifest's own
/// value) and runs the grid: rows are loss kinds, columns are mask settings,
/// cells are mAP means over the seed axis. A failing run marks its cell
/// failed and the sweep carries on.
inline SweepTable run_sweep(const ExperimentManifest& base) {
  std::vector<LossKind> losses = base.sweep_losses;
  if (losses.empty()) losses = {base.train.loss_kind};
  std::vector<MaskSpec> settings = base.sweep_settings;
  if (settings.empty()) settings = {base.mask};
  std::vector<std::uint64_t> seeds = base.sweep_seeds;
  if (seeds.empty()) seeds = {base.train.seed};

  SweepTable table;
  table.losses = losses;
  for (const MaskSpec& s : settings) table.settings.push_back(s.name());
  table.cells.assign(losses.size() * settings.size(), {});

  for (std::size_t r = 0; r < losses.size(); ++r)
    for (std::size_t c = 0; c < settings.size(); ++c) {
      SweepCell& cell = table.cells[r * settings.size() + c];
      double sum = 0.0;
      for (std::uint64_t seed : seeds) {
        ExperimentManifest run = base;
        run.sweep_losses.clear();
        run.sweep_settings.clear();
        run.sweep_seeds.clear();
        run.train.loss_kind = losses[r];
        run.mask = settings[c];
        run.train.seed = seed;
        run.out_dir = (std::filesystem::path(base.out_dir) /
                       (std::string(to_string(losses[r])) + "_" + settings[c].name() + "_s" +
                        std::to_string(seed)))
                          .string();
        try {
          sum += run_experiment(run).map;
          ++cell.runs;
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
          table.any_failed = true;
        }
      }
      if (cell.runs > 0 && !cell.failed) cell.mean_map = sum / static_cast<double>(cell.runs);
    }
  return table;
}

inline std::string format_table(const SweepTable& table, ReportFormat format) {
  std::ostringstream out;
  auto cell_text = [&table](std::size_t r, std::size_t c) -> std::string {
    const SweepCell& cell = table.cell(r, c);
    if (cell.failed) return "failed";
    std::ostringstream num;
    num.setf(std::ios::fixed);
    num.precision(4);
    num << cell.mean_map;
    return num.str();
  };
  switch (format) {
    case ReportFormat::Json: {
      nlohmann::json j;
      j["settings"] = table.settings;
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t r = 0; r < table.losses.size(); ++r) {
        nlohmann::json row;
        row["loss"] = to_string(table.losses[r]);
        nlohmann::json vals = nlohmann::json::array();
        for (std::size_t c = 0; c < table.settings.size(); ++c) {
          const SweepCell& cell = table.cell(r, c);
          if (cell.failed) vals.push_back("failed");
          else vals.push_back(cell.mean_map);
        }
        row["mean_map"] = vals;
        rows.push_back(row);
      }
      j["rows"] = rows;
      out << j.dump(2) << "\n";
      break;
    }
    case ReportFormat::Csv: {
      out << "loss";
      for (const std::string& s : table.settings) out << ',' << s;
      out << "\n";
      for (std::size_t r = 0; r < table.losses.size(); ++r) {
        out << to_string(table.losses[r]);
        for (std::size_t c = 0; c < table.settings.size(); ++c) out << ',' << cell_text(r, c);
        out << "\n";
      }
      break;
    }
    case ReportFormat::Markdown: {
      out << "| loss |";
      for (const std::string& s : table.settings) out << ' ' << s << " |";
      out << "\n|---|";
      for (std::size_t c = 0; c < table.settings.size(); ++c) out << "---|";
      out << "\n";
      for (std::size_t r = 0; r < table.losses.size(); ++r) {
        out << "| " << to_string(table.losses[r]) << " |";
        for (std::size_t c = 0; c < table.settings.size(); ++c) out << ' ' << cell_text(r, c) << " |";
        out << "\n";
      }
      break;
    }
  }
  return out.str();
}

}  // namespace pml
