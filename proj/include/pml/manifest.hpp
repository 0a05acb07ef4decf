#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/loss.hpp"
#include "pml/model.hpp"
#include "pml/text.hpp"
#include "pml/trainer.hpp"

namespace pml {

enum class ReportFormat { Json, Csv, Markdown };

inline const char* to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::Json: return "json";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "md";
  }
  return "?";
}

inline ReportFormat parse_report_format(const std::string& token, const std::string& context) {
  if (token == "json") return ReportFormat::Json;
  if (token == "csv") return ReportFormat::Csv;
  if (token == "md") return ReportFormat::Markdown;
  throw ParseError(context + ": format must be one of json|csv|md, got '" + token + "'");
}

inline LossKind parse_loss_kind(const std::string& token, const std::string& context) {
  if (token == "proposed") return LossKind::Proposed;
  if (token == "an") return LossKind::AssumeNegative;
  if (token == "wan") return LossKind::WeightedAssumeNegative;
  if (token == "bce_full") return LossKind::BceFull;
  throw ParseError(context + ": loss must be one of proposed|an|wan|bce_full, got '" + token + "'");
}

/// Parses "FAL", "SPL", "PAL_0.3", "PPL_0.6" style tokens.
inline MaskSpec parse_mask_token(const std::string& token, const std::string& context) {
  MaskSpec spec;
  std::string head = token;
  std::string frac;
  if (const auto pos = token.find('_'); pos != std::string::npos) {
    head = token.substr(0, pos);
    frac = token.substr(pos + 1);
  }
  if (head == "FAL") spec.setting = MaskSetting::FAL;
  else if (head == "PAL") spec.setting = MaskSetting::PAL;
  else if (head == "PPL") spec.setting = MaskSetting::PPL;
  else if (head == "SPL") spec.setting = MaskSetting::SPL;
  else throw ParseError(context + ": unknown mask setting '" + token + "'");
  if (!frac.empty()) spec.keep_fraction = parse_double(frac, context);
  return spec;
}

/// Where the train/test data come from: a seeded synthetic benchmark or a
/// pair of dataset files (the test file must be fully labeled).
struct DataSource {
  bool synthetic = true;
  std::size_t train_instances = 2000;
  std::size_t test_instances = 500;
  std::size_t n_features = 32;
  std::size_t n_classes = 20;
  double mean_positives = 2.5;
  double noise_scale = 0.5;
  std::string train_path;
  std::string test_path;

  void validate() const {
    if (synthetic) {
      SyntheticSpec probe{train_instances + test_instances, n_features, n_classes, mean_positives,
                          noise_scale, 0};
      probe.validate();
      if (test_instances == 0) throw ValidationError("dataset.test_instances: must be positive");
    } else {
      if (train_path.empty()) throw ValidationError("dataset.train_path: required for source=file");
      if (test_path.empty()) throw ValidationError("dataset.test_path: required for source=file");
    }
  }

  friend bool operator==(const DataSource&, const DataSource&) = default;
};

/// One experiment, fully described: data, masking, model, training, outputs,
/// plus optional sweep axes that expand into a grid of runs. The single run
/// seed (train.seed) fans out to dataset/mask/init/shuffle/pick sub-seeds.
struct ExperimentManifest {
  DataSource dataset;
  MaskSpec mask;  // seed field is derived at run time, not stored here
  Arch arch = Arch::Linear;
  std::size_t hidden_dim = 64;
  TrainConfig train;
  std::string out_dir = "runs/exp";
  ReportFormat format = ReportFormat::Json;
  bool dump_pseudo = false;

  std::vector<LossKind> sweep_losses;
  std::vector<MaskSpec> sweep_settings;
  std::vector<std::uint64_t> sweep_seeds;

  void validate() const {
    dataset.validate();
    mask.validate();
    if (arch == Arch::Mlp1 && hidden_dim == 0)
      throw ValidationError("model.hidden_dim: must be positive for mlp1");
    train.validate();
    if (out_dir.empty()) throw ValidationError("output.dir: must not be empty");
    for (const MaskSpec& s : sweep_settings) s.validate();
  }

  bool same_run(const ExperimentManifest& other) const {
    return dataset == other.dataset && mask.setting == other.mask.setting &&
           mask.keep_fraction == other.mask.keep_fraction && arch == other.arch &&
           hidden_dim == other.hidden_dim && train.epochs == other.train.epochs &&
           train.batch_size == other.train.batch_size && train.base_lr == other.train.base_lr &&
           train.lr_decay == other.train.lr_decay && train.momentum == other.train.momentum &&
           train.loss_kind == other.train.loss_kind && train.seed == other.train.seed &&
           train.loss.beta_floor == other.train.loss.beta_floor &&
           train.loss.epoch_offset == other.train.loss.epoch_offset &&
           train.loss.subsample_fraction == other.train.loss.subsample_fraction &&
           train.loss.clamp_epsilon == other.train.loss.clamp_epsilon &&
           train.loss.normalized_ramp == other.train.loss.normalized_ramp &&
           train.loss.wan_negative_weight == other.train.loss.wan_negative_weight;
  }

  friend bool operator==(const ExperimentManifest& a, const ExperimentManifest& b) {
    return a.same_run(b) && a.out_dir == b.out_dir && a.format == b.format &&
           a.dump_pseudo == b.dump_pseudo && a.sweep_losses == b.sweep_losses &&
           a.sweep_seeds == b.sweep_seeds &&
           a.sweep_settings.size() == b.sweep_settings.size() &&
           [&] {
             for (std::size_t i = 0; i < a.sweep_settings.size(); ++i)
               if (a.sweep_settings[i].setting != b.sweep_settings[i].setting ||
                   a.sweep_settings[i].keep_fraction != b.sweep_settings[i].keep_fraction)
                 return false;
             return true;
           }();
  }

  std::string serialize() const;
  static ExperimentManifest parse(const std::string& text, const std::string& origin = "manifest");
  static ExperimentManifest load(const std::filesystem::path& path);
};

inline std::string ExperimentManifest::serialize() const {
  std::ostringstream out;
  out << "[dataset]\n";
  out << "source = " << (dataset.synthetic ? "synthetic" : "file") << "\n";
  if (dataset.synthetic) {
    out << "train_instances = " << dataset.train_instances << "\n";
    out << "test_instances = " << dataset.test_instances << "\n";
    out << "features = " << dataset.n_features << "\n";
    out << "classes = " << dataset.n_classes << "\n";
    out << "mean_positives = " << format_double(dataset.mean_positives) << "\n";
    out << "noise_scale = " << format_double(dataset.noise_scale) << "\n";
  } else {
    out << "train_path = " << dataset.train_path << "\n";
    out << "test_path = " << dataset.test_path << "\n";
  }
  out << "\n[mask]\n";
  out << "setting = " << to_string(mask.setting) << "\n";
  out << "keep_fraction = " << format_double(mask.keep_fraction) << "\n";
  out << "\n[model]\n";
  out << "arch = " << to_string(arch) << "\n";
  out << "hidden_dim = " << hidden_dim << "\n";
  out << "\n[train]\n";
  out << "loss = " << to_string(train.loss_kind) << "\n";
  out << "epochs = " << train.epochs << "\n";
  out << "batch_size = " << train.batch_size << "\n";
  out << "base_lr = " << format_double(train.base_lr) << "\n";
  out << "lr_decay = " << format_double(train.lr_decay) << "\n";
  out << "momentum = " << format_double(train.momentum) << "\n";
  out << "seed = " << train.seed << "\n";
  out << "\n[loss]\n";
  out << "beta_floor = " << format_double(train.loss.beta_floor) << "\n";
  out << "epoch_offset = " << train.loss.epoch_offset << "\n";
  out << "subsample_fraction = " << format_double(train.loss.subsample_fraction) << "\n";
  out << "clamp_epsilon = " << format_double(train.loss.clamp_epsilon) << "\n";
  out << "normalized_ramp = " << (train.loss.normalized_ramp ? "true" : "false") << "\n";
  out << "wan_negative_weight = " << format_double(train.loss.wan_negative_weight) << "\n";
  out << "\n[output]\n";
  out << "dir = " << out_dir << "\n";
  out << "format = " << to_string(format) << "\n";
  out << "dump_pseudo = " << (dump_pseudo ? "true" : "false") << "\n";
  if (!sweep_losses.empty() || !sweep_settings.empty() || !sweep_seeds.empty()) {
    out << "\n[sweep]\n";
    if (!sweep_losses.empty()) {
      out << "losses =";
      for (LossKind k : sweep_losses) out << ' ' << to_string(k);
      out << "\n";
    }
    if (!sweep_settings.empty()) {
      out << "settings =";
      for (const MaskSpec& s : sweep_settings) out << ' ' << s.name();
      out << "\n";
    }
    if (!sweep_seeds.empty()) {
      out << "seeds =";
      for (std::uint64_t s : sweep_seeds) out << ' ' << s;
      out << "\n";
    }
  }
  return out.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline bool parse_bool(const std::string& token, const std::string& context) {
  if (token == "true") return true;
  if (token == "false") return false;
  throw ParseError(context + ": expected true|false, got '" + token + "'");
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

}  // namespace detail

inline ExperimentManifest ExperimentManifest::parse(const std::string& text, const std::string& origin) {
  ExperimentManifest m;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ": line " + std::to_string(line_no);
    std::string s = detail::trim(line);
    if (const auto hash = s.find('#'); hash != std::string::npos) s = detail::trim(s.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(where + ": unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "dataset" && section != "mask" && section != "model" && section != "train" &&
          section != "loss" && section != "output" && section != "sweep")
        throw ParseError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(where + ": empty key");
    if (section.empty()) throw ParseError(where + ": key outside any [section]");

    if (section == "dataset") {
      if (key == "source") {
        if (value == "synthetic") m.dataset.synthetic = true;
        else if (value == "file") m.dataset.synthetic = false;
        else throw ParseError(where + ": source must be synthetic|file");
      } else if (key == "train_instances") m.dataset.train_instances = parse_u64(value, where);
      else if (key == "test_instances") m.dataset.test_instances = parse_u64(value, where);
      else if (key == "features") m.dataset.n_features = parse_u64(value, where);
      else if (key == "classes") m.dataset.n_classes = parse_u64(value, where);
      else if (key == "mean_positives") m.dataset.mean_positives = parse_double(value, where);
      else if (key == "noise_scale") m.dataset.noise_scale = parse_double(value, where);
      else if (key == "train_path") m.dataset.train_path = value;
      else if (key == "test_path") m.dataset.test_path = value;
      else throw ParseError(where + ": unknown dataset key '" + key + "'");
    } else if (section == "mask") {
      if (key == "setting") m.mask.setting = parse_mask_token(value, where).setting;
      else if (key == "keep_fraction") m.mask.keep_fraction = parse_double(value, where);
      else throw ParseError(where + ": unknown mask key '" + key + "'");
    } else if (section == "model") {
      if (key == "arch") {
        if (value == "linear") m.arch = Arch::Linear;
        else if (value == "mlp1") m.arch = Arch::Mlp1;
        else throw ParseError(where + ": arch must be linear|mlp1");
      } else if (key == "hidden_dim") m.hidden_dim = parse_u64(value, where);
      else throw ParseError(where + ": unknown model key '" + key + "'");
    } else if (section == "train") {
      if (key == "loss") m.train.loss_kind = parse_loss_kind(value, where);
      else if (key == "epochs") m.train.epochs = static_cast<int>(parse_i64(value, where));
      else if (key == "batch_size") m.train.batch_size = parse_u64(value, where);
      else if (key == "base_lr") m.train.base_lr = parse_double(value, where);
      else if (key == "lr_decay") m.train.lr_decay = parse_double(value, where);
      else if (key == "momentum") m.train.momentum = parse_double(value, where);
      else if (key == "seed") m.train.seed = parse_u64(value, where);
      else throw ParseError(where + ": unknown train key '" + key + "'");
    } else if (section == "loss") {
      if (key == "beta_floor") m.train.loss.beta_floor = parse_double(value, where);
      else if (key == "epoch_offset") m.train.loss.epoch_offset = static_cast<int>(parse_i64(value, where));
      else if (key == "subsample_fraction") m.train.loss.subsample_fraction = parse_double(value, where);
      else if (key == "clamp_epsilon") m.train.loss.clamp_epsilon = parse_double(value, where);
      else if (key == "normalized_ramp") m.train.loss.normalized_ramp = detail::parse_bool(value, where);
      else if (key == "wan_negative_weight") m.train.loss.wan_negative_weight = parse_double(value, where);
      else throw ParseError(where + ": unknown loss key '" + key + "'");
    } else if (section == "output") {
      if (key == "dir") m.out_dir = value;
      else if (key == "format") m.format = parse_report_format(value, where);
      else if (key == "dump_pseudo") m.dump_pseudo = detail::parse_bool(value, where);
      else throw ParseError(where + ": unknown output key '" + key + "'");
    } else {  // sweep
      if (key == "losses") {
        m.sweep_losses.clear();
        for (const std::string& w : detail::split_words(value))
          m.sweep_losses.push_back(parse_loss_kind(w, where));
      } else if (key == "settings") {
        m.sweep_settings.clear();
        for (const std::string& w : detail::split_words(value))
          m.sweep_settings.push_back(parse_mask_token(w, where));
      } else if (key == "seeds") {
        m.sweep_seeds.clear();
        for (const std::string& w : detail::split_words(value)) m.sweep_seeds.push_back(parse_u64(w, where));
      } else {
        throw ParseError(where + ": unknown sweep key '" + key + "'");
      }
    }
  }
  return m;
}

inline ExperimentManifest ExperimentManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("manifest: cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

}  // namespace pml
