#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "pml/dataset.hpp"
#include "pml/errors.hpp"
#include "pml/grid.hpp"
#include "pml/text.hpp"

namespace pml {

/// A dataset as stored on disk: labels may contain Missing entries.
struct LoadedDataset {
  Matrix features;     // N x M
  LabelMatrix labels;  // N x L
};

/// Text format, UTF-8:
///   line 1:        N M L
///   lines 2..N+1:  M features, a '|' separator, L label tokens from {0,1,?}
inline void save_dataset(const Matrix& features, const LabelMatrix& labels,
                         const std::filesystem::path& path) {
  if (features.rows() != labels.rows())
    throw StructuralError("save_dataset: features and labels disagree on instance count");
  std::ofstream out(path);
  if (!out) throw ParseError("save_dataset: cannot open '" + path.string() + "' for writing");
  out << features.rows() << ' ' << features.cols() << ' ' << labels.cols() << '\n';
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t f = 0; f < features.cols(); ++f) {
      if (f) out << ' ';
      out << format_double(features(i, f));
    }
    out << " |";
    for (std::size_t j = 0; j < labels.cols(); ++j) {
      out << ' ';
      switch (labels(i, j)) {
        case Label::Neg: out << '0'; break;
        case Label::Pos: out << '1'; break;
        case Label::Missing: out << '?'; break;
      }
    }
    out << '\n';
  }
  if (!out) throw ParseError("save_dataset: write failed for '" + path.string() + "'");
}

inline LabelMatrix observe_all(const BinaryLabels& labels) {
  LabelMatrix out(labels.rows(), labels.cols(), Label::Missing);
  for (std::size_t i = 0; i < labels.rows(); ++i)
    for (std::size_t j = 0; j < labels.cols(); ++j)
      out(i, j) = labels(i, j) == 1 ? Label::Pos : Label::Neg;
  return out;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  save_dataset(ds.features, observe_all(ds.labels), path);
}

inline LoadedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_dataset: cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": line 1: missing header");
  std::istringstream header(line);
  long long n = -1, m = -1, l = -1;
  if (!(header >> n >> m >> l) || n < 0 || m < 0 || l < 0)
    throw ParseError(path.string() + ": line 1: header must be 'N M L'");
  std::string extra;
  if (header >> extra) throw ParseError(path.string() + ": line 1: trailing tokens after header");

  LoadedDataset ds;
  ds.features = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(m));
  ds.labels = LabelMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(l));

  for (long long i = 0; i < n; ++i) {
    const std::string where = path.string() + ": line " + std::to_string(i + 2);
    if (!std::getline(in, line))
      throw StructuralError(where + ": header promised " + std::to_string(n) + " rows, body ended early");
    std::istringstream row(line);
    std::string token;
    for (long long f = 0; f < m; ++f) {
      if (!(row >> token) || token == "|")
        throw StructuralError(where + ": expected " + std::to_string(m) + " feature values");
      ds.features(static_cast<std::size_t>(i), static_cast<std::size_t>(f)) = parse_double(token, where);
    }
    if (!(row >> token) || token != "|") throw ParseError(where + ": expected '|' separator after features");
    for (long long j = 0; j < l; ++j) {
      if (!(row >> token))
        throw StructuralError(where + ": expected " + std::to_string(l) + " label tokens");
      Label value;
      if (token == "0") value = Label::Neg;
      else if (token == "1") value = Label::Pos;
      else if (token == "?") value = Label::Missing;
      else throw ParseError(where + ": label token '" + token + "' is not one of {0,1,?}");
      ds.labels(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = value;
    }
    if (row >> token) throw StructuralError(where + ": trailing tokens beyond " + std::to_string(l) + " labels");
  }
  while (std::getline(in, line))
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
      throw StructuralError(path.string() + ": more rows than the header promised");
  return ds;
}

/// Converts a loaded dataset to a fully labeled one; rejects Missing entries.
inline Dataset to_full(const LoadedDataset& loaded) {
  Dataset ds;
  ds.features = loaded.features;
  ds.labels = BinaryLabels(loaded.labels.rows(), loaded.labels.cols(), 0);
  for (std::size_t i = 0; i < loaded.labels.rows(); ++i)
    for (std::size_t j = 0; j < loaded.labels.cols(); ++j) {
      const Label v = loaded.labels(i, j);
      if (v == Label::Missing)
        throw StructuralError("to_full: entry (" + std::to_string(i) + "," + std::to_string(j) +
                              ") is missing; a fully labeled dataset is required here");
      ds.labels(i, j) = v == Label::Pos ? 1 : 0;
    }
  ds.class_names = default_class_names(loaded.labels.cols());
  return ds;
}

}  // namespace pml
