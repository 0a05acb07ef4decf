#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "pml/dataset.hpp"
#include "pml/io.hpp"

using namespace pml;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "pml_io_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("full dataset round-trips exactly") {
  Dataset ds;
  ds.features = Matrix::from_rows({{0.125, -3.5}, {1.0 / 3.0, 2e-9}, {-0.0, 7.25}});
  ds.labels = BinaryLabels::from_rows({{1, 0, 1}, {0, 1, 0}, {1, 1, 1}});
  ds.class_names = default_class_names(3);

  const auto path = temp_file("full.txt");
  save_dataset(ds, path);
  const LoadedDataset loaded = load_dataset(path);
  CHECK(loaded.features == ds.features);
  const Dataset back = to_full(loaded);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("masked dataset round-trips with missing tokens") {
  Matrix features = Matrix::from_rows({{1.5, 2.5}, {3.5, 4.5}});
  LabelMatrix labels = LabelMatrix::from_rows(
      {{Label::Pos, Label::Missing, Label::Neg}, {Label::Missing, Label::Missing, Label::Pos}});
  const auto path = temp_file("masked.txt");
  save_dataset(features, labels, path);
  const LoadedDataset loaded = load_dataset(path);
  CHECK(loaded.features == features);
  CHECK(loaded.labels == labels);
  CHECK(has_missing(loaded.labels));
  CHECK_THROWS_AS(to_full(loaded), StructuralError);
}

TEST_CASE("label token outside {0,1,?} is a parse error with line number") {
  const auto path = temp_file("badtoken.txt");
  write_text(path, "1 2 3\n0.5 0.5 | 1 2 0\n");
  CHECK_THROWS_MATCHES(load_dataset(path), ParseError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 2")));
}

TEST_CASE("header promising more rows than the body is a structural error") {
  const auto path = temp_file("shortbody.txt");
  write_text(path, "1 2 2\n");
  CHECK_THROWS_AS(load_dataset(path), StructuralError);
}

TEST_CASE("extra rows beyond the header are a structural error") {
  const auto path = temp_file("longbody.txt");
  write_text(path, "1 1 2\n0.5 | 1 0\n0.25 | 0 1\n");
  CHECK_THROWS_AS(load_dataset(path), StructuralError);
}

TEST_CASE("missing separator is a parse error") {
  const auto path = temp_file("nosep.txt");
  write_text(path, "1 2 2\n0.5 0.5 1 0\n");
  CHECK_THROWS_AS(load_dataset(path), ParseError);
}

TEST_CASE("wrong feature count is a structural error") {
  const auto path = temp_file("fewfeat.txt");
  write_text(path, "1 3 2\n0.5 0.5 | 1 0\n");
  CHECK_THROWS_AS(load_dataset(path), StructuralError);
}

TEST_CASE("malformed header is a parse error") {
  const auto path = temp_file("badheader.txt");
  write_text(path, "three 2 2\n");
  CHECK_THROWS_MATCHES(load_dataset(path), ParseError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 1")));
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 3.141592653589793, 1e17, -0.0}) {
    const std::string s = format_double(v);
    CHECK(parse_double(s, "test") == v);
  }
}
