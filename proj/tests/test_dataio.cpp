#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "dbn/dataio.hpp"
#include "dbn/rng.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace dbn;
using namespace dbn::dataio;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

PgmErrorKind kind_of(const std::string& text) {
  try {
    decode_pgm(bytes(text));
  } catch (const PgmError& e) {
    return e.kind();
  }
  FAIL("expected a PgmError");
  return PgmErrorKind::io;
}

void touch_pgm(const fs::path& p, std::uint8_t v = 1) {
  fs::create_directories(p.parent_path());
  save_pgm(GrayImage(2, 2, v), p);
}

}  // namespace

TEST_CASE("P5 and P2 decode") {
  std::string p5 = "P5\n2 2\n255\n";
  p5 += std::string{char(0), char(255), char(128), char(7)};
  const auto img = decode_pgm(bytes(p5));
  CHECK(img == GrayImage(2, 2, std::vector<std::uint8_t>{0, 255, 128, 7}));
  CHECK(decode_pgm(bytes("P2 1 1 255 200")) == GrayImage(1, 1, std::uint8_t(200)));
  CHECK(decode_pgm(bytes("P2\n# comment\n2 1\n# another\n15\n3 15\n")) ==
        GrayImage(2, 1, std::vector<std::uint8_t>{3, 15}));
}

TEST_CASE("PGM errors are distinct and carry offsets") {
  CHECK(kind_of("P6 1 1 255 x") == PgmErrorKind::bad_magic);
  CHECK(kind_of("P5 0 4 255\n") == PgmErrorKind::zero_dimension);
  CHECK(kind_of("P5 1 1 65535\nxx") == PgmErrorKind::maxval_too_large);
  CHECK(kind_of("P5 2 2 255\nabc") == PgmErrorKind::truncated_payload);
  CHECK(kind_of("P5 2 x 255\n") == PgmErrorKind::malformed_header);
  CHECK(kind_of("P2 2 1 255 1 q") == PgmErrorKind::bad_ascii_sample);
  CHECK(kind_of("P2 1 1 100 101") == PgmErrorKind::bad_ascii_sample);
  try {
    decode_pgm(bytes("P5 2 2 255\nabc"));
  } catch (const PgmError& e) {
    CHECK(e.offset() >= 11);
  }
}

TEST_CASE("encode writes the fixed header and round-trips random rasters") {
  const auto one = encode_pgm(GrayImage(1, 1, std::uint8_t(0)));
  CHECK(std::string(one.begin(), one.begin() + 11) == "P5\n1 1\n255\n");
  CHECK(one.size() == 12);
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto img = oracle::random_image(rng, 1 + rng.below(40), 1 + rng.below(40));
    CHECK(decode_pgm(encode_pgm(img)) == img);
  }
}

TEST_CASE("save/load round-trip and I/O failure") {
  test::TempDir dir("pgm");
  const GrayImage img(3, 2, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
  save_pgm(img, dir.path() / "a.pgm");
  CHECK(load_pgm(dir.path() / "a.pgm") == img);
  CHECK_THROWS_AS(save_pgm(img, dir.path() / "missing" / "sub" / "a.pgm"), DataError);
  CHECK_THROWS_AS(load_pgm(dir.path() / "nope.pgm"), DataError);
}

TEST_CASE("stack_to_rgb triples each sample") {
  const auto rgb = stack_to_rgb(GrayImage(2, 1, std::vector<std::uint8_t>{0, 255}));
  CHECK(std::vector<std::uint8_t>(rgb.bytes().begin(), rgb.bytes().end()) ==
        std::vector<std::uint8_t>{0, 0, 0, 255, 255, 255});
  CHECK(rgb.width() == 2);
  CHECK(rgb.height() == 1);
}

TEST_CASE("scan_dataset orders classes and entries bytewise") {
  test::TempDir dir("scan");
  for (const char* c : {"pituitary", "glioma", "notumor", "meningioma"})
    for (const char* f : {"b.pgm", "a.pgm", "C.PGM"}) touch_pgm(dir.path() / c / f);
  std::ofstream(dir.path() / "glioma" / "notes.txt") << "x";
  const auto m = scan_dataset(dir.path());
  CHECK(m.class_names == std::vector<std::string>{"glioma", "meningioma", "notumor", "pituitary"});
  REQUIRE(m.entries.size() == 12);
  CHECK(m.entries[0].path == "glioma/C.PGM");
  CHECK(m.entries[1].path == "glioma/a.pgm");
  CHECK(m.entries.back().class_index == 3);
}

TEST_CASE("scan_dataset rejects degenerate layouts") {
  test::TempDir dir("scan_bad");
  touch_pgm(dir.path() / "only" / "a.pgm");
  CHECK_THROWS_AS(scan_dataset(dir.path()), DataError);
  fs::create_directories(dir.path() / "empty");
  CHECK_THROWS_AS(scan_dataset(dir.path()), DataError);
}

TEST_CASE("split is a stratified, seeded partition") {
  DatasetManifest m{"root", {"a", "b"}, {}};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 100; ++i)
      m.entries.push_back({std::string(k ? "b/" : "a/") + std::to_string(1000 + i) + ".pgm", std::size_t(k)});
  const auto [train, val] = split_manifest(m, {0.8, 9});
  CHECK(train.count_of(0) == 80);
  CHECK(train.count_of(1) == 80);
  CHECK(val.count_of(0) == 20);
  std::set<std::string> all;
  for (const auto& e : train.entries) all.insert(e.path);
  for (const auto& e : val.entries) CHECK(all.insert(e.path).second);
  CHECK(all.size() == 200);
  const auto again = split_manifest(m, {0.8, 9});
  CHECK(again.first.entries == train.entries);
  CHECK(split_manifest(m, {0.8, 10}).first.entries != train.entries);
  CHECK(std::is_sorted(train.entries.begin(), train.entries.end(),
                       [](const auto& a, const auto& b) { return a.path < b.path; }));
}

TEST_CASE("split edge cases") {
  DatasetManifest m{"root", {"a", "b"}, {}};
  for (int i = 0; i < 10; ++i) m.entries.push_back({"a/" + std::to_string(i), 0});
  for (int i = 0; i < 10; ++i) m.entries.push_back({"b/" + std::to_string(i), 1});
  CHECK(split_manifest(m, {0.5, 1}).first.entries.size() == 10);
  CHECK_THROWS_AS(split_manifest(m, {1.0, 1}), ConfigError);
  m.entries.resize(11);
  CHECK_THROWS_AS(split_manifest(m, {0.5, 1}), DataError);
}

TEST_CASE("synthetic dataset: counts, determinism, separable intensity histograms") {
  test::TempDir a("synth_a"), b("synth_b");
  const auto m = generate_synthetic_dataset(a.path(), 10, 32, 7);
  CHECK(m.entries.size() == 40);
  CHECK(m.class_names == synthetic_class_names());
  generate_synthetic_dataset(b.path(), 10, 32, 7);
  for (const auto& e : m.entries) CHECK(load_pgm(a.path() / e.path) == load_pgm(b.path() / e.path));

  // Class-mean histograms over 16 bins; every pair must differ clearly.
  std::vector<std::vector<double>> hist(4, std::vector<double>(16, 0.0));
  for (const auto& e : m.entries) {
    const auto img = load_pgm(a.path() / e.path);
    for (auto p : img.pixels()) hist[e.class_index][p / 16] += 1.0 / 10.0;
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double chi2 = 0;
      for (int k = 0; k < 16; ++k) {
        const double s = hist[i][k] + hist[j][k];
        if (s > 0) chi2 += (hist[i][k] - hist[j][k]) * (hist[i][k] - hist[j][k]) / s;
      }
      CHECK(chi2 > 10.0);
    }
}

TEST_CASE("manifest CSV round-trip") {
  test::TempDir dir("csv");
  DatasetManifest m{dir.path(), {"x,y", "plain"}, {{"x,y/a.pgm", 0}, {"plain/b.pgm", 1}}};
  write_manifest_csv(m, dir.path() / "m.csv");
  std::ifstream f(dir.path() / "m.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "path,class_index,class_name");
  const auto back = read_manifest_csv(dir.path() / "m.csv");
  CHECK(back.entries == m.entries);
  CHECK(back.class_names == m.class_names);
  CHECK(back.root == dir.path());
  CHECK(split_csv_line("\"a,b\",\"c\"\"d\",e") == std::vector<std::string>{"a,b", "c\"d", "e"});
}
