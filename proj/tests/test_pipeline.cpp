#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dbn/dataio.hpp"
#include "dbn/error.hpp"
#include "dbn/nnet/checkpoint.hpp"
#include "dbn/pipeline/commands.hpp"
#include "dbn/pipeline/config.hpp"
#include "dbn/pipeline/run_record.hpp"
#include "support/tempdir.hpp"

using namespace dbn;
using namespace dbn::pipeline;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "/base", "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

RunConfig tiny_run(const fs::path& dir) {
  RunConfig c;
  c.dataset_root = dir / "data";
  c.output_dir = dir / "out";
  c.synth_per_class = 5;
  c.synth_size = 24;
  c.image_size = 16;
  c.net_width = 4;
  c.train.epochs = 2;
  c.train.batch_size = 4;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("sha256 known answers") {
  const std::string abc = "abc";
  CHECK(sha256_hex({reinterpret_cast<const unsigned char*>(abc.data()), abc.size()}) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config parsing") {
  const auto c = parse_config("# comment\n\nimage_size = 48\nenhancements = hist_eq, blur\nseed=9\n"
                              "dataset_root = raw\naugment = false\nlearning_rate = 5e-4\n",
                              "/base");
  CHECK(c.image_size == 48);
  CHECK(c.enhancements == std::vector<std::string>{"hist_eq", "blur"});
  CHECK(c.seed == 9);
  CHECK(c.dataset_root == fs::path("/base/raw"));
  CHECK_FALSE(c.augment_enabled);
  CHECK(c.train.learning_rate == 5e-4);
  CHECK(parse_config("enhancements =\n").enhancements.empty());

  CHECK(config_error("bogus = 1\n").find("cfg:1") != std::string::npos);
  CHECK(config_error("seed = 1\n\nseed = 2\n").find("cfg:3") != std::string::npos);
  CHECK(config_error("image_size = abc\n") != "");
  CHECK(config_error("image_size 32\n") != "");
  CHECK(config_error("image_size = 8\n") != "");
  CHECK(config_error("enhancements = sharpen\n") != "");
  CHECK(config_error("blur_size = 4\n") != "");
  CHECK(config_error("train_fraction = 1.5\n") != "");
}

TEST_CASE("config snapshot round-trips") {
  RunConfig c;
  c.train.learning_rate = 0.1 + 0.2;
  c.fcm.tau = 0.7;
  c.enhancements = {"clahe"};
  c.output_dir = "/tmp/x y";
  const auto text = to_text(c);
  CHECK(to_text(parse_config(text)) == text);
  CHECK(parse_config(text).train.learning_rate == c.train.learning_rate);
}

TEST_CASE("preprocess_image output size and empty enhancement list") {
  RunConfig c;
  c.image_size = 16;
  c.enhancements.clear();
  GrayImage img(40, 30, std::uint8_t(0));
  for (std::size_t y = 5; y < 25; ++y)
    for (std::size_t x = 10; x < 30; ++x) img.at(x, y) = 120;
  const auto out = preprocess_image(img, c);
  CHECK(out == GrayImage(16, 16, std::uint8_t(120)));
  c.enhancements = {"hist_eq"};
  CHECK(preprocess_image(img, c) == GrayImage(16, 16, std::uint8_t(255)));
}

TEST_CASE("report demo reproduces the published macro averages") {
  const auto d = report_demo();
  REQUIRE(d.classes.size() == 4);
  CHECK(d.macro.f1 == doctest::Approx(0.88625).epsilon(1e-12));
  CHECK(d.macro.precision == doctest::Approx(0.88675).epsilon(1e-12));
  CHECK(d.macro.recall == doctest::Approx(0.8875).epsilon(1e-12));
  CHECK(report_demo_text().find("0.886") != std::string::npos);
}

TEST_CASE("pipeline: synth, preprocess, fcm, train, evaluate") {
  test::TempDir dir("pipe");
  const auto c = tiny_run(dir.path());
  const Layout lay(c);
  std::ostringstream log;

  cmd_synth(c, log);
  CHECK(dataio::scan_dataset(c.dataset_root).entries.size() == 20);

  cmd_preprocess(c, log);
  const auto manifest = dataio::read_manifest_csv(lay.manifest);
  CHECK(manifest.entries.size() == 20);
  for (const auto& e : manifest.entries) {
    const auto img = dataio::load_pgm(manifest.root / e.path);
    CHECK(img.width() == 16);
    CHECK(img.height() == 16);
  }
  CHECK(dataio::read_manifest_csv(lay.train_csv).entries.size() == 16);
  CHECK(dataio::read_manifest_csv(lay.val_csv).entries.size() == 4);

  cmd_fcm(c, log);
  CHECK(fs::exists(lay.fcm / "summary.csv"));
  cmd_train(c, log);
  CHECK(fs::exists(lay.checkpoint));
  CHECK(slurp(lay.history).rfind("epoch,", 0) == 0);
  cmd_evaluate(c, log);
  for (const char* f : {"predictions.csv", "report.csv", "report.txt", "roc.svg", "confusion.csv", "confusion.svg"})
    CHECK(fs::exists(lay.out / f));

  for (const char* cmd : {"synth", "preprocess", "fcm", "train", "evaluate"}) {
    const auto rec = lay.out / (std::string("run_") + cmd + ".txt");
    REQUIRE(fs::exists(rec));
    CHECK(slurp(rec).rfind(std::string("command: ") + cmd + "\n", 0) == 0);
  }
  CHECK(verify_run_record(lay.out / "run_evaluate.txt", lay.out).empty());
  std::ofstream(lay.out / "report.csv", std::ios::app) << "tampered\n";
  CHECK(verify_run_record(lay.out / "run_evaluate.txt", lay.out) == std::vector<std::string>{"report.csv"});

  // A checkpoint for a different class count is rejected.
  nnet::NetConfig three;
  three.input_size = 16;
  three.width = 4;
  three.classes = 3;
  nnet::Network other(three);
  nnet::save_checkpoint(dir.path() / "other.ckpt", other);
  CHECK_THROWS_AS(cmd_evaluate(c, log, dir.path() / "other.ckpt"), DataError);
}

TEST_CASE("fcm masks gate the training images") {
  test::TempDir dir("pipe_mask");
  auto c = tiny_run(dir.path());
  c.fcm_mask_enabled = true;
  c.train.epochs = 1;
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_preprocess(c, log);
  CHECK_THROWS_AS(cmd_train(c, log), DataError);
  cmd_fcm(c, log);
  const Layout lay(c);
  const auto m = dataio::read_manifest_csv(lay.manifest);
  const auto mask = dataio::load_pgm(lay.fcm / "masks" / m.entries[0].path);
  for (auto p : mask.pixels()) CHECK((p == 0 || p == 255));
  cmd_train(c, log);
  CHECK(fs::exists(lay.checkpoint));
}

TEST_CASE("commands fail cleanly on missing inputs") {
  test::TempDir dir("pipe_missing");
  const auto c = tiny_run(dir.path());
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_preprocess(c, log), DataError);
  CHECK_THROWS_AS(cmd_train(c, log), DataError);
}
