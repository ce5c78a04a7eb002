#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "dbn/error.hpp"
#include "dbn/pipeline/commands.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> size;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value run configuration");
  cmd->add_option("--seed", o.seed, "override the global seed");
  cmd->add_option("--epochs", o.epochs, "override the epoch budget");
  cmd->add_option("--size", o.size, "override the image size");
}

dbn::pipeline::RunConfig resolve(const Overrides& o) {
  dbn::pipeline::RunConfig c = o.config.empty() ? dbn::pipeline::RunConfig{} : dbn::pipeline::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.size) c.image_size = *o.size;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brain MRI tumor classification pipeline"};
  app.require_subcommand(1);
  Overrides o;
  std::string checkpoint;

  auto* synth = app.add_subcommand("synth", "generate the synthetic 4-class dataset");
  auto* pre = app.add_subcommand("preprocess", "crop, resize and enhance the dataset; write split manifests");
  auto* fcm = app.add_subcommand("fcm", "fuzzy c-means segmentation of the preprocessed images");
  auto* train = app.add_subcommand("train", "train the two-branch network");
  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on the validation split");
  auto* demo = app.add_subcommand("report-demo", "macro aggregation of the published per-class results");
  for (auto* c : {synth, pre, fcm, train, eval}) add_common(c, o);
  eval->add_option("--checkpoint", checkpoint, "checkpoint path (default <output_dir>/model.ckpt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (demo->parsed()) {
      std::cout << dbn::pipeline::report_demo_text();
      return 0;
    }
    const auto config = resolve(o);
    if (synth->parsed()) dbn::pipeline::cmd_synth(config, std::cout);
    if (pre->parsed()) dbn::pipeline::cmd_preprocess(config, std::cout);
    if (fcm->parsed()) dbn::pipeline::cmd_fcm(config, std::cout);
    if (train->parsed()) dbn::pipeline::cmd_train(config, std::cout);
    if (eval->parsed())
      dbn::pipeline::cmd_evaluate(config, std::cout,
                                  checkpoint.empty() ? std::nullopt : std::optional<std::filesystem::path>(checkpoint));
    return 0;
  } catch (const dbn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const dbn::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const dbn::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
}
