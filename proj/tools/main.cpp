#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "radarsr/errors.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kDivergence = 3 };

}  // namespace

int main(int argc, char** argv) {
  using namespace radarsr;
  using namespace radarsr::cli;

  CLI::App app{"Radar point-cloud enhancement with a mean-reverting diffusion model"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, seed, out;
  std::vector<std::string> overrides;
  int jobs = 1;
  app.add_option("--config", config_path, "key=value config file with [sections]")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "base seed for every random draw");
  app.add_option("--jobs", jobs, "files processed concurrently")->default_val(1);
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--set", overrides, "override a config key, e.g. --set train.w=0");

  std::vector<std::string> inputs;
  std::string model, enhanced;
  bool oracle = false;

  auto* synth = app.add_subcommand("synth", "generate paired synthetic LiDAR/radar trajectories");
  auto* preprocess = app.add_subcommand("preprocess", "ground removal, FOV crop, radar aggregation, BEV rasterization");
  preprocess->add_option("sequences", inputs, "synthetic or recorded sequence directories")
      ->required()
      ->check(CLI::ExistingDirectory);
  auto* train = app.add_subcommand("train", "train the noise predictor on BEV pairs");
  train->add_option("bev", inputs, "BEV sequence directories")->required()->check(CLI::ExistingDirectory);
  auto* enhance = app.add_subcommand("enhance", "run the reverse diffusion on radar BEVs");
  enhance->add_option("bev", inputs, "BEV sequence directories")->required()->check(CLI::ExistingDirectory);
  auto* model_opt = enhance->add_option("--model", model, "checkpoint written by train")->check(CLI::ExistingFile);
  auto* oracle_opt = enhance->add_flag("--oracle", oracle, "use the LiDAR BEV as an exact noise predictor");
  model_opt->excludes(oracle_opt);
  auto* eval = app.add_subcommand("eval", "CD/MHD/UCD/UMHD of radar and enhanced clouds against LiDAR");
  eval->add_option("bev", inputs, "BEV sequence directories")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--enhanced", enhanced, "root written by enhance")->check(CLI::ExistingDirectory);
  auto* reg = app.add_subcommand("register", "ICP registration recall on frame pairs");
  reg->add_option("bev", inputs, "BEV sequence directories with poses.txt")->required()->check(CLI::ExistingDirectory);
  reg->add_option("--enhanced", enhanced, "root written by enhance")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (enhance->parsed() && model.empty() && !oracle) throw ValidationError("enhance needs --model or --oracle");
    const PipelineConfig pc = PipelineConfig::from(load_config(config_path, overrides, seed), jobs);
    std::vector<fs::path> dirs(inputs.begin(), inputs.end());
    if (synth->parsed()) cmd_synth(pc, out);
    if (preprocess->parsed()) cmd_preprocess(pc, dirs, out);
    if (train->parsed()) cmd_train(pc, dirs, out);
    if (enhance->parsed()) cmd_enhance(pc, dirs, model, oracle, out);
    if (eval->parsed()) cmd_eval(pc, dirs, enhanced, out);
    if (reg->parsed()) cmd_register(pc, dirs, enhanced, out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
