// oneclick: batch simulation harness.
//
//   oneclick generate --out DIR [--images N --min-objects A --max-objects B --classes C --seed S]
//   oneclick simulate --dataset DIR [--clicks exact|jitter:S] [--noise P.json] [--config E.json]
//                     [--seed N] [--pruning exhaustive|best-first] [--out R.json]
//                     [--sweep anchors|depth --values a,b,c] [--timing]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oneclick/dataset.hpp"
#include "oneclick/json_io.hpp"
#include "oneclick/simulation.hpp"

namespace {

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-click annotation refinement: simulation and reproduction harness"};
  app.require_subcommand(1);

  oneclick::SyntheticCorpusSpec corpus;
  std::string generate_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic ground-truth corpus (native JSON)");
  gen->add_option("--out", generate_out, "Output directory")->required();
  gen->add_option("--images", corpus.images, "Number of images")->check(CLI::NonNegativeNumber);
  gen->add_option("--min-objects", corpus.min_objects, "Minimum objects per image");
  gen->add_option("--max-objects", corpus.max_objects, "Maximum objects per image");
  gen->add_option("--classes", corpus.classes, "Number of classes")->check(CLI::PositiveNumber);
  gen->add_option("--seed", corpus.seed, "Corpus seed");

  std::string dataset, clicks = "exact", noise_file, config_file, out_file, pruning, sweep_param;
  std::vector<int> sweep_values;
  std::uint64_t seed = 0;
  int workers = 0;
  bool timing = false;
  auto* sim = app.add_subcommand("simulate", "Replay synthetic annotators and evaluate raw vs refined output");
  sim->add_option("--dataset", dataset, "Dataset directory (*.json / *.xml)")->required();
  sim->add_option("--clicks", clicks, "Click model: exact | jitter:<sigma>");
  sim->add_option("--noise", noise_file, "Noise profile JSON");
  sim->add_option("--config", config_file, "Engine config JSON");
  sim->add_option("--seed", seed, "Seed for detector noise and click jitter");
  sim->add_option("--out", out_file, "Report path (stdout when omitted)");
  sim->add_option("--pruning", pruning, "exhaustive | best-first")
      ->check(CLI::IsMember({"exhaustive", "best-first"}));
  auto* sweep_opt = sim->add_option("--sweep", sweep_param, "Swept parameter: anchors | depth")
                        ->check(CLI::IsMember({"anchors", "depth"}));
  sim->add_option("--values", sweep_values, "Comma-separated sweep values")->delimiter(',')->needs(sweep_opt);
  sweep_opt->needs(sim->get_option("--values"));
  sim->add_option("--workers", workers, "Worker threads (0: hardware concurrency)");
  sim->add_flag("--timing", timing, "Record wall_ms in the report (report no longer reproducible)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto images = oneclick::synthesize_corpus(corpus);
      oneclick::write_dataset(generate_out, images);
      std::cerr << "wrote " << images.size() << " images to " << generate_out << '\n';
      return 0;
    }

    oneclick::SimulationOptions options;
    options.clicks = oneclick::ClickModel::parse(clicks);
    if (!noise_file.empty()) options.noise = oneclick::noise_profile_from_json(oneclick::read_json_file(noise_file));
    if (!config_file.empty()) options.engine = oneclick::engine_config_from_json(oneclick::read_json_file(config_file));
    if (!pruning.empty()) options.engine.pruning = oneclick::pruning_from_string(pruning);
    options.seed = seed;
    options.workers = workers;
    options.timing = timing;

    const auto data = oneclick::load_dataset(dataset);
    if (sweep_param.empty()) {
      const auto report = oneclick::simulate(data, options);
      write_output(out_file, oneclick::to_json(report, options).dump(2));
    } else {
      const auto param = oneclick::sweep_param_from_string(sweep_param);
      const auto rows = oneclick::sweep(data, options, param, sweep_values);
      write_output(out_file, oneclick::sweep_to_json(param, rows, options).dump(2));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
