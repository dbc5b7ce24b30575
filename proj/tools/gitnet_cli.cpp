// Command-line front end: generate, train, eval, flops.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gitnet/commands.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kNumeric = 4 };

gitnet::RunConfig load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
  gitnet::RunConfig cfg = gitnet::load_run_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw gitnet::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.train.validate();
  return cfg;
}

void print_eval(const gitnet::EvalReport& r) {
  std::printf("samples %zu\nmean_rel_error %.6g\nmin %.6g\nmedian %.6g\nmax %.6g\n", r.errors.size(), r.mean, r.min,
              r.median, r.max);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GIT-Net operator learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* gen = app.add_subcommand("generate", "Generate train/test datasets (OPDS1)");
  gen->add_option("config", config_path, "Run configuration")->required();
  gen->add_option("--set", overrides, "Override a config entry, key=value");

  auto* tr = app.add_subcommand("train", "Fit PCA bases and train a model");
  tr->add_option("config", config_path, "Run configuration")->required();
  tr->add_option("--set", overrides, "Override a config entry, key=value");
  std::string activation;
  tr->add_option("--activation", activation, "Hidden activation override (gelu|identity|relu)");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string checkpoint, data, errors_out;
  ev->add_option("--checkpoint", checkpoint, "GITN1 checkpoint")->required();
  ev->add_option("--data", data, "OPDS1 dataset")->required();
  ev->add_option("--errors", errors_out, "Write per-sample errors CSV here");

  auto* fl = app.add_subcommand("flops", "Evaluation cost report (CSV)");
  fl->add_option("config", config_path, "Run configuration")->required();
  fl->add_option("--set", overrides, "Override a config entry, key=value");
  bool instrument = false;
  std::string cost_out;
  fl->add_flag("--instrument", instrument, "Add counts measured on live forward passes");
  fl->add_option("--output", cost_out, "Write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) {
      std::cout << gitnet::cmd_generate(load_with_overrides(config_path, overrides)) << '\n';
    } else if (*tr) {
      if (!activation.empty()) overrides.push_back("activation=" + activation);
      const auto cfg = load_with_overrides(config_path, overrides);
      const auto s = gitnet::cmd_train(cfg);
      std::printf("P_u %zu, P_v %zu, %zu parameters\n", s.p_u, s.p_v, s.parameters);
      std::printf("initial train loss %.6g\n", s.initial_train_loss);
      if (!s.history.empty()) {
        std::printf("final train loss %.6g, test rel error %.6g\n", s.history.back().train_loss,
                    s.history.back().test_rel_error);
      }
      std::printf("checkpoint -> %s\nhistory -> %s\n", cfg.checkpoint.c_str(), cfg.history.c_str());
    } else if (*ev) {
      const auto ckpt = gitnet::load_checkpoint(checkpoint);
      const auto report = gitnet::evaluate(ckpt, gitnet::read_dataset(data));
      print_eval(report);
      if (!errors_out.empty()) gitnet::write_file(errors_out, gitnet::errors_csv(report.errors));
    } else if (*fl) {
      const std::string csv = gitnet::cmd_flops(load_with_overrides(config_path, overrides), instrument);
      if (cost_out.empty()) {
        std::cout << csv;
      } else {
        gitnet::write_file(cost_out, csv);
      }
    }
  } catch (const gitnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const gitnet::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const gitnet::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const gitnet::ShapeError& e) {
    std::cerr << "shape mismatch: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
