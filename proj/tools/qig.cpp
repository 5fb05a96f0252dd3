#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qig/cli.hpp"

namespace {

using qig::cli::json;

json load_config(const std::string& path, const std::string& inline_json) {
  json cfg = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw qig::ConfigError("cannot open config '" + path + "'");
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw qig::ConfigError("config '" + path + "': " + e.what());
    }
  }
  if (!inline_json.empty()) {
    try {
      cfg.merge_patch(json::parse(inline_json));
    } catch (const json::parse_error& e) {
      throw qig::ConfigError(std::string("--set: ") + e.what());
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone quantum Fisher metrics: batch checks and scans"};
  app.set_version_flag("--version", qig::cli::kVersion);
  app.require_subcommand(1);

  std::string config_path, inline_json, out_path, format = "json";
  std::uint64_t seed = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  for (const auto& name : qig::cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--set", inline_json, "inline JSON merged over the config (RFC 7386 merge patch)");
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version exit 0; usage errors are operational
    return app.exit(e) == 0 ? 0 : 1;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    if (config_path.empty() && inline_json.empty()) throw qig::ConfigError("need --config or --set");
    qig::cli::RunOptions opt;
    if (sub->count("--seed")) opt.seed = seed;
    opt.threads = threads;
    const auto report = qig::cli::run(sub->get_name(), load_config(config_path, inline_json), opt);
    const std::string text = format == "csv" ? qig::cli::to_csv(report) : qig::cli::to_json(report);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path);
      if (!(out << text)) throw qig::ConfigError("cannot write '" + out_path + "'");
    }
    if (!report.passed) std::cerr << "qig " << sub->get_name() << ": verdict failures, see rows with pass=false\n";
    return qig::cli::exit_code(report);
  } catch (const std::exception& e) {
    std::cerr << "qig " << sub->get_name() << ": " << e.what() << '\n';
    return 1;
  }
}
