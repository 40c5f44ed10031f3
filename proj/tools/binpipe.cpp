// binpipe: inspect, render, verify and benchmark pipeline variants.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binpipe/commands.hpp"

namespace {

std::vector<std::string> split_commas(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& s : in) {
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ',');)
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binned programmable pipelines on the CPU"};
  app.require_subcommand(1);

  binpipe::RunConfig cfg;
  std::vector<std::string> variants;
  std::vector<std::string> overrides;
  std::vector<std::string> costs;
  std::string screen = "1024x768";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--variant", variants, "baseline, freepipe, binned, binned_fused, deferred, reyes")->delimiter(',');
    sub->add_option("--pipeline-file", cfg.pipeline_file, "JSON pipeline description");
    sub->add_option("--scene", cfg.scene_path, "scene file (.obj or .patches)");
    sub->add_option("--proc-scene", cfg.proc_scene, "quad | mixed[:N[:SEED]] | small[:N[:SEED]] | patches[:NXxNY] | teapot");
    sub->add_option("--screen", screen, "WxH")->capture_default_str();
    sub->add_option("--workers", cfg.workers)->check(CLI::Range(1, 256))->capture_default_str();
    sub->add_option("--override", overrides, "Stage.bin=WxH or Stage.schedule=KIND[:split]");
    sub->add_option("--out", cfg.out_path, "image path (binary PPM)");
    sub->add_option("--stats", cfg.stats_path, "stats JSON path");
    sub->add_option("--repeat", cfg.repeat)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--shader-cost", costs, "extra iterations per shaded sample; bench takes a list")->delimiter(',');
    sub->add_option("--cycle-cap", cfg.cycle_cap)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--strip-mine", cfg.strip_mine, "input batch size, 0 = everything at once")->capture_default_str();
    sub->add_flag("--fault-skew-depth", cfg.fault_skew_depth, "corrupt the depth key (negative control)");
  };

  auto* inspect = app.add_subcommand("inspect", "print skeleton, schedule and kernel mapping");
  auto* render = app.add_subcommand("render", "render an image and a stats document");
  auto* verify = app.add_subcommand("verify", "compare against the reference renderer");
  auto* bench = app.add_subcommand("bench", "time variants");
  for (auto* s : {inspect, render, verify, bench}) common(s);

  CLI11_PARSE(app, argc, argv);

  int w = 0, h = 0;
  char extra = 0;
  if (std::sscanf(screen.c_str(), "%dx%d%c", &w, &h, &extra) != 2 || w <= 0 || h <= 0) {
    std::cerr << "error: --screen expects WxH with positive sizes\n";
    return 2;
  }
  cfg.screen = {w, h};
  try {
    for (const auto& o : overrides) binpipe::parse_override(o, cfg.overrides);
    for (const auto& c : split_commas(costs)) cfg.shader_costs.push_back(std::stoi(c));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  variants = split_commas(variants);
  if (!variants.empty()) cfg.variant = variants.front();
  if (!cfg.shader_costs.empty()) cfg.shader_cost = cfg.shader_costs.front();

  if (inspect->parsed()) return binpipe::cmd_inspect(cfg, std::cout, std::cerr);
  if (render->parsed()) return binpipe::cmd_render(cfg, std::cout, std::cerr);
  if (verify->parsed()) return binpipe::cmd_verify(cfg, std::cout, std::cerr);
  cfg.variants = variants;
  return binpipe::cmd_bench(cfg, std::cout, std::cerr);
}
