// docsynth: generate randomized document-scene datasets.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <nlohmann/json.hpp>
#include <regex>

#include "docsynth/pipeline.hpp"

namespace {

void add_run_flags(CLI::App& cmd, docsynth::RunConfig& cfg, std::string& res) {
  cmd.add_option("--spec", cfg.spec_path, "randomization spec (JSON)")->required();
  cmd.add_option("--input", cfg.input_dir, "directory of base document images");
  cmd.add_option("--output", cfg.output_dir, "dataset output directory");
  cmd.add_option("--count", cfg.count, "number of samples");
  cmd.add_option("--seed", cfg.seed, "master seed");
  cmd.add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--spp", cfg.spp, "samples per pixel");
  cmd.add_option("--res", res, "resolution WxH");
}

int report(const docsynth::RunSummary& s, const char* command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["status"] = static_cast<int>(s.status);
  j["message"] = s.message;
  j["samples"] = s.samples;
  j["wall_seconds"] = s.wall_seconds;
  j["output_dir"] = s.output_dir.string();
  if (s.failed_sample) j["failed_sample"] = *s.failed_sample;
  std::cout << j.dump() << '\n';
  if (s.status != docsynth::ExitCode::kOk) std::cerr << "docsynth: " << s.message << '\n';
  return static_cast<int>(s.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-randomized synthetic document scenes"};
  app.require_subcommand(1);
  docsynth::RunConfig cfg;
  std::string res;
  auto* generate = app.add_subcommand("generate", "render a dataset");
  auto* preview = app.add_subcommand("preview", "render sample 0 with a ground-truth overlay");
  add_run_flags(*generate, cfg, res);
  add_run_flags(*preview, cfg, res);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (!res.empty()) {
    std::smatch m;
    static const std::regex pattern(R"((\d+)[xX](\d+))");
    if (!std::regex_match(res, m, pattern)) {
      std::cerr << "docsynth: --res expects WxH, got '" << res << "'\n";
      return static_cast<int>(docsynth::ExitCode::kUsage);
    }
    cfg.resolution = docsynth::Resolution{std::stoi(m[1]), std::stoi(m[2])};
  }
  if (preview->parsed()) {
    cfg.preview = true;
    return report(docsynth::run_preview(cfg), "preview");
  }
  const auto progress = [](std::uint64_t done, std::uint64_t total) {
    std::fprintf(stderr, "\r[%llu/%llu]", static_cast<unsigned long long>(done), static_cast<unsigned long long>(total));
    if (done == total) std::fputc('\n', stderr);
  };
  return report(docsynth::run_generate(cfg, progress), "generate");
}
