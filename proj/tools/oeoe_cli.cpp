// oeoe: run / sweep / verify / list-suites.
// Exit codes: 0 success, 1 criterion failure, 2 configuration error.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "oeoe/harness.hpp"
#include "oeoe/suites.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kConfig = 2;

void apply_thread_cap() {
  if (const char* env = std::getenv("OEOE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

int run_suite(const oeoe::Suite& s, bool fast) {
  std::cout << "== " << s.name << " (criterion " << s.criterion << "): "
            << s.summary << (fast ? " [fast]" : "") << '\n';
  const auto t0 = std::chrono::steady_clock::now();
  const bool ok = s.run(fast, std::cout);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (ok ? "PASS " : "FAIL ") << s.name << " (" << secs << " s)\n";
  return ok ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"Oracle-efficient online estimation experiments"};
  app.require_subcommand(1);

  std::string config, grid, out, suite;
  std::uint64_t seed = 0;
  int seeds = 1;
  bool fast = false;

  auto* run = app.add_subcommand("run", "run one protocol instance");
  run->add_option("--config", config, "config document (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "64-bit run seed");
  run->add_option("--out", out, "output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "run a parameter grid over seeds");
  sweep->add_option("--config", config, "base config document")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "grid document: dotted key -> list")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seeds", seeds, "seeds per grid point")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output directory")->required();

  auto* verify = app.add_subcommand("verify", "run an acceptance suite ('all' for every suite)");
  verify->add_option("suite", suite, "suite name")->required();
  verify->add_flag("--fast", fast, "reduced seeds / horizons");

  auto* list = app.add_subcommand("list-suites", "list registered suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*list) {
      for (const auto& s : oeoe::suites())
        std::cout << s.name << "\t" << s.criterion << "\t" << s.summary << '\n';
      return kOk;
    }
    if (*verify) {
      if (suite == "all") {
        int rc = kOk;
        for (const auto& s : oeoe::suites()) rc = std::max(rc, run_suite(s, fast));
        return rc;
      }
      const oeoe::Suite* s = oeoe::find_suite(suite);
      if (!s) {
        std::cerr << "unknown suite '" << suite << "'; see list-suites\n";
        return kConfig;
      }
      return run_suite(*s, fast);
    }
    if (*run) {
      std::ifstream in(config);
      oeoe::json doc = oeoe::json::parse(in);
      if (*seed_opt) doc["seed"] = seed;
      const auto cfg = oeoe::parse_config(
          doc, std::filesystem::path(config).parent_path());
      const auto summary = oeoe::run_and_write(cfg, out);
      std::cout << (cfg.mode == "e2d" ? "regret " : "est_on ") << summary.value
                << '\n';
      return kOk;
    }
    if (*sweep) {
      std::ifstream config_in(config), grid_in(grid);
      const oeoe::json base = oeoe::json::parse(config_in);
      const oeoe::json g = oeoe::json::parse(grid_in);
      const auto rep = oeoe::run_sweep(
          base, std::filesystem::path(config).parent_path(), g, seeds, out);
      for (const auto& row : rep.rows)
        std::cout << row.params.dump() << "  n=" << row.n << "  mean=" << row.mean
                  << "  stderr=" << row.se << '\n';
      for (const auto& f : rep.failures) std::cerr << "failed: " << f << '\n';
      return rep.failures.empty() ? kOk : kFail;
    }
  } catch (const oeoe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code == oeoe::Errc::config ? kConfig : kFail;
  } catch (const oeoe::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kOk;
}
