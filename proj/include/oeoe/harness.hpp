// Protocol runner, adversaries, configuration and persistence.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "oeoe/core.hpp"
#include "oeoe/decision.hpp"
#include "oeoe/estimators.hpp"
#include "oeoe/oracles.hpp"

namespace oeoe {

using nlohmann::json;

// ---------------------------------------------------------------- instances

json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);

// Generators, selected by name in the config ("generator": {...}).
Instance random_binary_instance(int n_f, int n_x, std::uint64_t seed);
Instance all_binary_instance(int n_x);
Instance threshold_instance(int n);  // f_i(x_j) = 1{j ≥ i}, i, j ∈ [n]
Instance indicator_instance(int n);  // f_i(x_j) = 1{j = i}
Instance square_instance(int n_f, int n_x, std::uint64_t seed);
Instance generate_instance(const json& gen);

json dmso_to_json(const DmsoClass& cls);
DmsoClass dmso_from_json(const json& j);  // {"cb": {...}} or explicit laws
json mdp_to_json(const TabularMdp& m);
TabularMdp mdp_from_json(const json& j);

// ---------------------------------------------------------------- adversary

enum class AdversaryKind {
  fixed,
  block,               // x = min(⌈t/⌈β⌉⌉, |X|)
  shifting_threshold,  // x = min(⌈t/(⌊β⌋+1)⌉, |X|)
  unseen,              // lowest covariate ≠ i★ unseen before the block
  iid,
  worst_of_k,
};
AdversaryKind adversary_kind_from(const std::string& s);

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::iid;
  std::vector<int> sequence;  // fixed
  double beta = 0.0;          // block / shifting-threshold
  std::vector<double> dist;   // iid (empty = uniform)
  int k = 0;                  // worst-of-k (0 = all covariates)
  bool realized = false;      // react to the realized draw instead of μ
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  // x^(t) from the published μ^(t) (or its realized atom) and the past.
  virtual int select(int t, const Mixture& mu, int realized,
                     std::span<const int> past) = 0;
};

std::unique_ptr<Adversary> make_adversary(const Instance& inst,
                                          const AdversarySpec& spec,
                                          int f_star, Stream rng);

// ---------------------------------------------------------------- config

struct LearnerSpec {
  LearnerKind kind = LearnerKind::vsa;
  double multiplier = 1.0;
  int delay = 0;  // 0 = tuned
  double eta = 0.0;  // 0 = default rate
  int replays = 0;   // 0 = replay_count(...)
  bool parallel = true;
};

struct RunConfig {
  std::string mode = "estimation";  // or "e2d"
  Instance instance;
  OracleSpec oracle;
  LearnerSpec learner;
  AdversarySpec adversary;
  int T = 1;
  std::uint64_t seed = 0;
  int f_star = 0;
  bool verify_oracle = true;
  bool log_mixtures = true;  // off for learners with very large supports
  // e2d mode
  DmsoClass dmso;
  E2dConfig e2d;
  json source;  // the document the config was parsed from
};

// Throws Error(Errc::config) on malformed documents. Relative file paths
// resolve against base_dir.
RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

std::unique_ptr<OnlineLearner> make_learner(const Instance& inst,
                                            const LearnerSpec& spec,
                                            double beta, int T,
                                            std::uint64_t seed);

// ---------------------------------------------------------------- running

// Protocol order per round: oracle output, learner μ^(t), realized draw,
// adversary x^(t), reveal x^(t), outcome y^(t) ~ K(f★(x^(t))) to the oracle.
ExperimentLog run_protocol(const RunConfig& cfg);

void write_csv(std::ostream& os, const ExperimentLog& log);
void write_decision_csv(std::ostream& os, const E2dLog& log);
json log_to_json(const ExperimentLog& log);
ExperimentLog log_from_json(const json& j);
bool operator==(const Mixture& a, const Mixture& b);
bool operator==(const StepRecord& a, const StepRecord& b);
bool operator==(const ExperimentLog& a, const ExperimentLog& b);

// Writes via a temporary file and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

struct RunSummary {
  double value = 0.0;  // Est_On, or Reg_DM in e2d mode
  std::string csv;
  json log;
};

RunSummary run_to_summary(const RunConfig& cfg);

// run --config --seed --out: writes transcript.csv, log.json, summary.json.
RunSummary run_and_write(const RunConfig& cfg, const std::filesystem::path& out);

// ---------------------------------------------------------------- sweeps

struct SweepRow {
  json params;
  int n = 0;
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;  // "cell k seed s: message"
};

// Sets a dotted key ("learner.kind") inside a config document.
void set_dotted(json& doc, const std::string& key, const json& value);

// Cartesian product of the grid; seeds cfg.seed .. cfg.seed + n_seeds − 1.
// Cells run concurrently and each writes its own CSV atomically.
SweepReport run_sweep(const json& base, const std::filesystem::path& base_dir,
                      const json& grid, int n_seeds,
                      const std::filesystem::path& out);

}  // namespace oeoe
