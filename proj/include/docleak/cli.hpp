#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace docleak {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitLeakage = 3;

// Resolved settings. Sources, lowest precedence first: built-in defaults,
// the --config key=value file, command-line flags.
struct RunConfig {
  std::string dataset = "funsd";
  std::string data_root;
  std::string metric = "auto";  // funsd: question_overlap, sroie: business_key, generic: shingle
  double threshold = 0.7;
  std::string ratios = "auto";  // "train,val,test"; auto keeps the official test share
  std::uint64_t seed = 0;
  int k_folds = 4;
  double train_fraction = 0.8;
  std::string output_dir = "docleak_out";
  int shingle_k = 3;
  int threads = 0;  // 0 = OpenMP default
  bool strict = false;
  bool group_atomic_folds = false;
  std::string ground_truth;
  std::string thresholds = "0.5,0.6,0.7,0.8,0.9";
  std::string groups_path;
  std::string manifest_path;
};

// SHA-256 over the settings that influence output content.
std::string config_digest(const RunConfig& config);

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace docleak
