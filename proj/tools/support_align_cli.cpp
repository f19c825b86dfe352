// Command-line harness for the desk-scale experiments and divergence
// computations. Subcommands write a trace CSV plus a result JSON into --out;
// identical config and seed give byte-identical CSV output.
//
// Exit codes: 0 success, 1 metric/assertion failure, 2 input error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "salign/experiments.hpp"

using nlohmann::json;
using namespace salign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMetricFailure = 1;
constexpr int kExitInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// nlohmann::json keeps object keys sorted, so dump() is already canonical.
std::string config_hash(const json& config) {
  std::ostringstream hex;
  hex << std::hex << fnv1a(config.dump());
  return hex.str();
}

GroundMetric parse_metric(const std::string& name) {
  if (name == "absolute" || name == "abs") return GroundMetric::absolute;
  if (name == "squared" || name == "sq") return GroundMetric::squared;
  throw InputError("unknown metric '" + name + "' (use absolute|squared)");
}

AlignKind parse_kind(const std::string& name) {
  if (name == "support") return AlignKind::support;
  if (name == "relaxed") return AlignKind::relaxed;
  if (name == "distribution") return AlignKind::distribution;
  throw InputError("unknown mode '" + name + "' (use support|relaxed|distribution)");
}

const char* kind_name(AlignKind kind) {
  switch (kind) {
    case AlignKind::support: return "support";
    case AlignKind::relaxed: return "relaxed";
    case AlignKind::distribution: return "distribution";
  }
  return "support";
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config parse error in " + path + ": " + e.what());
  }
}

void apply_train_config(const json& j, TrainConfig& train) {
  if (!j.is_object()) throw InputError("'train' must be an object");
  if (j.contains("batch_size")) train.batch_size = j.at("batch_size").get<int>();
  if (j.contains("history")) train.history_capacity = j.at("history").get<int>();
  if (j.contains("steps")) train.steps = j.at("steps").get<int>();
  if (j.contains("lambda_align")) train.lambda_align = j.at("lambda_align").get<double>();
  if (j.contains("disc_lr")) train.disc_lr = j.at("disc_lr").get<double>();
  if (j.contains("gen_lr")) train.gen_lr = j.at("gen_lr").get<double>();
  if (j.contains("adam_beta1")) train.adam_beta1 = j.at("adam_beta1").get<double>();
  if (j.contains("disc_hidden")) train.disc_hidden = j.at("disc_hidden").get<std::vector<int>>();
  if (j.contains("seed")) train.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("eval_every")) train.eval_every = j.at("eval_every").get<int>();
}

json train_to_json(const TrainConfig& train) {
  return json{{"batch_size", train.batch_size}, {"history", train.history_capacity},
              {"steps", train.steps},           {"lambda_align", train.lambda_align},
              {"disc_lr", train.disc_lr},       {"gen_lr", train.gen_lr},
              {"adam_beta1", train.adam_beta1}, {"disc_hidden", train.disc_hidden},
              {"seed", train.seed},             {"eval_every", train.eval_every}};
}

AlignmentMode parse_mode(const json& j, AlignmentMode fallback) {
  AlignmentMode mode = fallback;
  if (j.contains("mode")) mode.kind = parse_kind(j.at("mode").get<std::string>());
  if (j.contains("beta")) mode.beta = j.at("beta").get<int>();
  if (j.contains("metric")) mode.metric = parse_metric(j.at("metric").get<std::string>());
  return mode;
}

json mode_to_json(const AlignmentMode& mode) {
  return json{{"mode", kind_name(mode.kind)},
              {"beta", mode.beta},
              {"metric", mode.metric == GroundMetric::absolute ? "absolute" : "squared"}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void write_result(const std::filesystem::path& out_dir, const std::string& experiment,
                  const json& config, const json& metrics, double wall_time_s) {
  std::filesystem::create_directories(out_dir);
  json record{{"experiment", experiment},
              {"config", config},
              {"config_hash", config_hash(config)},
              {"metrics", metrics},
              {"wall_time_s", wall_time_s}};
  write_text_file(out_dir / (experiment + "_result.json"), record.dump(2) + "\n");
  std::cout << record.dump(2) << "\n";
}

void write_trace(const std::filesystem::path& out_dir, const std::string& name,
                 const TrainingTrace& trace) {
  std::filesystem::create_directories(out_dir);
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  write_text_file(out_dir / (name + "_trace.csv"), csv.str());
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// --------------------------------------------------------------------------
// divergence
// --------------------------------------------------------------------------

PointSet read_point_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open point file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(field, &used));
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
        if (used != field.size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw InputError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (row.empty()) throw InputError(path + ":" + std::to_string(line_no) + ": empty row");
    if (!rows.empty() && rows.front().size() != row.size())
      throw InputError(path + ":" + std::to_string(line_no) + ": inconsistent dimension");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no points");
  PointSet points(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) points(i, j) = rows[i][j];
  return points;
}

int cmd_divergence(const std::string& p_path, const std::string& q_path,
                   const std::vector<int>& betas, const std::string& metric_name) {
  const GroundMetric metric = parse_metric(metric_name);
  const PointSet p = read_point_csv(p_path);
  const PointSet q = read_point_csv(q_path);

  std::cout.precision(12);
  std::cout << "ssd_discrete " << ssd_discrete(p, q) << "\n";
  std::cout << "hausdorff " << hausdorff(p, q) << "\n";

  if (p.cols() == 1) {
    const auto sp = make_scalars(p.col(0));
    const auto sq = make_scalars(q.col(0));
    const double nn_cost = symmetric_relaxed_cost(sp, sq, Tolerance::unbounded(),
                                                  Tolerance::unbounded(), metric);
    std::cout << "symmetric_nn " << nn_cost << "\n";
    if (p.rows() == q.rows()) {
      std::cout << "wasserstein " << wasserstein1_1d(sp, sq, metric).cost << "\n";
      for (int beta : betas) {
        if (beta < 0) throw InputError("--beta must be >= 0");
        std::cout << "relaxed_beta" << beta << " " << relaxed_ot_1d(sp, sq, beta, metric).cost
                  << "\n";
      }
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------------------
// experiments
// --------------------------------------------------------------------------

int cmd_beta_shift(const json& file_config, std::uint64_t seed_override, bool has_seed,
                   const std::string& mode_override, const std::string& out_dir) {
  BetaShiftConfig config;
  config.mode.kind = AlignKind::support;
  if (file_config.contains("train")) apply_train_config(file_config.at("train"), config.train);
  config.mode = parse_mode(file_config, config.mode);
  if (!mode_override.empty()) config.mode.kind = parse_kind(mode_override);
  if (file_config.contains("theta_init")) config.theta_init = file_config.at("theta_init");
  if (file_config.contains("eval_samples")) config.eval_samples = file_config.at("eval_samples");
  if (has_seed) config.train.seed = seed_override;
  // Sorted matching and the capacity DP run on plain batches; history widening
  // belongs to support mode unless a config asks for it explicitly.
  if (config.mode.kind != AlignKind::support && !file_config.contains("train"))
    config.train.history_capacity = 0;

  json cfg = {{"theta_init", config.theta_init},
              {"eval_samples", config.eval_samples},
              {"train", train_to_json(config.train)}};
  cfg.update(mode_to_json(config.mode));

  Timer timer;
  const auto outcome = run_beta_shift(config);
  json metrics{{"theta_final", outcome.theta_final},
               {"initial", {{"D_W", outcome.initial.d_w}, {"D_ssd", outcome.initial.d_ssd}}},
               {"final", {{"D_W", outcome.final_state.d_w}, {"D_ssd", outcome.final_state.d_ssd}}}};
  write_trace(out_dir, "beta-shift", outcome.result.trace);
  write_result(out_dir, "beta-shift", cfg, metrics, timer.seconds());
  return kExitOk;
}

json mixture_metrics_json(const Mixture2dOutcome& outcome) {
  return json{{"embed_D_W", outcome.embed_dw},
              {"embed_D_ssd", outcome.embed_dssd},
              {"push_D_W", outcome.push_dw},
              {"push_D_ssd", outcome.push_dssd},
              {"cluster_match", outcome.cluster_match}};
}

Mixture2dConfig mixture_config_from(const json& file_config, std::uint64_t seed_override,
                                    bool has_seed, const std::string& mode_override) {
  Mixture2dConfig config;
  if (file_config.contains("train")) apply_train_config(file_config.at("train"), config.train);
  config.mode = parse_mode(file_config, config.mode);
  if (!mode_override.empty()) config.mode.kind = parse_kind(mode_override);
  if (file_config.contains("alpha")) config.alpha = file_config.at("alpha");
  if (file_config.contains("eval_samples")) config.eval_samples = file_config.at("eval_samples");
  if (file_config.contains("cluster_radius")) config.cluster_radius = file_config.at("cluster_radius");
  if (file_config.contains("cluster_sigma")) config.cluster_sigma = file_config.at("cluster_sigma");
  if (file_config.contains("target_offset")) config.target_offset = file_config.at("target_offset");
  if (file_config.contains("gen_hidden"))
    config.gen_hidden = file_config.at("gen_hidden").get<std::vector<int>>();
  if (has_seed) config.train.seed = seed_override;
  if (config.mode.kind != AlignKind::support && !file_config.contains("train"))
    config.train.history_capacity = 0;
  return config;
}

json mixture_config_json(const Mixture2dConfig& config) {
  json cfg = {{"alpha", config.alpha},
              {"eval_samples", config.eval_samples},
              {"cluster_radius", config.cluster_radius},
              {"cluster_sigma", config.cluster_sigma},
              {"target_offset", config.target_offset},
              {"gen_hidden", config.gen_hidden},
              {"train", train_to_json(config.train)}};
  cfg.update(mode_to_json(config.mode));
  return cfg;
}

int cmd_mixture2d(const json& file_config, std::uint64_t seed_override, bool has_seed,
                  const std::string& mode_override, const std::string& out_dir) {
  const Mixture2dConfig config =
      mixture_config_from(file_config, seed_override, has_seed, mode_override);
  Timer timer;
  const auto outcome = run_mixture2d(config);
  write_trace(out_dir, "mixture2d", outcome.result.trace);
  write_result(out_dir, "mixture2d", mixture_config_json(config), mixture_metrics_json(outcome),
               timer.seconds());
  return kExitOk;
}

int cmd_history_ablation(const json& file_config, std::uint64_t seed_override, bool has_seed,
                         const std::string& out_dir) {
  Mixture2dConfig base = mixture_config_from(file_config, seed_override, has_seed, "support");
  std::vector<int> sizes{0, 1000};
  if (file_config.contains("history_sizes"))
    sizes = file_config.at("history_sizes").get<std::vector<int>>();

  json cfg = mixture_config_json(base);
  cfg["history_sizes"] = sizes;

  Timer timer;
  const auto outcome = run_history_ablation(base, sizes);
  json rows = json::array();
  for (const auto& row : outcome.rows) {
    rows.push_back({{"history", row.history},
                    {"push_D_W", row.push_dw},
                    {"push_D_ssd", row.push_dssd},
                    {"embed_D_W", row.embed_dw},
                    {"embed_D_ssd", row.embed_dssd}});
  }
  json metrics{{"baseline",
                {{"push_D_W", outcome.baseline.push_dw}, {"push_D_ssd", outcome.baseline.push_dssd}}},
               {"per_history", rows}};
  write_result(out_dir, "history-ablation", cfg, metrics, timer.seconds());
  return kExitOk;
}

int cmd_sliced(const json& file_config, std::uint64_t seed_override, bool has_seed,
               const std::string& out_dir) {
  SlicedCounterexampleConfig config;
  if (file_config.contains("samples_per_side"))
    config.samples_per_side = file_config.at("samples_per_side");
  if (file_config.contains("directions")) config.directions = file_config.at("directions");
  if (file_config.contains("seed")) config.seed = file_config.at("seed").get<std::uint64_t>();
  if (has_seed) config.seed = seed_override;

  json cfg{{"samples_per_side", config.samples_per_side},
           {"directions", config.directions},
           {"seed", config.seed}};

  Timer timer;
  const auto outcome = run_sliced_counterexample(config);
  const bool gap_holds = outcome.sliced_max <= 0.05 && outcome.ssd_2d >= 0.1;
  json metrics{{"sliced_max", outcome.sliced_max},
               {"sliced_mean", outcome.sliced_mean},
               {"ssd_2d", outcome.ssd_2d},
               {"hausdorff_2d", outcome.hausdorff_2d},
               {"gap_holds", gap_holds}};
  write_result(out_dir, "sliced-counterexample", cfg, metrics, timer.seconds());
  if (!gap_holds) {
    std::cerr << "sliced-counterexample: support gap assertion failed\n";
    return kExitMetricFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"support-align: support-alignment divergences and desk-scale experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", mode_override;
  std::uint64_t seed = 0;
  bool has_seed = false;
  auto add_common = [&](CLI::App* cmd, bool with_mode) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out", out_dir, "output directory (default: out)");
    cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      has_seed = true;
    });
    if (with_mode)
      cmd->add_option("--mode", mode_override, "alignment mode: support|relaxed|distribution");
  };

  auto* divergence = app.add_subcommand("divergence", "divergences between two CSV point files");
  std::string p_path, q_path, metric_name = "absolute";
  std::vector<int> betas;
  divergence->add_option("--p", p_path, "first point file (CSV, one point per row)")->required();
  divergence->add_option("--q", q_path, "second point file")->required();
  divergence->add_option("--beta", betas, "capacity tolerance(s) for the relaxed cost");
  divergence->add_option("--metric", metric_name, "ground metric: absolute|squared");

  auto* beta_shift = app.add_subcommand("beta-shift", "shifted-Beta alignment toy");
  add_common(beta_shift, true);
  auto* mixture = app.add_subcommand("mixture2d", "label-shifted 2D Gaussian mixture toy");
  add_common(mixture, true);
  auto* ablation = app.add_subcommand("history-ablation", "history-size sweep on the mixture toy");
  add_common(ablation, false);
  auto* sliced = app.add_subcommand("sliced-counterexample", "disk vs annulus sliced-SSD gap");
  add_common(sliced, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (divergence->parsed()) return cmd_divergence(p_path, q_path, betas, metric_name);
    const json file_config = load_config_file(config_path);
    if (beta_shift->parsed())
      return cmd_beta_shift(file_config, seed, has_seed, mode_override, out_dir);
    if (mixture->parsed()) return cmd_mixture2d(file_config, seed, has_seed, mode_override, out_dir);
    if (ablation->parsed()) return cmd_history_ablation(file_config, seed, has_seed, out_dir);
    if (sliced->parsed()) return cmd_sliced(file_config, seed, has_seed, out_dir);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitMetricFailure;
  }
  return kExitOk;
}
