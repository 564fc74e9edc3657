// Command-line front end for the cnet shared library. Every subcommand
// prints a machine-readable JSON summary on stdout; per-sample tables go to
// CSV files named by the flags. Exit codes: 0 success, 1 usage error,
// 2 data/format error, 3 verification failure.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cnet/cnet.h"
#include "json.hpp"

using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

struct DatasetDeleter {
  void operator()(cnet_dataset* d) const { cnet_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(cnet_model* m) const { cnet_model_free(m); }
};
struct HeadDeleter {
  void operator()(cnet_gauss_head* h) const { cnet_gauss_head_free(h); }
};

using DatasetPtr = std::unique_ptr<cnet_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<cnet_model, ModelDeleter>;
using HeadPtr = std::unique_ptr<cnet_gauss_head, HeadDeleter>;

[[noreturn]] void die(const std::string& message, int code = kExitData) {
  std::cerr << "error: " << message << "\n";
  std::exit(code);
}

void check(cnet_status status, const std::string& what) {
  if (status != CNET_OK) {
    die(what + ": " + cnet_status_name(status) + " (" + cnet_last_error() +
        ")");
  }
}

std::string resolve_path(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* base = std::getenv("CNET_DATA_DIR");
  if (base == nullptr || *base == '\0') return path;
  return std::string(base) + "/" + path;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, sep)) parts.push_back(item);
  return parts;
}

// Dataset specs: "idx:<images>,<labels>" or
// "blobs:<classes>,<per_class>,<dim>,<separation>,<seed>". Relative IDX
// paths resolve against $CNET_DATA_DIR.
DatasetPtr open_dataset(const std::string& spec) {
  const size_t colon = spec.find(':');
  if (colon == std::string::npos) {
    die("dataset spec '" + spec + "' needs the form idx:... or blobs:...",
        kExitUsage);
  }
  const std::string kind = spec.substr(0, colon);
  const auto args = split_list(spec.substr(colon + 1), ',');
  cnet_dataset* ds = nullptr;
  if (kind == "idx") {
    if (args.size() != 2) {
      die("idx spec needs <images>,<labels>", kExitUsage);
    }
    check(cnet_dataset_load_idx(resolve_path(args[0]).c_str(),
                                resolve_path(args[1]).c_str(), &ds),
          "loading " + args[0]);
  } else if (kind == "blobs") {
    if (args.size() != 5) {
      die("blobs spec needs <classes>,<per_class>,<dim>,<separation>,<seed>",
          kExitUsage);
    }
    check(cnet_dataset_synth_blobs(std::stoul(args[0]), std::stoul(args[1]),
                                   std::stoul(args[2]), std::stod(args[3]),
                                   std::stoull(args[4]), &ds),
          "generating blobs");
  } else {
    die("unknown dataset kind '" + kind + "'", kExitUsage);
  }
  return DatasetPtr(ds);
}

ModelPtr open_model(const std::string& path) {
  cnet_model* model = nullptr;
  check(cnet_model_load(path.c_str(), &model), "loading model " + path);
  return ModelPtr(model);
}

HeadPtr open_head(const std::string& path) {
  cnet_gauss_head* head = nullptr;
  check(cnet_gauss_head_load(path.c_str(), &head), "loading head " + path);
  return HeadPtr(head);
}

int cmd_train(const std::string& data_spec, const std::string& test_spec,
              double split_fraction, const std::string& arch,
              uint32_t epochs, double lr, uint32_t batch, double momentum,
              uint64_t seed, bool no_bias_lift, const std::string& out) {
  DatasetPtr full = open_dataset(data_spec);
  DatasetPtr train_set;
  DatasetPtr test_set;
  if (!test_spec.empty()) {
    train_set = std::move(full);
    test_set = open_dataset(test_spec);
  } else if (split_fraction > 0.0) {
    cnet_dataset* train_raw = nullptr;
    cnet_dataset* test_raw = nullptr;
    check(cnet_dataset_split(full.get(), split_fraction, seed, &train_raw,
                             &test_raw),
          "splitting dataset");
    train_set.reset(train_raw);
    test_set.reset(test_raw);
  } else {
    train_set = std::move(full);
  }

  std::vector<uint32_t> dims;
  for (const std::string& part : split_list(arch, ',')) {
    dims.push_back(static_cast<uint32_t>(std::stoul(part)));
  }
  if (dims.size() < 2) die("--arch needs at least two dimensions", kExitUsage);
  if (dims.front() != cnet_dataset_dim(train_set.get())) {
    die("arch input " + std::to_string(dims.front()) +
        " does not match dataset dimension " +
        std::to_string(cnet_dataset_dim(train_set.get())));
  }

  cnet_model* model_raw = nullptr;
  check(cnet_model_create(dims.data(), static_cast<uint32_t>(dims.size()),
                          no_bias_lift ? 0 : 1, seed, &model_raw),
        "creating model");
  ModelPtr model(model_raw);

  check(cnet_model_train(model.get(), train_set.get(), epochs, batch, lr,
                         momentum, seed),
        "training");
  check(cnet_model_save(model.get(), out.c_str()), "saving model");

  double train_acc = 0.0;
  check(cnet_model_accuracy(model.get(), train_set.get(), &train_acc),
        "evaluating");

  json result;
  result["command"] = "train";
  result["model"] = out;
  result["epochs"] = epochs;
  result["seed"] = seed;
  result["train_accuracy"] = train_acc;
  if (test_set) {
    double test_acc = 0.0;
    check(cnet_model_accuracy(model.get(), test_set.get(), &test_acc),
          "evaluating test set");
    result["test_accuracy"] = test_acc;
  } else {
    result["test_accuracy"] = nullptr;
  }
  std::cout << result.dump() << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& model_path, const std::string& data_spec) {
  ModelPtr model = open_model(model_path);
  DatasetPtr data = open_dataset(data_spec);
  cnet_verify_report report{};
  check(cnet_model_verify_equivalence(model.get(), data.get(), &report),
        "verifying");

  json result;
  result["command"] = "verify";
  result["match_fraction"] = report.match_fraction;
  result["total"] = report.total_points;
  result["ties"] = report.tied_points;
  result["mismatches"] = report.mismatches;
  result["equidistance_spread"] = report.equidistance_spread;
  result["system_residual"] = report.system_residual;
  std::cout << result.dump() << "\n";
  return report.match_fraction < 1.0 ? kExitVerification : kExitOk;
}

int cmd_tailor(const std::string& model_path, const std::string& data_spec,
               const std::string& test_spec, uint32_t epochs, double lr,
               uint32_t batch, const std::string& refresh, uint64_t seed,
               const std::string& out, const std::string& head_out) {
  ModelPtr model = open_model(model_path);
  DatasetPtr data = open_dataset(data_spec);
  DatasetPtr eval =
      test_spec.empty() ? DatasetPtr() : open_dataset(test_spec);
  cnet_dataset* eval_set = eval ? eval.get() : data.get();

  double pre_acc = 0.0;
  check(cnet_model_accuracy(model.get(), eval_set, &pre_acc), "evaluating");

  const cnet_refresh policy = refresh == "once" ? CNET_REFRESH_ONCE
                                                : CNET_REFRESH_EVERY_EPOCH;
  double final_loss = 0.0;
  cnet_gauss_head* head_raw = nullptr;
  check(cnet_model_tailor(model.get(), data.get(), epochs, batch, lr, policy,
                          seed, &final_loss, &head_raw),
        "tailoring");
  HeadPtr head(head_raw);

  double post_acc = 0.0;
  check(cnet_gauss_accuracy(model.get(), head.get(), eval_set, &post_acc),
        "evaluating gauss head");

  check(cnet_model_save(model.get(), out.c_str()), "saving tailored model");
  check(cnet_gauss_head_save(head.get(), head_out.c_str()), "saving head");

  json result;
  result["command"] = "tailor";
  result["model"] = out;
  result["head"] = head_out;
  result["pre_accuracy"] = pre_acc;
  result["post_accuracy"] = post_acc;
  result["final_tailoring_loss"] = final_loss;
  result["refresh"] = refresh;
  std::cout << result.dump() << "\n";
  return kExitOk;
}

int cmd_attack(const std::string& model_path, const std::string& head_name,
               const std::string& head_file, const std::string& method,
               const std::string& data_spec, const std::string& eps_grid,
               uint32_t sample, uint64_t seed, const std::string& strategy,
               uint32_t values, double clip_lo, double clip_hi,
               const std::string& out, const std::string& scatter_out,
               const std::string& bounds_out) {
  ModelPtr model = open_model(model_path);
  DatasetPtr data = open_dataset(data_spec);

  const cnet_head_kind kind =
      head_name == "gauss" ? CNET_HEAD_GAUSS : CNET_HEAD_SOFTMAX;
  HeadPtr head;
  if (kind == CNET_HEAD_GAUSS) {
    if (head_file.empty()) die("--head gauss requires --head-file", kExitUsage);
    head = open_head(head_file);
  }

  json result;
  result["command"] = "attack";
  result["method"] = method;
  result["head"] = head_name;
  result["csv"] = out;

  if (method == "fgsm") {
    std::vector<double> grid;
    for (const std::string& part : split_list(eps_grid, ',')) {
      grid.push_back(std::stod(part));
    }
    if (grid.empty()) die("--eps-grid is empty", kExitUsage);
    std::vector<double> accuracy(grid.size(), 0.0);
    std::vector<double> confidence(grid.size(), 0.0);
    check(cnet_fgsm_sweep(model.get(), kind, head.get(), data.get(),
                          grid.data(), static_cast<uint32_t>(grid.size()),
                          clip_lo, clip_hi, out.c_str(), accuracy.data(),
                          confidence.data()),
          "fgsm sweep");
    json rows = json::array();
    for (size_t e = 0; e < grid.size(); ++e) {
      rows.push_back({{"epsilon", grid[e]},
                      {"accuracy", accuracy[e]},
                      {"mean_confidence_misclassified", confidence[e]}});
    }
    result["rows"] = rows;
  } else if (method == "onepixel") {
    const cnet_pixel_strategy strat = strategy == "evolution"
                                          ? CNET_PIXEL_EVOLUTION
                                          : CNET_PIXEL_EXHAUSTIVE;
    cnet_attack_aggregate agg{};
    check(cnet_one_pixel_campaign(
              model.get(), kind, head.get(), data.get(), sample, seed, strat,
              values, clip_lo, clip_hi, out.c_str(),
              scatter_out.empty() ? nullptr : scatter_out.c_str(),
              bounds_out.empty() ? nullptr : bounds_out.c_str(), &agg),
          "one-pixel campaign");
    result["attack_rate"] = agg.attack_rate;
    result["mean_success_confidence"] = agg.mean_success_confidence;
    result["n"] = agg.attempted;
    result["successes"] = agg.successes;
    result["theorem2_violations"] = agg.bound_violations;
    result["rate_defined"] = agg.rate_defined != 0;
    if (!scatter_out.empty()) result["scatter_csv"] = scatter_out;
    if (!bounds_out.empty()) result["bounds_csv"] = bounds_out;
  } else {
    die("--method must be fgsm or onepixel", kExitUsage);
  }
  std::cout << result.dump() << "\n";
  return kExitOk;
}

int cmd_rank(const std::string& model_path, const std::string& head_file,
             const std::string& data_spec, uint32_t k,
             const std::string& out) {
  ModelPtr model = open_model(model_path);
  HeadPtr head = open_head(head_file);
  DatasetPtr data = open_dataset(data_spec);

  std::vector<uint64_t> ids(2 * static_cast<size_t>(k), 0);
  std::vector<double> confidence(2 * static_cast<size_t>(k), 0.0);
  std::vector<int> outlier(2 * static_cast<size_t>(k), 0);
  uint32_t filled = 0;
  check(cnet_rank_confidence(model.get(), head.get(), data.get(), k,
                             out.c_str(), ids.data(), confidence.data(),
                             outlier.data(), &filled),
        "ranking");

  const uint32_t top = std::min(k, filled);
  json top_list = json::array();
  for (uint32_t i = 0; i < top; ++i) {
    top_list.push_back({{"sample_id", ids[i]},
                        {"confidence", confidence[i]},
                        {"outlier", outlier[i] != 0}});
  }
  json bottom_list = json::array();
  for (uint32_t i = top; i < filled; ++i) {
    bottom_list.push_back({{"sample_id", ids[i]},
                           {"confidence", confidence[i]},
                           {"outlier", outlier[i] != 0}});
  }

  json result;
  result["command"] = "rank";
  result["k"] = k;
  result["csv"] = out;
  result["top"] = top_list;
  result["bottom"] = bottom_list;
  std::cout << result.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"centroid-based network toolkit"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a softmax classifier");
  std::string t_data, t_test, t_arch, t_out;
  double t_split = 0.0, t_lr = 0.1, t_momentum = 0.0;
  uint32_t t_epochs = 10, t_batch = 32;
  uint64_t t_seed = 1;
  bool t_no_lift = false;
  train->add_option("--data", t_data, "dataset spec")->required();
  train->add_option("--test-data", t_test, "held-out dataset spec");
  train->add_option("--split", t_split, "train fraction of --data");
  train->add_option("--arch", t_arch, "layer dims, e.g. 784,128,10")->required();
  train->add_option("--epochs", t_epochs, "training epochs");
  train->add_option("--lr", t_lr, "learning rate");
  train->add_option("--batch", t_batch, "batch size");
  train->add_option("--momentum", t_momentum, "SGD momentum");
  train->add_option("--seed", t_seed, "RNG seed");
  train->add_flag("--no-bias-lift", t_no_lift,
                  "skip the constant-1 input feature");
  train->add_option("--out", t_out, "model output path")->required();

  // verify
  auto* verify = app.add_subcommand(
      "verify", "check the softmax/k-means prediction equivalence");
  std::string v_model, v_data;
  verify->add_option("--model", v_model, "model path")->required();
  verify->add_option("--data", v_data, "dataset spec")->required();

  // tailor
  auto* tailor =
      app.add_subcommand("tailor", "centroid-based network refinement");
  std::string ta_model, ta_data, ta_test, ta_refresh = "epoch", ta_out,
              ta_head_out;
  uint32_t ta_epochs = 5, ta_batch = 32;
  double ta_lr = 0.01;
  uint64_t ta_seed = 1;
  tailor->add_option("--model", ta_model, "pre-trained model path")->required();
  tailor->add_option("--data", ta_data, "training dataset spec")->required();
  tailor->add_option("--test-data", ta_test, "held-out dataset spec");
  tailor->add_option("--epochs", ta_epochs, "tailoring epochs");
  tailor->add_option("--lr", ta_lr, "learning rate");
  tailor->add_option("--batch", ta_batch, "batch size");
  tailor->add_option("--refresh", ta_refresh, "centroid refresh: once|epoch")
      ->check(CLI::IsMember({"once", "epoch"}));
  tailor->add_option("--seed", ta_seed, "RNG seed");
  tailor->add_option("--out", ta_out, "tailored model output path")->required();
  tailor->add_option("--head-out", ta_head_out, "gauss head output path")
      ->required();

  // attack
  auto* attack = app.add_subcommand("attack", "FGSM or one-pixel evaluation");
  std::string a_model, a_head = "softmax", a_head_file, a_method, a_data,
              a_eps = "0,0.05,0.1,0.15,0.2,0.25,0.3",
              a_strategy = "exhaustive", a_out, a_scatter, a_bounds;
  uint32_t a_sample = 100, a_values = 16;
  uint64_t a_seed = 1;
  double a_lo = 0.0, a_hi = 1.0;
  attack->add_option("--model", a_model, "model path")->required();
  attack->add_option("--head", a_head, "softmax|gauss")
      ->check(CLI::IsMember({"softmax", "gauss"}));
  attack->add_option("--head-file", a_head_file, "gauss head path");
  attack->add_option("--method", a_method, "fgsm|onepixel")->required();
  attack->add_option("--data", a_data, "dataset spec")->required();
  attack->add_option("--eps-grid", a_eps, "ascending FGSM epsilons");
  attack->add_option("--sample", a_sample, "one-pixel sample size");
  attack->add_option("--seed", a_seed, "sampling / evolution seed");
  attack->add_option("--strategy", a_strategy, "exhaustive|evolution")
      ->check(CLI::IsMember({"exhaustive", "evolution"}));
  attack->add_option("--values", a_values, "one-pixel candidate values");
  attack->add_option("--clip-lo", a_lo, "input range lower bound");
  attack->add_option("--clip-hi", a_hi, "input range upper bound");
  attack->add_option("--out", a_out, "per-sample / sweep CSV path")->required();
  attack->add_option("--scatter-out", a_scatter, "confidence scatter CSV path");
  attack->add_option("--bounds-out", a_bounds, "distortion bound CSV path");

  // rank
  auto* rank =
      app.add_subcommand("rank", "prototype/outlier listing by confidence");
  std::string r_model, r_head_file, r_data, r_out;
  uint32_t r_k = 10;
  rank->add_option("--model", r_model, "model path")->required();
  rank->add_option("--head-file", r_head_file, "gauss head path")->required();
  rank->add_option("--data", r_data, "dataset spec")->required();
  rank->add_option("--k", r_k, "listing size per end");
  rank->add_option("--out", r_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (train->parsed()) {
    return cmd_train(t_data, t_test, t_split, t_arch, t_epochs, t_lr, t_batch,
                     t_momentum, t_seed, t_no_lift, t_out);
  }
  if (verify->parsed()) return cmd_verify(v_model, v_data);
  if (tailor->parsed()) {
    return cmd_tailor(ta_model, ta_data, ta_test, ta_epochs, ta_lr, ta_batch,
                      ta_refresh, ta_seed, ta_out, ta_head_out);
  }
  if (attack->parsed()) {
    return cmd_attack(a_model, a_head, a_head_file, a_method, a_data, a_eps,
                      a_sample, a_seed, a_strategy, a_values, a_lo, a_hi,
                      a_out, a_scatter, a_bounds);
  }
  if (rank->parsed()) return cmd_rank(r_model, r_head_file, r_data, r_k, r_out);
  return kExitUsage;
}
