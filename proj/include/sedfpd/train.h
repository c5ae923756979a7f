// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_TRAIN_H_
#define SEDFPD_TRAIN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sedfpd/dataio.h"
#include "sedfpd/eval.h"
#include "sedfpd/features.h"
#include "sedfpd/fpdloss.h"
#include "sedfpd/labels.h"
#include "sedfpd/model.h"
#include "sedfpd/pairing.h"

namespace sedfpd {

/// How the summed FPD loss over the kept pairs enters the total loss.
enum class FpdReduction { Sum, Mean };

std::string fpd_reduction_name(FpdReduction r);
FpdReduction parse_fpd_reduction(const std::string& s);

struct TrainConfig {
  int batch_size = 24;
  /// SS:RW mix of every batch, e.g. 1:1 or 1:0.
  int ss_parts = 1;
  int rw_parts = 1;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda_fpd = 1.0;
  int epochs = 30;
  std::uint64_t seed = 0;
  LossConfig loss;
  double tau_pos = 0.75;
  double tau_neg = 0.25;
  /// Frame pairs kept per case and batch; negative disables the cap.
  long pair_cap = 2000;
  /// Epochs at the start during which the FPD branch is skipped.
  int fpd_warmup_epochs = 0;
  bool background_as_class = false;
  FpdReduction fpd_reduction = FpdReduction::Mean;

  void validate() const;
};

/// One clip ready for training or scoring.
struct Example {
  std::string id;
  Source source = Source::SS;
  FeatureGrid features;
  WeakLabelRecord weak;
  bool has_strong = false;
  std::vector<StrongLabel> strong;
  double duration = 0.0;
};

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<Example> examples;

  int classes() const { return static_cast<int>(class_names.size()); }
};

/// Reads the manifest, loads and featurises every clip, and attaches labels
/// from the weak/strong TSVs. Strong labels are attached only to entries
/// whose manifest flag says so; weak labels of strong entries are derived
/// from their strong labels when the weak TSV has no row.
Dataset load_dataset(const std::string& manifest_path, const std::vector<std::string>& class_names,
                     const FeatureConfig& features, int sample_rate,
                     const std::string& strong_tsv = {}, const std::string& weak_tsv = {},
                     int jobs = 1);

/// Concatenates datasets with identical class lists; clip ids must stay
/// unique.
Dataset merge_datasets(std::vector<Dataset> parts);

struct BceResult {
  double loss = 0.0;
  Eigen::RowVectorXd grad;
};

/// Mean over classes of binary cross-entropy against the multi-hot target;
/// probabilities clipped to [1e-7, 1 - 1e-7] (zero gradient where clipped).
BceResult bce_weak_loss(const Eigen::RowVectorXd& clip_probs, const WeakLabelRecord& weak);

/// Deterministic batch for (cfg.seed, step): dataset indices, SS first.
/// Each source pool is shuffled without replacement per pool epoch.
std::vector<std::size_t> assemble_batch(const Dataset& data, const TrainConfig& cfg, long step);

long steps_per_epoch(const Dataset& data, const TrainConfig& cfg);

struct StepMetrics {
  double l_cls = 0.0;
  double l_fpd = 0.0;
  long positive = 0;
  long negative = 0;
  long ignored = 0;
  bool fpd_active = false;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long t = 0;
};

void adam_update(ModelParams& params, const ModelParams& grads, AdamState& state, const TrainConfig& cfg);

/// Model, optimiser state and the training step. `fpd_compiled_in == false`
/// instantiates the step without any FPD code path (the weak-only build).
class Trainer {
 public:
  Trainer(ModelParams init, TrainConfig cfg, bool fpd_compiled_in = true);

  /// Forward, both losses, backward, one Adam update.
  StepMetrics step(const Dataset& data, std::span<const std::size_t> batch, long step_index);

  /// Computes losses and gradients without updating (for checks).
  StepMetrics compute_gradients(const Dataset& data, std::span<const std::size_t> batch,
                                long step_index, ModelParams& grads);

  SedNet& net() { return net_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  SedNet net_;
  TrainConfig cfg_;
  AdamState adam_;
  bool fpd_compiled_in_;
};

struct EvalConfig {
  double threshold = 0.5;
  int median_window = 7;
  EventCollars collars;
  double segment_length = 1.0;
  double tag_threshold = 0.5;
  Averaging averaging = Averaging::Micro;
};

struct EvalMetrics {
  F1Report event;
  F1Report segment;
  F1Report tagging;
};

/// Eval-mode inference on every clip, then the three F1 protocols against
/// the strong references.
EvalMetrics evaluate(ModelParams& params, const Dataset& eval_set, const EvalConfig& cfg);

struct SeedRecord {
  std::string system;
  std::uint64_t seed = 0;
  double event_f1 = 0.0;
  double segment_f1 = 0.0;
  double tagging_f1 = 0.0;
  std::vector<double> cls_loss;  // mean per epoch
  std::vector<double> fpd_loss;  // mean per epoch

  bool operator==(const SeedRecord&) const = default;
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one seed
  double best = 0.0;
};

MetricStats metric_stats(const std::vector<double>& values);

struct RunSummary {
  std::string system;
  std::vector<SeedRecord> records;
  MetricStats event;
  MetricStats segment;
  MetricStats tagging;
  std::optional<ModelParams> best_params;  // by event-based F1
};

/// Recomputes the statistics from the records.
void finalize_summary(RunSummary& s);

/// Trains a model from scratch and scores it on eval_set.
SeedRecord train_one_seed(const TrainConfig& cfg, const ModelShape& shape, const Dataset& train,
                          const Dataset& eval_set, const EvalConfig& eval_cfg, const std::string& system,
                          ModelParams* final_params = nullptr, bool fpd_compiled_in = true);

/// Seeds cfg.seed + 0 .. n_seeds - 1, run up to `jobs` at a time.
RunSummary run_experiment(const TrainConfig& cfg, const ModelShape& shape, const Dataset& train,
                          const Dataset& eval_set, const EvalConfig& eval_cfg, int n_seeds, int jobs,
                          const std::string& system);

void write_run_summary(const std::string& path, const RunSummary& s);
RunSummary read_run_summary(const std::string& path);
/// Mean +- std and best for each metric, one row per system.
std::string format_summary_table(const std::vector<RunSummary>& summaries);

}  // namespace sedfpd

#endif  // SEDFPD_TRAIN_H_
