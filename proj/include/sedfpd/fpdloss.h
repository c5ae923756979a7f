// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_FPDLOSS_H_
#define SEDFPD_FPDLOSS_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sedfpd {

enum class Metric { Euc, IP };

/// AsWritten evaluates the similarity-valued D literally. DistanceInterpreted
/// substitutes a distance-valued D (d/(1+d) for Euc, 1 - cos for IP) in the
/// contrastive form sum_pos D^2 + sum_neg [alpha - D]_+.
enum class LossMode { AsWritten, DistanceInterpreted };

/// Which pairs receive the IP normalisation term (D + 1)^2.
enum class NormScope { AllPairs, NegativeOnly };

std::string metric_name(Metric m);
std::string loss_mode_name(LossMode m);
std::string norm_scope_name(NormScope s);
Metric parse_metric(const std::string& s);
LossMode parse_loss_mode(const std::string& s);
NormScope parse_norm_scope(const std::string& s);

struct LossConfig {
  Metric metric = Metric::Euc;
  double alpha = 0.1;
  LossMode mode = LossMode::DistanceInterpreted;
  NormScope norm_scope = NormScope::NegativeOnly;

  void validate() const;
};

struct VectorPair {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

struct PairBatch {
  std::vector<VectorPair> positives;
  std::vector<VectorPair> negatives;
};

/// Loss and d loss / d (a, b) for every pair, in batch order.
struct PairLoss {
  double loss = 0.0;
  std::vector<VectorPair> positive_grads;
  std::vector<VectorPair> negative_grads;
};

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
/// 1 / (1 + d)
double euc_D(double d);
/// Cosine similarity; throws ValidationError on a zero-norm vector.
double ip_D(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

PairLoss fpd_loss_euc(const PairBatch& batch, const LossConfig& cfg);
PairLoss fpd_loss_ip(const PairBatch& batch, const LossConfig& cfg);
/// Dispatches on cfg.metric.
PairLoss fpd_loss(const PairBatch& batch, const LossConfig& cfg);

/// Random pair batch (dimension >= 2) sampled so that no hinge argument lies
/// within 1e-3 of its kink; returns the max relative error between analytic
/// and central-difference gradients (step 1e-6).
double grad_check_loss(const LossConfig& cfg, std::uint64_t seed);

}  // namespace sedfpd

#endif  // SEDFPD_FPDLOSS_H_
