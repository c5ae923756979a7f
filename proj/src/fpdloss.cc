// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include "sedfpd/fpdloss.h"

#include <algorithm>
#include <cmath>

#include "sedfpd/error.h"
#include "sedfpd/rng.h"

namespace sedfpd {

namespace {

void check_dims(const VectorPair& p) {
  if (p.a.size() != p.b.size()) throw ValidationError("fpd loss: pair vectors differ in dimension");
}

// Loss contribution of one pair and its derivative with respect to the
// scalar the pair reduces to (d for Euc, cos for IP).
struct Term {
  double value = 0.0;
  double slope = 0.0;
};

Term euc_term(double d, bool positive, const LossConfig& cfg) {
  const double sim = 1.0 / (1.0 + d);
  const double dsim = -sim * sim;
  double D, dD;
  if (cfg.mode == LossMode::AsWritten) {
    D = sim;
    dD = dsim;
  } else {
    D = d / (1.0 + d);
    dD = -dsim;
  }
  if (positive) return {D * D, 2.0 * D * dD};
  const double h = cfg.alpha - D;
  if (h > 0.0) return {h, -dD};
  return {};
}

Term ip_term(double c, bool positive, const LossConfig& cfg) {
  Term t;
  if (cfg.mode == LossMode::AsWritten) {
    const double h = positive ? c + cfg.alpha : cfg.alpha - c;
    if (h > 0.0) {
      t.value += h;
      t.slope += positive ? 1.0 : -1.0;
    }
    if (!positive || cfg.norm_scope == NormScope::AllPairs) {
      t.value += (c + 1.0) * (c + 1.0);
      t.slope += 2.0 * (c + 1.0);
    }
  } else {
    const double D = 1.0 - c;
    if (positive) {
      t.value = D * D;
      t.slope = -2.0 * D;
    } else if (cfg.alpha - D > 0.0) {
      t.value = cfg.alpha - D;
      t.slope = 1.0;
    }
  }
  return t;
}

VectorPair euc_pair(const VectorPair& p, bool positive, const LossConfig& cfg, double& loss) {
  check_dims(p);
  const Eigen::VectorXd diff = p.a - p.b;
  const double d = diff.norm();
  const Term t = euc_term(d, positive, cfg);
  loss += t.value;
  VectorPair g{Eigen::VectorXd::Zero(p.a.size()), Eigen::VectorXd::Zero(p.b.size())};
  if (d > 0.0 && t.slope != 0.0) {
    g.a = (t.slope / d) * diff;
    g.b = -g.a;
  }
  return g;
}

VectorPair ip_pair(const VectorPair& p, bool positive, const LossConfig& cfg, double& loss) {
  check_dims(p);
  const double na = p.a.norm(), nb = p.b.norm();
  if (na == 0.0 || nb == 0.0) throw ValidationError("inner-product metric: zero-norm vector");
  const double c = p.a.dot(p.b) / (na * nb);
  const Term t = ip_term(c, positive, cfg);
  loss += t.value;
  VectorPair g;
  g.a = t.slope * (p.b / (na * nb) - (c / (na * na)) * p.a);
  g.b = t.slope * (p.a / (na * nb) - (c / (nb * nb)) * p.b);
  return g;
}

template <typename PairFn>
PairLoss accumulate(const PairBatch& batch, const LossConfig& cfg, PairFn fn) {
  PairLoss out;
  out.positive_grads.reserve(batch.positives.size());
  out.negative_grads.reserve(batch.negatives.size());
  for (const auto& p : batch.positives) out.positive_grads.push_back(fn(p, true, cfg, out.loss));
  for (const auto& p : batch.negatives) out.negative_grads.push_back(fn(p, false, cfg, out.loss));
  return out;
}

double normwise_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double denom = std::max(analytic.norm() + numeric.norm(), 1e-6);
  return (analytic - numeric).norm() / denom;
}

// Hinge argument of a pair under cfg, used to keep samples off the kink.
double hinge_argument(const VectorPair& p, bool positive, const LossConfig& cfg) {
  if (cfg.metric == Metric::Euc) {
    const double d = (p.a - p.b).norm();
    if (positive) return 1.0;  // no hinge on positives
    const double D = cfg.mode == LossMode::AsWritten ? 1.0 / (1.0 + d) : d / (1.0 + d);
    return cfg.alpha - D;
  }
  const double c = p.a.dot(p.b) / (p.a.norm() * p.b.norm());
  if (cfg.mode == LossMode::AsWritten) return positive ? c + cfg.alpha : cfg.alpha - c;
  if (positive) return 1.0;
  return cfg.alpha - (1.0 - c);
}

}  // namespace

std::string metric_name(Metric m) { return m == Metric::Euc ? "euc" : "ip"; }
std::string loss_mode_name(LossMode m) {
  return m == LossMode::AsWritten ? "as_written" : "distance_interpreted";
}
std::string norm_scope_name(NormScope s) {
  return s == NormScope::AllPairs ? "all_pairs" : "negative_only";
}

Metric parse_metric(const std::string& s) {
  if (s == "euc") return Metric::Euc;
  if (s == "ip") return Metric::IP;
  throw ValidationError("unknown metric '" + s + "' (expected euc or ip)");
}

LossMode parse_loss_mode(const std::string& s) {
  if (s == "as_written") return LossMode::AsWritten;
  if (s == "distance_interpreted") return LossMode::DistanceInterpreted;
  throw ValidationError("unknown loss mode '" + s + "' (expected as_written or distance_interpreted)");
}

NormScope parse_norm_scope(const std::string& s) {
  if (s == "all_pairs") return NormScope::AllPairs;
  if (s == "negative_only") return NormScope::NegativeOnly;
  throw ValidationError("unknown norm scope '" + s + "' (expected all_pairs or negative_only)");
}

void LossConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("margin alpha must lie in (0, 1)");
}

double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ValidationError("euclidean_distance: dimension mismatch");
  return (a - b).norm();
}

double euc_D(double d) { return 1.0 / (1.0 + d); }

double ip_D(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ValidationError("ip_D: dimension mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ValidationError("ip_D: zero-norm vector");
  return a.dot(b) / (na * nb);
}

PairLoss fpd_loss_euc(const PairBatch& batch, const LossConfig& cfg) {
  if (cfg.metric != Metric::Euc) throw ValidationError("fpd_loss_euc: config metric is not euc");
  return accumulate(batch, cfg, euc_pair);
}

PairLoss fpd_loss_ip(const PairBatch& batch, const LossConfig& cfg) {
  if (cfg.metric != Metric::IP) throw ValidationError("fpd_loss_ip: config metric is not ip");
  return accumulate(batch, cfg, ip_pair);
}

PairLoss fpd_loss(const PairBatch& batch, const LossConfig& cfg) {
  return cfg.metric == Metric::Euc ? fpd_loss_euc(batch, cfg) : fpd_loss_ip(batch, cfg);
}

double grad_check_loss(const LossConfig& cfg, std::uint64_t seed) {
  constexpr double kStep = 1e-6;
  constexpr double kKinkGap = 1e-3;
  Rng rng(seed);
  const int dim = static_cast<int>(rng.uniform_int(2, 8));
  auto sample_pair = [&](bool positive) {
    while (true) {
      VectorPair p{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
      const double sa = std::exp(rng.uniform(-2.0, 2.5));
      const double sb = std::exp(rng.uniform(-2.0, 2.5));
      for (int i = 0; i < dim; ++i) {
        p.a(i) = sa * rng.normal();
        p.b(i) = sb * rng.normal();
      }
      // Occasionally make the pair nearly aligned so that hinges switch on.
      if (rng.uniform() < 0.3)
        for (int i = 0; i < dim; ++i) p.b(i) = p.a(i) + 0.05 * sa * rng.normal();
      if ((p.a - p.b).norm() < kKinkGap || p.a.norm() < kKinkGap || p.b.norm() < kKinkGap) continue;
      if (std::abs(hinge_argument(p, positive, cfg)) <= kKinkGap) continue;
      return p;
    }
  };
  PairBatch batch;
  const long n_pos = rng.uniform_int(1, 5), n_neg = rng.uniform_int(1, 5);
  for (long i = 0; i < n_pos; ++i) batch.positives.push_back(sample_pair(true));
  for (long i = 0; i < n_neg; ++i) batch.negatives.push_back(sample_pair(false));

  const PairLoss analytic = fpd_loss(batch, cfg);
  double worst = 0.0;
  // Pairs are additive, so differencing the affected pair alone gives the
  // same derivative with far less cancellation noise than the whole batch.
  auto check_vec = [&](VectorPair& p, bool positive, Eigen::VectorXd& v, const Eigen::VectorXd& g) {
    auto pair_loss = [&] {
      PairBatch one;
      (positive ? one.positives : one.negatives).push_back(p);
      return fpd_loss(one, cfg).loss;
    };
    Eigen::VectorXd num(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double orig = v(i);
      v(i) = orig + kStep;
      const double lp = pair_loss();
      v(i) = orig - kStep;
      const double lm = pair_loss();
      v(i) = orig;
      num(i) = (lp - lm) / (2.0 * kStep);
    }
    worst = std::max(worst, normwise_relative_error(g, num));
  };
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    auto& p = batch.positives[i];
    check_vec(p, true, p.a, analytic.positive_grads[i].a);
    check_vec(p, true, p.b, analytic.positive_grads[i].b);
  }
  for (std::size_t i = 0; i < batch.negatives.size(); ++i) {
    auto& p = batch.negatives[i];
    check_vec(p, false, p.a, analytic.negative_grads[i].a);
    check_vec(p, false, p.b, analytic.negative_grads[i].b);
  }
  return worst;
}

}  // namespace sedfpd
