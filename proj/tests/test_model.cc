// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "gradcheck.h"
#include "sedfpd/error.h"
#include "sedfpd/model.h"
#include "test_util.h"

using namespace sedfpd;
using namespace sedfpd::testing;

namespace {

ModelShape small_shape() {
  ModelShape s;
  s.in_bins = 16;
  s.channels = {4, 6};
  s.freq_pool = {4, 0};
  s.classes = 3;
  s.proj_dim = 5;
  return s;
}

}  // namespace

TEST_CASE("shape validation") {
  ModelShape s = small_shape();
  CHECK(s.bins_per_block() == std::vector<int>{4, 1});
  s.freq_pool = {4, 2};
  CHECK_THROWS_AS(s.bins_per_block(), ValidationError);
  s.freq_pool = {32, 0};
  CHECK_THROWS_AS(s.bins_per_block(), ValidationError);
  s.freq_pool = {4};
  CHECK_THROWS_AS(s.bins_per_block(), ValidationError);
  CHECK(small_shape().time_radius() == 2);
}

TEST_CASE("default geometry maps 620 frames to 620 x 64 embeddings") {
  ModelShape s;
  s.in_bins = 128;
  ModelParams p = ModelParams::init(s, 1);
  Rng rng(1);
  const auto g = random_grid(rng, 620, 128);
  const auto emb = encoder_forward(g, s, p.encoder, Mode::Eval);
  CHECK(emb.rows() == 620);
  CHECK(emb.cols() == 64);
  CHECK(emb.minCoeff() >= 0.0);
  const auto out = classify_frames(emb, p.classifier);
  CHECK(out.frame_probs.rows() == 620);
  CHECK(out.frame_probs.cols() == 10);
  CHECK(project_frames(emb, p.projection).cols() == 64);
}

TEST_CASE("zero input with zero biases gives zero embeddings") {
  const ModelShape s = small_shape();
  ModelParams p = ModelParams::init(s, 3);
  FeatureGrid g;
  g.values = RowMatrix::Zero(9, 16);
  for (Mode m : {Mode::Eval, Mode::Train}) {
    EncoderParams enc = p.encoder;
    CHECK(encoder_forward(g, s, enc, m).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("mismatched input width is rejected") {
  const ModelShape s = small_shape();
  ModelParams p = ModelParams::init(s, 3);
  Rng rng(2);
  CHECK_THROWS_AS(encoder_forward(random_grid(rng, 5, 15), s, p.encoder, Mode::Eval), ValidationError);
}

TEST_CASE("encoder gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rep = encoder_grad_check(seed, 1e-5, Mode::Train);
    INFO("seed " << seed << " worst " << rep.worst);
    CHECK(rep.error < 1e-4);
    CHECK(encoder_grad_check(seed, 1e-5, Mode::Eval).error < 1e-4);
  }
}

TEST_CASE("attention pooling") {
  Rng rng(6);
  const ModelShape s = small_shape();
  ModelParams p = random_params(s, rng);
  // A single frame gets all the attention.
  const RowMatrix one = random_matrix(rng, 1, 6);
  const auto o1 = classify_frames(one, p.classifier);
  CHECK((o1.clip_probs - o1.frame_probs.row(0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((o1.attention.array() - 1.0).abs().maxCoeff() < 1e-15);

  // Constant attention logits pool to the plain average.
  p.classifier.att_w.setZero();
  const RowMatrix emb = random_matrix(rng, 7, 6);
  const auto o = classify_frames(emb, p.classifier);
  CHECK((o.clip_probs - o.frame_probs.colwise().mean()).cwiseAbs().maxCoeff() < 1e-14);

  p = random_params(s, rng);
  const auto r = classify_frames(emb, p.classifier);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(r.attention.col(c).sum() - 1.0) < 1e-12);
  CHECK(r.clip_probs.minCoeff() > 0.0);
  CHECK(r.clip_probs.maxCoeff() < 1.0);
  // Clip probability is a convex combination of frame probabilities.
  for (int c = 0; c < 3; ++c) {
    CHECK(r.clip_probs(c) <= r.frame_probs.col(c).maxCoeff() + 1e-15);
    CHECK(r.clip_probs(c) >= r.frame_probs.col(c).minCoeff() - 1e-15);
  }
}

TEST_CASE("classifier and projection gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CHECK(classifier_grad_check(seed, 1e-6).error < 1e-4);
    CHECK(projection_grad_check(seed, 1e-6).error < 1e-4);
  }
}

TEST_CASE("projection head is affine") {
  Rng rng(9);
  ProjectionParams pp;
  pp.w = Eigen::MatrixXd::Identity(4, 4);
  pp.b = Eigen::RowVectorXd::Zero(4);
  const RowMatrix emb = random_matrix(rng, 5, 4);
  CHECK(project_frames(emb, pp) == emb);
  pp.w.setZero();
  pp.b << 1, 2, 3, 4;
  const RowMatrix out = project_frames(emb, pp);
  for (int t = 0; t < 5; ++t) CHECK(out.row(t) == pp.b);
}

TEST_CASE("full network gradient on a two-clip batch") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto euc = pipeline_grad_check(seed, 1e-6, Metric::Euc);
    INFO("worst " << euc.worst);
    CHECK(euc.error < 1e-3);
    CHECK(pipeline_grad_check(seed, 1e-6, Metric::IP).error < 1e-3);
  }
}

TEST_CASE("backward: zero upstream, both-head sum rule, usage error") {
  Rng rng(10);
  const ModelShape s = small_shape();
  SedNet net(random_params(s, rng));
  CHECK_THROWS_AS(net.backward({}), UsageError);
  const auto grids = random_batch_grids(rng, 2, 16, 3, 6);
  const auto& out = net.forward(grids, Mode::Train);

  const ModelParams zero = net.backward({});
  for (const auto& t : zero.tensors()) CHECK(flat(t.data, t.size).cwiseAbs().maxCoeff() == 0.0);

  OutputGrads cls, proj, both;
  for (int i = 0; i < 2; ++i) {
    cls.d_clip_probs.push_back(random_matrix(rng, 1, 3).row(0));
    proj.d_projections.push_back(random_matrix(rng, out.projections[i].rows(), 5));
  }
  both.d_clip_probs = cls.d_clip_probs;
  both.d_projections = proj.d_projections;
  const auto gc = net.backward(cls), gp = net.backward(proj), gb = net.backward(both);
  const auto vc = gc.tensors(), vp = gp.tensors(), vb = gb.tensors();
  for (std::size_t k = 0; k < vb.size(); ++k)
    CHECK((flat(vb[k].data, vb[k].size) - flat(vc[k].data, vc[k].size) - flat(vp[k].data, vp[k].size))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  // The classifier branch leaves the projection head untouched.
  CHECK(gc.projection.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(gp.classifier.cls_w.cwiseAbs().maxCoeff() == 0.0);

  OutputGrads bad;
  bad.d_clip_probs.push_back(cls.d_clip_probs[0]);
  CHECK_THROWS_AS(net.backward(bad), ValidationError);
}

TEST_CASE("eval mode is pure and local in time") {
  Rng rng(12);
  const ModelShape s = small_shape();
  ModelParams p = random_params(s, rng);
  const ModelParams before = p;
  const auto g = random_grid(rng, 40, 16);
  const auto a = encoder_forward(g, s, p.encoder, Mode::Eval);
  const auto b = encoder_forward(g, s, p.encoder, Mode::Eval);
  CHECK(a == b);
  for (std::size_t k = 0; k < before.encoder.blocks.size(); ++k) {
    CHECK(p.encoder.blocks[k].running_mean == before.encoder.blocks[k].running_mean);
    CHECK(p.encoder.blocks[k].running_var == before.encoder.blocks[k].running_var);
  }
  // Cropping the input changes only frames within the receptive radius of the cut.
  FeatureGrid crop = g;
  crop.values = g.values.topRows(25);
  const auto c = encoder_forward(crop, s, p.encoder, Mode::Eval);
  const int r = s.time_radius();
  CHECK((c.topRows(25 - r) - a.topRows(25 - r)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("train mode updates running statistics") {
  Rng rng(13);
  const ModelShape s = small_shape();
  ModelParams p = ModelParams::init(s, 1);
  const auto g = random_grid(rng, 20, 16);
  encoder_forward(g, s, p.encoder, Mode::Train);
  CHECK(p.encoder.blocks[0].running_mean.cwiseAbs().maxCoeff() > 0.0);
  CHECK((p.encoder.blocks[0].running_var.array() - 1.0).abs().maxCoeff() > 0.0);
}

TEST_CASE("checkpoint round trip and rejection") {
  TempDir dir;
  Rng rng(14);
  const ModelShape s = small_shape();
  const ModelParams p = random_params(s, rng);
  save_checkpoint(dir.file("a.ckpt"), p);
  ModelParams q = ModelParams::init(s, 99);
  load_checkpoint(dir.file("a.ckpt"), q);
  const auto vp = p.tensors(), vq = q.tensors();
  REQUIRE(vp.size() == vq.size());
  for (std::size_t k = 0; k < vp.size(); ++k) CHECK(flat(vp[k].data, vp[k].size) == flat(vq[k].data, vq[k].size));

  ModelShape other = s;
  other.proj_dim = 6;
  ModelParams wrong = ModelParams::init(other, 1);
  CHECK_THROWS_AS(load_checkpoint(dir.file("a.ckpt"), wrong), ValidationError);

  std::string bytes = slurp(dir.file("a.ckpt"));
  bytes[0] = 'X';
  spit(dir.file("bad.ckpt"), bytes);
  CHECK_THROWS_AS(load_checkpoint(dir.file("bad.ckpt"), q), ValidationError);
  spit(dir.file("short.ckpt"), slurp(dir.file("a.ckpt")).substr(0, 40));
  CHECK_THROWS(load_checkpoint(dir.file("short.ckpt"), q));
  CHECK_THROWS_AS(load_checkpoint(dir.file("missing.ckpt"), q), IoError);
}
