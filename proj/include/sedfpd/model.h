// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_MODEL_H_
#define SEDFPD_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sedfpd/features.h"

namespace sedfpd {

enum class Mode { Train, Eval };

/// Network geometry. freq_pool[b] == 0 collapses whatever frequency bins
/// remain in block b; the last block must end with a single bin.
struct ModelShape {
  int in_bins = 0;
  std::vector<int> channels{16, 32, 64};
  std::vector<int> freq_pool{4, 4, 0};
  int kernel = 3;
  int classes = 10;
  int proj_dim = 64;

  int embed_dim() const { return channels.back(); }
  /// Frequency bins after each block; throws ValidationError if any is 0
  /// or the last is not 1.
  std::vector<int> bins_per_block() const;
  /// Temporal receptive-field radius in frames.
  int time_radius() const { return static_cast<int>(channels.size()) * (kernel / 2); }
};

struct ConvBlockParams {
  Eigen::MatrixXd weight;  // out_ch x (in_ch * k * k), column = (ci, dt, df)
  Eigen::VectorXd bias;
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

struct EncoderParams {
  std::vector<ConvBlockParams> blocks;
};

struct ClassifierParams {
  Eigen::MatrixXd cls_w;  // E x C
  Eigen::RowVectorXd cls_b;
  Eigen::MatrixXd att_w;  // E x C
  Eigen::RowVectorXd att_b;
};

struct ProjectionParams {
  Eigen::MatrixXd w;  // E x P
  Eigen::RowVectorXd b;
};

struct TensorView {
  std::string name;
  double* data;
  std::size_t size;
  std::vector<std::int64_t> dims;
  bool trainable;
};

struct ModelParams {
  ModelShape shape;
  EncoderParams encoder;
  ClassifierParams classifier;
  ProjectionParams projection;

  static ModelParams init(const ModelShape& shape, std::uint64_t seed);
  /// Same shapes, every value (buffers included) zero.
  static ModelParams zeros_like(const ModelParams& p);

  /// Fixed-order views over all tensors; running statistics are listed
  /// with trainable = false.
  std::vector<TensorView> tensors();
  std::vector<TensorView> tensors() const {
    return const_cast<ModelParams*>(this)->tensors();
  }
};

using FrameEmbeddings = RowMatrix;  // T x E

/// Intermediates retained by a batch encoder pass.
struct EncoderTape {
  struct Block {
    std::vector<Eigen::MatrixXd> cols;  // per clip: (in_ch*k*k) x (T*F_in)
    std::vector<Eigen::MatrixXd> xhat;  // per clip: out_ch x (T*F_in)
    Eigen::VectorXd inv_std;
    int in_bins = 0;
    int out_bins = 0;
    int pool = 0;
    double count = 0.0;  // elements per channel in the batch statistics
  };
  Mode mode = Mode::Eval;
  std::vector<int> frames;  // T per clip
  std::vector<Block> blocks;

  bool empty() const { return blocks.empty(); }
};

/// Runs the convolutional encoder over a batch. Batch-norm statistics in
/// train mode cover all clips, frames and bins of the batch; train mode also
/// updates the running statistics in `params`.
std::vector<FrameEmbeddings> encoder_forward(std::span<const FeatureGrid> grids, const ModelShape& shape,
                                             EncoderParams& params, Mode mode,
                                             EncoderTape* tape = nullptr);

FrameEmbeddings encoder_forward(const FeatureGrid& grid, const ModelShape& shape,
                                EncoderParams& params, Mode mode);

/// Accumulates parameter gradients into `grads`; optionally writes input
/// gradients (T x F per clip).
void encoder_backward(const EncoderTape& tape, const ModelShape& shape, const EncoderParams& params,
                      std::span<const FrameEmbeddings> d_emb, EncoderParams& grads,
                      std::vector<RowMatrix>* d_input = nullptr);

struct ClassifierOutput {
  RowMatrix frame_probs;        // T x C
  Eigen::RowVectorXd clip_probs;  // C
  RowMatrix attention;          // T x C, columns sum to 1
};

ClassifierOutput classify_frames(const FrameEmbeddings& emb, const ClassifierParams& params);

/// d_frame_probs may be null.
void classify_backward(const FrameEmbeddings& emb, const ClassifierParams& params,
                       const ClassifierOutput& out, const Eigen::RowVectorXd& d_clip_probs,
                       const RowMatrix* d_frame_probs, ClassifierParams& grads, RowMatrix& d_emb);

/// Affine map per frame, identity activation. T x P.
RowMatrix project_frames(const FrameEmbeddings& emb, const ProjectionParams& params);

void project_backward(const FrameEmbeddings& emb, const ProjectionParams& params,
                      const RowMatrix& d_out, ProjectionParams& grads, RowMatrix& d_emb);

struct BatchOutputs {
  std::vector<FrameEmbeddings> embeddings;
  std::vector<ClassifierOutput> classifier;
  std::vector<RowMatrix> projections;
};

/// Upstream gradients at the network outputs. Empty vectors mean "zero".
struct OutputGrads {
  std::vector<Eigen::RowVectorXd> d_clip_probs;
  std::vector<RowMatrix> d_frame_probs;
  std::vector<RowMatrix> d_projections;
};

/// The three-branch network: shared encoder feeding the attention-pooling
/// classifier and the dense projection head. Gradients of both heads meet
/// at the frame embeddings.
class SedNet {
 public:
  explicit SedNet(ModelParams params) : params_(std::move(params)) {}

  const BatchOutputs& forward(std::span<const FeatureGrid> grids, Mode mode);
  /// Reverse pass over the last forward. The tape is kept, so several
  /// backward calls on one forward are allowed. Throws UsageError when no
  /// forward has run.
  ModelParams backward(const OutputGrads& grads, std::vector<RowMatrix>* d_inputs = nullptr) const;

  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  const BatchOutputs& outputs() const { return out_; }

 private:
  ModelParams params_;
  EncoderTape tape_;
  BatchOutputs out_;
  bool has_forward_ = false;
};

/// Versioned binary checkpoint: magic, version, then per tensor its name,
/// dims and float64 little-endian values.
void save_checkpoint(const std::string& path, const ModelParams& params);
/// Loads into tensors already shaped like the checkpoint; any missing name
/// or shape mismatch raises ValidationError.
void load_checkpoint(const std::string& path, ModelParams& params);

}  // namespace sedfpd

#endif  // SEDFPD_MODEL_H_
