#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "emoprobe/embedding_store.hpp"
#include "emoprobe/errors.hpp"

namespace emoprobe {

// Linear probe over frozen embeddings: a label x and an event y are compared
// by the cosine of W_label x and W_event y. Both projections are
// projection_dim x input_dim.
struct ProbeParameters {
  Eigen::MatrixXd label_projection;  // W1
  Eigen::MatrixXd event_projection;  // W2
  double temperature = 0.1;

  Eigen::Index input_dim() const { return label_projection.cols(); }
  Eigen::Index projection_dim() const { return label_projection.rows(); }

  // Throws ConfigError on shape mismatch, non-finite entries or temperature <= 0.
  void validate() const;
};

// Entries i.i.d. N(0, 1/input_dim), rounded to float32 so parameters always
// round-trip through checkpoints bit-exactly.
ProbeParameters init_parameters(std::size_t input_dim, std::size_t projection_dim,
                                double temperature, std::uint64_t seed);

// Rounds every parameter entry to the nearest float32.
void round_to_float32(ProbeParameters& params);
bool representable_as_float32(const Eigen::MatrixXd& m);

Eigen::MatrixXd to_matrix(const EmbeddingMatrix& m);

// Cosine similarity of the projected vectors. Throws
// DegenerateProjectionError if either projection has zero norm.
double similarity(const ProbeParameters& params,
                  const Eigen::Ref<const Eigen::VectorXd>& label_vec,
                  const Eigen::Ref<const Eigen::VectorXd>& event_vec);

// (i, j) = similarity(labels.row(i), events.row(j)). Rows of both inputs
// must have params.input_dim() columns.
Eigen::MatrixXd similarity_matrix(const ProbeParameters& params,
                                  const Eigen::MatrixXd& labels,
                                  const Eigen::MatrixXd& events);

// Rows of `inputs` projected by `projection` and scaled to unit length.
Eigen::MatrixXd normalized_projection(const Eigen::MatrixXd& projection,
                                      const Eigen::MatrixXd& inputs,
                                      ProjectionSide side);

// Anchors are emotion-label embeddings; candidates are event embeddings.
// Only anchors with at least one same-category candidate are kept.
struct ContrastiveBatch {
  Eigen::MatrixXd anchors;
  std::vector<std::size_t> anchor_category;
  Eigen::MatrixXd candidates;
  std::vector<std::size_t> candidate_category;

  std::size_t anchor_count() const { return anchor_category.size(); }
  std::size_t positive_count(std::size_t anchor) const;
};

ContrastiveBatch make_batch(const Eigen::MatrixXd& anchors,
                            const std::vector<std::size_t>& anchor_category,
                            const Eigen::MatrixXd& candidates,
                            const std::vector<std::size_t>& candidate_category);

// Per-anchor supervised contrastive terms
//   l_i = -(1/|P(i)|) sum_{p in P(i)} log softmax_a(s_ia / tau)_p
// computed with log-sum-exp stabilisation. Throws Error on an empty batch.
Eigen::VectorXd supcon_anchor_terms(const ProbeParameters& params,
                                    const ContrastiveBatch& batch);

// Mean of supcon_anchor_terms.
double supcon_loss(const ProbeParameters& params, const ContrastiveBatch& batch);

struct LossAndGradient {
  double loss = 0.0;
  Eigen::MatrixXd label_projection;  // dL/dW1
  Eigen::MatrixXd event_projection;  // dL/dW2
};

// Analytic gradient of supcon_loss, including the normalisation terms.
LossAndGradient supcon_gradient(const ProbeParameters& params,
                                const ContrastiveBatch& batch);

}  // namespace emoprobe
