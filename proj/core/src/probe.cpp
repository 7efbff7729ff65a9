#include "emoprobe/probe.hpp"

#include <cmath>
#include <string>

#include "emoprobe/errors.hpp"
#include "emoprobe/rng.hpp"

namespace emoprobe {

void ProbeParameters::validate() const {
  if (label_projection.rows() != event_projection.rows() ||
      label_projection.cols() != event_projection.cols()) {
    throw ConfigError("parameters", "label and event projections differ in shape");
  }
  if (label_projection.size() == 0) {
    throw ConfigError("parameters", "projections are empty");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature", "must be finite and > 0");
  }
  if (!label_projection.allFinite() || !event_projection.allFinite()) {
    throw ConfigError("parameters", "non-finite projection entry");
  }
}

ProbeParameters init_parameters(std::size_t input_dim, std::size_t projection_dim,
                                double temperature, std::uint64_t seed) {
  if (input_dim == 0) throw ConfigError("input_dim", "must be >= 1");
  if (projection_dim == 0) throw ConfigError("projection_dim", "must be >= 1");
  CounterRng rng(seed, rng_stream::kProbeInit);
  const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const auto rows = static_cast<Eigen::Index>(projection_dim);
  const auto cols = static_cast<Eigen::Index>(input_dim);
  ProbeParameters p;
  p.temperature = temperature;
  p.label_projection.resize(rows, cols);
  p.event_projection.resize(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index i = 0; i < p.label_projection.size(); ++i) {
    p.label_projection.data()[i] = scale * rng.normal();
  }
  for (Eigen::Index i = 0; i < p.event_projection.size(); ++i) {
    p.event_projection.data()[i] = scale * rng.normal();
  }
  round_to_float32(p);
  p.validate();
  return p;
}

void round_to_float32(ProbeParameters& params) {
  params.label_projection = params.label_projection.cast<float>().cast<double>();
  params.event_projection = params.event_projection.cast<float>().cast<double>();
}

bool representable_as_float32(const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    if (static_cast<double>(static_cast<float>(v)) != v) return false;
  }
  return true;
}

Eigen::MatrixXd to_matrix(const EmbeddingMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.count), static_cast<Eigen::Index>(m.dim));
  for (std::size_t i = 0; i < m.count; ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < m.dim; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  return out;
}

namespace {

void check_input_dim(const ProbeParameters& params, Eigen::Index cols, const char* what) {
  if (cols != params.input_dim()) {
    throw AlignmentError(std::string(what) + " dim " + std::to_string(cols) +
                         " does not match probe input dim " +
                         std::to_string(params.input_dim()));
  }
}

}  // namespace

Eigen::MatrixXd normalized_projection(const Eigen::MatrixXd& projection,
                                      const Eigen::MatrixXd& inputs,
                                      ProjectionSide side) {
  Eigen::MatrixXd projected = inputs * projection.transpose();
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    const double norm = projected.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateProjectionError(side, static_cast<std::size_t>(i));
    }
    projected.row(i) /= norm;
  }
  return projected;
}

double similarity(const ProbeParameters& params,
                  const Eigen::Ref<const Eigen::VectorXd>& label_vec,
                  const Eigen::Ref<const Eigen::VectorXd>& event_vec) {
  check_input_dim(params, label_vec.size(), "label vector");
  check_input_dim(params, event_vec.size(), "event vector");
  const Eigen::VectorXd u = params.label_projection * label_vec;
  const Eigen::VectorXd v = params.event_projection * event_vec;
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0)) throw DegenerateProjectionError(ProjectionSide::kLabel, 0);
  if (!(nv > 0.0)) throw DegenerateProjectionError(ProjectionSide::kEvent, 0);
  return u.dot(v) / (nu * nv);
}

Eigen::MatrixXd similarity_matrix(const ProbeParameters& params,
                                  const Eigen::MatrixXd& labels,
                                  const Eigen::MatrixXd& events) {
  check_input_dim(params, labels.cols(), "label matrix");
  check_input_dim(params, events.cols(), "event matrix");
  const Eigen::MatrixXd u =
      normalized_projection(params.label_projection, labels, ProjectionSide::kLabel);
  const Eigen::MatrixXd v =
      normalized_projection(params.event_projection, events, ProjectionSide::kEvent);
  return u * v.transpose();
}

std::size_t ContrastiveBatch::positive_count(std::size_t anchor) const {
  std::size_t n = 0;
  for (auto c : candidate_category) n += (c == anchor_category[anchor]);
  return n;
}

ContrastiveBatch make_batch(const Eigen::MatrixXd& anchors,
                            const std::vector<std::size_t>& anchor_category,
                            const Eigen::MatrixXd& candidates,
                            const std::vector<std::size_t>& candidate_category) {
  if (static_cast<std::size_t>(anchors.rows()) != anchor_category.size() ||
      static_cast<std::size_t>(candidates.rows()) != candidate_category.size()) {
    throw AlignmentError("batch rows and category lists differ in length");
  }
  ContrastiveBatch batch;
  batch.candidates = candidates;
  batch.candidate_category = candidate_category;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < anchor_category.size(); ++i) {
    for (auto c : candidate_category) {
      if (c == anchor_category[i]) {
        keep.push_back(static_cast<Eigen::Index>(i));
        break;
      }
    }
  }
  batch.anchors.resize(static_cast<Eigen::Index>(keep.size()), anchors.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    batch.anchors.row(static_cast<Eigen::Index>(r)) = anchors.row(keep[r]);
    batch.anchor_category.push_back(anchor_category[static_cast<std::size_t>(keep[r])]);
  }
  return batch;
}

namespace {

struct Forward {
  Eigen::MatrixXd u_hat;     // anchors, unit rows
  Eigen::MatrixXd v_hat;     // candidates, unit rows
  Eigen::VectorXd u_norm;
  Eigen::VectorXd v_norm;
  Eigen::MatrixXd softmax;   // n_a x n_c
  Eigen::MatrixXd positive;  // 1/|P(i)| on positives, 0 elsewhere
  Eigen::VectorXd terms;
};

Forward forward(const ProbeParameters& params, const ContrastiveBatch& batch) {
  if (batch.anchor_count() == 0) {
    throw Error("empty contrastive batch: no anchor has a positive candidate");
  }
  check_input_dim(params, batch.anchors.cols(), "anchor");
  check_input_dim(params, batch.candidates.cols(), "candidate");

  Forward f;
  const Eigen::MatrixXd u = batch.anchors * params.label_projection.transpose();
  const Eigen::MatrixXd v = batch.candidates * params.event_projection.transpose();
  f.u_norm = u.rowwise().norm();
  f.v_norm = v.rowwise().norm();
  for (Eigen::Index i = 0; i < f.u_norm.size(); ++i) {
    if (!(f.u_norm(i) > 0.0) || !std::isfinite(f.u_norm(i))) {
      throw DegenerateProjectionError(ProjectionSide::kLabel, static_cast<std::size_t>(i));
    }
  }
  for (Eigen::Index j = 0; j < f.v_norm.size(); ++j) {
    if (!(f.v_norm(j) > 0.0) || !std::isfinite(f.v_norm(j))) {
      throw DegenerateProjectionError(ProjectionSide::kEvent, static_cast<std::size_t>(j));
    }
  }
  f.u_hat = f.u_norm.cwiseInverse().asDiagonal() * u;
  f.v_hat = f.v_norm.cwiseInverse().asDiagonal() * v;

  const Eigen::MatrixXd logits = (f.u_hat * f.v_hat.transpose()) / params.temperature;
  const auto n_a = logits.rows();
  const auto n_c = logits.cols();
  f.softmax.resize(n_a, n_c);
  f.positive = Eigen::MatrixXd::Zero(n_a, n_c);
  f.terms.resize(n_a);
  for (Eigen::Index i = 0; i < n_a; ++i) {
    const double row_max = logits.row(i).maxCoeff();
    const Eigen::ArrayXd shifted = (logits.row(i).array() - row_max).transpose();
    const Eigen::ArrayXd e = shifted.exp();
    const double sum = e.sum();
    const double log_sum = std::log(sum);
    f.softmax.row(i) = (e / sum).matrix().transpose();

    const auto anchor_cat = batch.anchor_category[static_cast<std::size_t>(i)];
    double positive_shifted = 0.0;
    std::size_t n_pos = 0;
    for (Eigen::Index j = 0; j < n_c; ++j) {
      if (batch.candidate_category[static_cast<std::size_t>(j)] == anchor_cat) {
        positive_shifted += shifted(j);
        ++n_pos;
      }
    }
    for (Eigen::Index j = 0; j < n_c; ++j) {
      if (batch.candidate_category[static_cast<std::size_t>(j)] == anchor_cat) {
        f.positive(i, j) = 1.0 / static_cast<double>(n_pos);
      }
    }
    // -(1/|P|) sum_p (z_p - lse) with z and lse both shifted by the row max.
    f.terms(i) = log_sum - positive_shifted / static_cast<double>(n_pos);
  }
  return f;
}

// d/dx of x/|x| applied to `upstream`, row by row.
Eigen::MatrixXd normalization_backward(const Eigen::MatrixXd& unit,
                                       const Eigen::VectorXd& norm,
                                       const Eigen::MatrixXd& upstream) {
  const Eigen::VectorXd radial = (unit.array() * upstream.array()).rowwise().sum();
  Eigen::MatrixXd out = upstream - radial.asDiagonal() * unit;
  return norm.cwiseInverse().asDiagonal() * out;
}

}  // namespace

Eigen::VectorXd supcon_anchor_terms(const ProbeParameters& params,
                                    const ContrastiveBatch& batch) {
  return forward(params, batch).terms;
}

double supcon_loss(const ProbeParameters& params, const ContrastiveBatch& batch) {
  return forward(params, batch).terms.mean();
}

LossAndGradient supcon_gradient(const ProbeParameters& params,
                                const ContrastiveBatch& batch) {
  const Forward f = forward(params, batch);
  const auto n_a = static_cast<double>(f.terms.size());

  // dL/ds_ij for the cosine similarities.
  const Eigen::MatrixXd grad_sim = (f.softmax - f.positive) / (params.temperature * n_a);

  const Eigen::MatrixXd grad_u_hat = grad_sim * f.v_hat;
  const Eigen::MatrixXd grad_v_hat = grad_sim.transpose() * f.u_hat;
  const Eigen::MatrixXd grad_u = normalization_backward(f.u_hat, f.u_norm, grad_u_hat);
  const Eigen::MatrixXd grad_v = normalization_backward(f.v_hat, f.v_norm, grad_v_hat);

  LossAndGradient out;
  out.loss = f.terms.mean();
  out.label_projection = grad_u.transpose() * batch.anchors;
  out.event_projection = grad_v.transpose() * batch.candidates;
  return out;
}

}  // namespace emoprobe
