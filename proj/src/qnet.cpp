#include "lqvrp/qnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

namespace lqvrp {

// ---------------------------------------------------------------------------
// Features

FeatureEncoder::FeatureEncoder(const Instance& inst) : inst_(&inst) {
  double max_x = inst.node(0).x, max_y = inst.node(0).y;
  min_x_ = max_x;
  min_y_ = max_y;
  for (const auto& n : inst.nodes()) {
    min_x_ = std::min(min_x_, n.x);
    min_y_ = std::min(min_y_, n.y);
    max_x = std::max(max_x, n.x);
    max_y = std::max(max_y, n.y);
  }
  span_x_ = std::max(max_x - min_x_, 1e-12);
  span_y_ = std::max(max_y - min_y_, 1e-12);
  horizon_ = std::max(inst.horizon(), 1e-12);
}

Eigen::VectorXd FeatureEncoder::encode(const EnvState& s) const {
  const int n = inst_->customer_count();
  Eigen::VectorXd f(size());
  const auto& at = inst_->node(s.position);
  f[0] = (at.x - min_x_) / span_x_;
  f[1] = (at.y - min_y_) / span_y_;
  f[2] = s.remaining_capacity / inst_->capacity();
  for (int i = 0; i < n; ++i) f[3 + i] = s.pending[static_cast<size_t>(i)] ? 1.0 : 0.0;
  f[3 + n] = std::clamp(s.clock / horizon_, 0.0, 1.0);
  f[4 + n] = std::clamp(static_cast<double>(s.routes_used) / inst_->max_routes(), 0.0, 1.0);
  return f;
}

Mask FeatureEncoder::mask(const std::vector<int>& actions) const {
  Mask m(static_cast<size_t>(action_count()), 0);
  for (int a : actions) m[static_cast<size_t>(a)] = 1;
  return m;
}

// ---------------------------------------------------------------------------
// Helpers

double huber(double x, double delta) {
  const double ax = std::abs(x);
  return ax <= delta ? 0.5 * x * x : delta * (ax - 0.5 * delta);
}

namespace {

double huber_grad(double x, double delta) { return std::clamp(x, -delta, delta); }

int unmasked(const Mask& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

}  // namespace

int masked_argmax(const Eigen::VectorXd& q) {
  int best = -1;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] == kMaskedQ) continue;
    if (best < 0 || q[i] > q[best]) best = static_cast<int>(i);
  }
  return best;
}

Eigen::VectorXd dueling_combine(double value, const Eigen::VectorXd& advantage, const Mask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != advantage.size())
    throw NetError(NetError::Kind::ShapeMismatch, "mask length differs from action count");
  double mean = 0.0;
  const int count = unmasked(mask);
  for (Eigen::Index a = 0; a < advantage.size(); ++a)
    if (mask[static_cast<size_t>(a)]) mean += advantage[a];
  if (count > 0) mean /= count;
  Eigen::VectorXd q(advantage.size());
  for (Eigen::Index a = 0; a < advantage.size(); ++a)
    q[a] = mask[static_cast<size_t>(a)] ? value + advantage[a] - mean : kMaskedQ;
  return q;
}

// ---------------------------------------------------------------------------
// Network

QNet::QNet(NetShape shape, std::uint64_t seed) : shape_(std::move(shape)) {
  if (shape_.inputs <= 0 || shape_.actions <= 0 || shape_.trunk.empty() || shape_.head_hidden <= 0 ||
      std::any_of(shape_.trunk.begin(), shape_.trunk.end(), [](int w) { return w <= 0; }))
    throw NetError(NetError::Kind::ShapeMismatch, "network needs positive layer widths");
  layout();
  std::mt19937_64 rng(seed);
  auto init = [&](const Layer& l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(l.in) * l.out + l.out; ++k)
      params_[l.offset + k] = u(rng);
  };
  for (const auto* group : {&trunk_, &value_, &advantage_})
    for (const auto& l : *group) init(l);
}

void QNet::layout() {
  trunk_.clear();
  value_.clear();
  advantage_.clear();
  Eigen::Index offset = 0;
  auto add = [&](std::vector<Layer>& group, int in, int out) {
    group.push_back({offset, in, out});
    offset += static_cast<Eigen::Index>(in) * out + out;
  };
  int width = shape_.inputs;
  for (int h : shape_.trunk) {
    add(trunk_, width, h);
    width = h;
  }
  if (shape_.dueling) {
    add(value_, width, shape_.head_hidden);
    add(value_, shape_.head_hidden, 1);
  }
  add(advantage_, width, shape_.head_hidden);
  add(advantage_, shape_.head_hidden, shape_.actions);
  if (params_.size() != offset) params_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<const Eigen::MatrixXd> QNet::weight(const Layer& l) const {
  return {params_.data() + l.offset, l.out, l.in};
}

Eigen::Map<const Eigen::VectorXd> QNet::bias(const Layer& l) const {
  return {params_.data() + l.offset + static_cast<Eigen::Index>(l.in) * l.out, l.out};
}

Eigen::MatrixXd QNet::run(const std::vector<Layer>& layers, const Eigen::MatrixXd& x,
                          bool relu_last, std::vector<Eigen::MatrixXd>* acts) const {
  Eigen::MatrixXd h = x;
  for (size_t k = 0; k < layers.size(); ++k) {
    if (acts) acts->push_back(h);
    Eigen::MatrixXd z = weight(layers[k]) * h;
    z.colwise() += bias(layers[k]);
    if (k + 1 < layers.size() || relu_last) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  if (acts) acts->push_back(h);
  return h;
}

// Backpropagates `delta` (gradient w.r.t. the group's output) and writes the
// parameter gradients into `grad`. Returns the gradient w.r.t. the input.
Eigen::MatrixXd QNet::back(const std::vector<Layer>& layers, const std::vector<Eigen::MatrixXd>& acts,
                           Eigen::MatrixXd delta, bool relu_last, Eigen::VectorXd& grad) const {
  for (size_t k = layers.size(); k-- > 0;) {
    const auto& l = layers[k];
    if (k + 1 < layers.size() || relu_last)
      delta = delta.cwiseProduct((acts[k + 1].array() > 0.0).cast<double>().matrix());
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + l.offset, l.out, l.in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + l.offset + static_cast<Eigen::Index>(l.in) * l.out,
                                   l.out);
    gw.noalias() += delta * acts[k].transpose();
    gb += delta.rowwise().sum();
    delta = weight(l).transpose() * delta;
  }
  return delta;
}

HeadOutputs QNet::heads(const Eigen::MatrixXd& features) const {
  if (features.rows() != shape_.inputs)
    throw NetError(NetError::Kind::ShapeMismatch, "feature length " + std::to_string(features.rows()) +
                                                      " != " + std::to_string(shape_.inputs));
  const Eigen::MatrixXd h = run(trunk_, features, true, nullptr);
  HeadOutputs out;
  out.advantage = run(advantage_, h, false, nullptr);
  out.value = shape_.dueling ? run(value_, h, false, nullptr)
                             : Eigen::MatrixXd::Zero(1, features.cols());
  return out;
}

Eigen::MatrixXd QNet::forward_batch(const Eigen::MatrixXd& features,
                                    const std::vector<Mask>& masks) const {
  if (static_cast<Eigen::Index>(masks.size()) != features.cols())
    throw NetError(NetError::Kind::ShapeMismatch, "one mask per state required");
  const auto out = heads(features);
  Eigen::MatrixXd q(shape_.actions, features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const auto& mask = masks[static_cast<size_t>(c)];
    if (shape_.dueling) {
      q.col(c) = dueling_combine(out.value(0, c), out.advantage.col(c), mask);
    } else {
      if (static_cast<Eigen::Index>(mask.size()) != shape_.actions)
        throw NetError(NetError::Kind::ShapeMismatch, "mask length differs from action count");
      for (Eigen::Index a = 0; a < shape_.actions; ++a)
        q(a, c) = mask[static_cast<size_t>(a)] ? out.advantage(a, c) : kMaskedQ;
    }
  }
  return q;
}

Eigen::VectorXd QNet::forward(const Eigen::VectorXd& features, const Mask& mask) const {
  return forward_batch(features, {mask}).col(0);
}

LossGrad QNet::backward(const Batch& batch, LossKind loss, double huber_delta) const {
  const Eigen::Index n = batch.features.cols();
  if (n == 0) throw NetError(NetError::Kind::ShapeMismatch, "empty batch");
  if (batch.features.rows() != shape_.inputs || batch.targets.size() != n ||
      batch.weights.size() != n || static_cast<Eigen::Index>(batch.actions.size()) != n ||
      static_cast<Eigen::Index>(batch.masks.size()) != n)
    throw NetError(NetError::Kind::ShapeMismatch, "batch fields disagree in size");
  if (!batch.features.allFinite() || !batch.targets.allFinite() || !batch.weights.allFinite())
    throw NetError(NetError::Kind::NonFiniteInput, "batch contains non-finite values");

  std::vector<Eigen::MatrixXd> trunk_acts, value_acts, adv_acts;
  const Eigen::MatrixXd h = run(trunk_, batch.features, true, &trunk_acts);
  const Eigen::MatrixXd adv = run(advantage_, h, false, &adv_acts);
  Eigen::MatrixXd val;
  if (shape_.dueling) val = run(value_, h, false, &value_acts);

  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(params_.size());
  out.td_errors.resize(n);
  Eigen::MatrixXd d_adv = Eigen::MatrixXd::Zero(shape_.actions, n);
  Eigen::MatrixXd d_val = Eigen::MatrixXd::Zero(1, n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& mask = batch.masks[static_cast<size_t>(i)];
    const int a = batch.actions[static_cast<size_t>(i)];
    if (a < 0 || a >= shape_.actions || !mask[static_cast<size_t>(a)])
      throw NetError(NetError::Kind::ShapeMismatch, "sampled action is masked or out of range");
    double q = adv(a, i);
    const int count = unmasked(mask);
    if (shape_.dueling) {
      double mean = 0.0;
      for (Eigen::Index j = 0; j < shape_.actions; ++j)
        if (mask[static_cast<size_t>(j)]) mean += adv(j, i);
      q += val(0, i) - mean / count;
    }
    const double err = q - batch.targets[i];
    out.td_errors[i] = err;
    const double w = batch.weights[i] / static_cast<double>(n);
    double dq;
    if (loss == LossKind::Huber) {
      out.loss += w * huber(err, huber_delta);
      dq = w * huber_grad(err, huber_delta);
    } else {
      out.loss += w * 0.5 * err * err;
      dq = w * err;
    }
    d_adv(a, i) += dq;
    if (shape_.dueling) {
      d_val(0, i) = dq;
      for (Eigen::Index j = 0; j < shape_.actions; ++j)
        if (mask[static_cast<size_t>(j)]) d_adv(j, i) -= dq / count;
    }
  }

  Eigen::MatrixXd d_h = back(advantage_, adv_acts, d_adv, false, out.grad);
  if (shape_.dueling) d_h += back(value_, value_acts, d_val, false, out.grad);
  back(trunk_, trunk_acts, d_h, true, out.grad);
  return out;
}

// ---------------------------------------------------------------------------
// Optimisation

Adam::Adam(Eigen::Index size, Options opt)
    : opt_(opt), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw NetError(NetError::Kind::ShapeMismatch, "optimiser state size mismatch");
  ++t_;
  m_ = opt_.beta1 * m_ + (1.0 - opt_.beta1) * grads;
  v_ = opt_.beta2 * v_ + (1.0 - opt_.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opt_.eps);
}

void polyak_update(QNet& target, const QNet& online, double tau) {
  if (!(target.shape() == online.shape()) || target.params().size() != online.params().size())
    throw NetError(NetError::Kind::ShapeMismatch, "target and online networks differ in shape");
  if (!(tau > 0.0 && tau <= 1.0))
    throw NetError(NetError::Kind::ShapeMismatch, "tau must lie in (0, 1]");
  if (tau == 1.0) {
    target.params() = online.params();
    return;
  }
  target.params() = tau * online.params() + (1.0 - tau) * target.params();
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string checkpoint_to_text(const QNet& net) {
  const auto& s = net.shape();
  nlohmann::json doc = {
      {"format_version", kCheckpointFormatVersion},
      {"shape",
       {{"inputs", s.inputs},
        {"actions", s.actions},
        {"trunk", s.trunk},
        {"head_hidden", s.head_hidden},
        {"dueling", s.dueling}}},
      {"params", std::vector<double>(net.params().data(), net.params().data() + net.params().size())}};
  return doc.dump() + "\n";
}

QNet checkpoint_from_text(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format_version") != kCheckpointFormatVersion)
      throw NetError(NetError::Kind::CheckpointCorrupt, "unsupported checkpoint version");
    const auto& js = doc.at("shape");
    NetShape shape;
    shape.inputs = js.at("inputs").get<int>();
    shape.actions = js.at("actions").get<int>();
    shape.trunk = js.at("trunk").get<std::vector<int>>();
    shape.head_hidden = js.at("head_hidden").get<int>();
    shape.dueling = js.at("dueling").get<bool>();
    QNet net(shape, 0);
    const auto values = doc.at("params").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != net.params().size())
      throw NetError(NetError::Kind::CheckpointCorrupt, "parameter count does not match shape");
    net.params() = Eigen::Map<const Eigen::VectorXd>(values.data(), net.params().size());
    if (!net.params().allFinite())
      throw NetError(NetError::Kind::CheckpointCorrupt, "non-finite parameters");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw NetError(NetError::Kind::CheckpointCorrupt, e.what());
  }
}

}  // namespace lqvrp
