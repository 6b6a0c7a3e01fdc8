#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqvrp/env.hpp"
#include "lqvrp/instance.hpp"

namespace lqvrp {

// Q-value reported for masked actions.
inline constexpr double kMaskedQ = -std::numeric_limits<double>::infinity();

using Mask = std::vector<std::uint8_t>;

// Maps an environment state to a vector in [0, 1]^(N + 5):
// position coordinates scaled to the instance bounding box, remaining
// capacity share, pending bits, clock / horizon (clipped), routes used / K.
class FeatureEncoder {
 public:
  explicit FeatureEncoder(const Instance& inst);

  int size() const { return inst_->customer_count() + 5; }
  int action_count() const { return inst_->size(); }
  Eigen::VectorXd encode(const EnvState& s) const;
  Mask mask(const std::vector<int>& actions) const;

 private:
  const Instance* inst_;
  double min_x_ = 0.0, min_y_ = 0.0, span_x_ = 1.0, span_y_ = 1.0;
  double horizon_ = 1.0;
};

struct NetShape {
  int inputs = 0;
  int actions = 0;
  std::vector<int> trunk{128, 128};
  int head_hidden = 64;
  bool dueling = true;

  bool operator==(const NetShape&) const = default;
};

class NetError : public std::runtime_error {
 public:
  enum class Kind { ShapeMismatch, NonFiniteInput, CheckpointCorrupt };
  NetError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class LossKind { Huber, Squared };

struct Batch {
  Eigen::MatrixXd features;     // inputs x batch
  std::vector<int> actions;
  Eigen::VectorXd targets;
  Eigen::VectorXd weights;      // importance weights
  std::vector<Mask> masks;      // legal actions of each sampled state
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd td_errors;    // Q(s_i, a_i) - y_i
};

struct HeadOutputs {
  Eigen::MatrixXd value;        // 1 x batch (zero when not dueling)
  Eigen::MatrixXd advantage;    // actions x batch
};

// Dense dueling Q-network. All parameters live in one contiguous vector so
// optimiser, target averaging and checkpoints operate on a flat view.
class QNet {
 public:
  QNet() = default;
  QNet(NetShape shape, std::uint64_t seed);

  const NetShape& shape() const { return shape_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  HeadOutputs heads(const Eigen::MatrixXd& features) const;
  // Q-values for one state; masked entries are kMaskedQ.
  Eigen::VectorXd forward(const Eigen::VectorXd& features, const Mask& mask) const;
  // Column-wise forward for a batch of states.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& features, const std::vector<Mask>& masks) const;

  // Importance-weighted mean loss and its exact gradient.
  LossGrad backward(const Batch& batch, LossKind loss = LossKind::Huber, double huber_delta = 1.0) const;

 private:
  struct Layer {
    Eigen::Index offset;
    int in;
    int out;
  };

  void layout();
  Eigen::Map<const Eigen::MatrixXd> weight(const Layer& l) const;
  Eigen::Map<const Eigen::VectorXd> bias(const Layer& l) const;
  Eigen::MatrixXd run(const std::vector<Layer>& layers, const Eigen::MatrixXd& x, bool relu_last,
                      std::vector<Eigen::MatrixXd>* acts) const;
  Eigen::MatrixXd back(const std::vector<Layer>& layers, const std::vector<Eigen::MatrixXd>& acts,
                       Eigen::MatrixXd delta, bool relu_last, Eigen::VectorXd& grad) const;

  NetShape shape_;
  Eigen::VectorXd params_;
  std::vector<Layer> trunk_, value_, advantage_;
};

// Index of the largest unmasked entry (lowest index on ties), -1 if none.
int masked_argmax(const Eigen::VectorXd& q);

// Dueling aggregation over unmasked actions, exposed for testing.
Eigen::VectorXd dueling_combine(double value, const Eigen::VectorXd& advantage, const Mask& mask);

double huber(double x, double delta = 1.0);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  using Options = AdamOptions;

  Adam() = default;
  explicit Adam(Eigen::Index size, Options opt = {});

  // One bias-corrected adaptive-moment update in place.
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr);
  long steps() const { return t_; }

 private:
  Options opt_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

// target <- tau * online + (1 - tau) * target.
void polyak_update(QNet& target, const QNet& online, double tau);

inline constexpr int kCheckpointFormatVersion = 1;
std::string checkpoint_to_text(const QNet& net);
QNet checkpoint_from_text(const std::string& text);

}  // namespace lqvrp
