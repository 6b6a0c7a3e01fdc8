#include "lqvrp/replay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lqvrp {

double replay_priority(double td_error, bool llm, double eps_llm, double eps_floor) {
  return std::abs(td_error) * (1.0 + eps_llm * (llm ? 1.0 : 0.0)) + eps_floor;
}

SumTree::SumTree(size_t leaves) : leaves_(std::max<size_t>(leaves, 1)), base_(1) {
  while (base_ < leaves_) base_ <<= 1;
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::set(size_t leaf, double value) {
  size_t i = base_ + leaf;
  nodes_[i] = value;
  for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

size_t SumTree::find(double mass, size_t populated) const {
  size_t i = 1;
  while (i < base_) {
    const size_t left = 2 * i;
    if (mass < nodes_[left] || nodes_[left + 1] <= 0.0) {
      i = left;
    } else {
      mass -= nodes_[left];
      i = left + 1;
    }
  }
  return std::min(i - base_, populated - 1);
}

PrioritizedReplay::PrioritizedReplay(ReplayConfig cfg) : cfg_(cfg), tree_(cfg.capacity) {
  if (cfg_.capacity == 0) throw ReplayError(ReplayError::Kind::InvalidConfig, "capacity must be positive");
  if (cfg_.eps_llm < 0.0) throw ReplayError(ReplayError::Kind::InvalidConfig, "eps_llm must be >= 0");
  items_.resize(cfg_.capacity);
  serials_.assign(cfg_.capacity, 0);
}

size_t PrioritizedReplay::store(Transition t) {
  const size_t slot = next_;
  items_[slot] = std::move(t);
  serials_[slot] = ++serial_;
  tree_.set(slot, std::pow(items_[slot].priority, alpha_));
  max_priority_ = std::max(max_priority_, items_[slot].priority);
  next_ = (next_ + 1) % cfg_.capacity;
  size_ = std::min(size_ + 1, cfg_.capacity);
  return slot;
}

double PrioritizedReplay::push(Transition t, double td_error) {
  t.priority = replay_priority(td_error, t.llm, cfg_.eps_llm, cfg_.eps_floor);
  const double p = t.priority;
  store(std::move(t));
  return p;
}

double PrioritizedReplay::push_max_priority(Transition t) {
  t.priority = max_priority_;
  store(std::move(t));
  return max_priority_;
}

void PrioritizedReplay::set_alpha(double alpha) {
  if (alpha == alpha_) return;
  alpha_ = alpha;
  for (size_t i = 0; i < size_; ++i) tree_.set(i, std::pow(items_[i].priority, alpha_));
}

double PrioritizedReplay::probability(size_t slot) const { return tree_.get(slot) / tree_.total(); }

SampledBatch PrioritizedReplay::sample(size_t batch_size, double alpha, double beta,
                                       std::mt19937_64& rng) {
  if (batch_size == 0 || size_ < batch_size)
    throw ReplayError(ReplayError::Kind::Underfilled, "buffer holds " + std::to_string(size_) +
                                                          " < " + std::to_string(batch_size));
  set_alpha(alpha);
  SampledBatch batch;
  const double total = tree_.total();
  const double segment = total / static_cast<double>(batch_size);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double max_w = 0.0;
  for (size_t k = 0; k < batch_size; ++k) {
    const double mass = std::min((static_cast<double>(k) + unit(rng)) * segment, std::nextafter(total, 0.0));
    const size_t slot = tree_.find(mass, size_);
    const double p = tree_.get(slot) / total;
    const double w = std::pow(static_cast<double>(size_) * p, -beta);
    batch.transitions.push_back(&items_[slot]);
    batch.refs.push_back({slot, serials_[slot]});
    batch.probabilities.push_back(p);
    batch.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (auto& w : batch.weights) w /= max_w;
  return batch;
}

void PrioritizedReplay::update_priorities(const std::vector<SampleRef>& refs,
                                          const std::vector<double>& td_errors) {
  if (refs.size() != td_errors.size())
    throw ReplayError(ReplayError::Kind::StaleIndex, "refs and td errors differ in length");
  for (size_t k = 0; k < refs.size(); ++k) {
    const auto& r = refs[k];
    if (r.slot >= size_ || serials_[r.slot] != r.serial)
      throw ReplayError(ReplayError::Kind::StaleIndex,
                        "slot " + std::to_string(r.slot) + " was overwritten since sampling");
    auto& item = items_[r.slot];
    const bool boost = item.llm && cfg_.boost_on_refresh;
    item.priority = replay_priority(td_errors[k], boost, cfg_.eps_llm, cfg_.eps_floor);
    max_priority_ = std::max(max_priority_, item.priority);
    tree_.set(r.slot, std::pow(item.priority, alpha_));
  }
}

std::string PrioritizedReplay::dump_text() const {
  std::ostringstream out;
  out << "size " << size_ << " capacity " << cfg_.capacity << " alpha " << alpha_ << "\n";
  for (size_t i = 0; i < size_; ++i)
    out << i << " serial=" << serials_[i] << " action=" << items_[i].action
        << " reward=" << items_[i].reward << " llm=" << items_[i].llm
        << " priority=" << items_[i].priority << "\n";
  return out.str();
}

}  // namespace lqvrp
