#include "hfclass/nn/train.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace hfc::nn {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (epochs < 0) throw std::invalid_argument("epoch count must be non-negative");
  if (eval_batch_size < 1) throw std::invalid_argument("evaluation batch size must be at least 1");
  adam.validate();
  plateau.validate();
}

template <typename Scalar>
Tensor<Scalar> make_batch(const Dataset& data, std::span<const std::size_t> indices) {
  const auto batch = static_cast<Index>(indices.size());
  Tensor<Scalar> x({batch, 2, kVectorLength});
  for (Index b = 0; b < batch; ++b) {
    const auto& s = data.records.at(indices[static_cast<std::size_t>(b)]).samples;
    Scalar* i_row = x.ptr() + b * 2 * kVectorLength;
    Scalar* q_row = i_row + kVectorLength;
    for (Index n = 0; n < kVectorLength; ++n) {
      i_row[n] = static_cast<Scalar>(s[n].real());
      q_row[n] = static_cast<Scalar>(s[n].imag());
    }
  }
  return x;
}

template <typename Scalar>
double cross_entropy(const Tensor<Scalar>& p, std::span<const int> labels) {
  if (p.rank() != 2 || p.dim(0) != static_cast<Index>(labels.size())) {
    throw std::invalid_argument("cross_entropy: probabilities " + shape_string(p.shape()) + " do not match " +
                                std::to_string(labels.size()) + " labels");
  }
  double total = 0.0;
  for (Index b = 0; b < p.dim(0); ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= p.dim(1)) throw std::invalid_argument("cross_entropy: label out of range");
    total -= std::log(std::max(static_cast<double>(p.at(b, y)), 1e-300));
  }
  return total / static_cast<double>(p.dim(0));
}

template <typename Scalar>
Tensor<Scalar> cross_entropy_logit_grad(const Tensor<Scalar>& p, std::span<const int> labels) {
  Tensor<Scalar> g = p;
  const Index batch = p.dim(0);
  for (Index b = 0; b < batch; ++b) g.at(b, labels[static_cast<std::size_t>(b)]) -= Scalar(1);
  g.data() /= static_cast<Scalar>(batch);
  return g;
}

namespace {

std::vector<int> labels_of(const Dataset& data, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(data.records[i].label);
  return out;
}

}  // namespace

template <typename Scalar>
LossAccuracy evaluate_loss(Model<Scalar>& model, const Dataset& data, std::size_t batch_size) {
  LossAccuracy out;
  if (data.empty()) return out;
  double loss = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    idx.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) idx[i - begin] = i;
    const auto labels = labels_of(data, idx);
    const auto p = model.forward(make_batch<Scalar>(data, idx), Mode::infer);
    loss += cross_entropy(p, labels) * static_cast<double>(idx.size());
    for (int pred : argmax_rows(p)) {
      correct += pred == labels[out.predictions.size() - begin] ? 1 : 0;
      out.predictions.push_back(pred);
    }
  }
  out.loss = loss / static_cast<double>(data.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return out;
}

template <typename Scalar>
Trainer<Scalar>::Trainer(Model<Scalar>& model, TrainConfig config)
    : model_(model),
      config_(config),
      adam_(model.parameters(), config.adam),
      scheduler_(config.plateau, config.adam.lr) {
  config_.validate();
}

template <typename Scalar>
TrainingState Trainer<Scalar>::state() const {
  TrainingState s;
  s.step = adam_.step_count();
  s.epoch = epoch_;
  s.lr = adam_.lr();
  s.plateau_best = scheduler_.best();
  s.plateau_bad = scheduler_.num_bad();
  return s;
}

template <typename Scalar>
void Trainer<Scalar>::restore(const TrainingState& s) {
  adam_.set_step_count(s.step);
  adam_.set_lr(s.lr);
  scheduler_.restore(s.lr, s.plateau_best, s.plateau_bad);
  epoch_ = s.epoch;
}

template <typename Scalar>
std::vector<EpochStats> Trainer<Scalar>::fit(const Dataset& train, const Dataset& validation,
                                             const std::function<void(const EpochStats&)>& on_epoch) {
  for (const auto* d : {&train, &validation}) {
    for (const auto& r : d->records) {
      if (r.label >= model_.classes()) {
        throw std::invalid_argument("record label " + std::to_string(r.label) + " exceeds the model's " +
                                    std::to_string(model_.classes()) + " classes");
      }
    }
  }
  std::vector<EpochStats> history;
  while (epoch_ < config_.epochs) {
    ++epoch_;
    EpochStats stats;
    stats.epoch = epoch_;
    stats.lr = adam_.lr();
    const auto batches = split_iter(train, config_.batch_size, split_seed(config_.seed, static_cast<std::uint64_t>(epoch_)));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& idx = batches[bi];
      const auto labels = labels_of(train, idx);
      const auto p = model_.forward(make_batch<Scalar>(train, idx), Mode::train);
      const double loss = cross_entropy(p, labels);
      if (!std::isfinite(loss)) throw TrainingError("non-finite training loss", epoch_, bi);
      loss_sum += loss * static_cast<double>(idx.size());
      const auto preds = argmax_rows(p);
      for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == labels[i] ? 1 : 0;
      model_.backward_logits(cross_entropy_logit_grad(p, labels));
      try {
        adam_.step();
      } catch (const NonFiniteError& e) {
        throw TrainingError(e.what(), epoch_, bi);
      }
    }
    if (!train.empty()) {
      stats.train_loss = loss_sum / static_cast<double>(train.size());
      stats.train_acc = static_cast<double>(correct) / static_cast<double>(train.size());
    }
    double monitored = stats.train_loss;
    if (!validation.empty()) {
      const auto v = evaluate_loss(model_, validation, config_.eval_batch_size);
      stats.val_loss = v.loss;
      stats.val_acc = v.accuracy;
      monitored = v.loss;
    }
    adam_.set_lr(scheduler_.step(monitored));
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc,lr\n";
  char buf[256];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", h.epoch, h.train_loss, h.train_acc, h.val_loss,
                  h.val_acc, h.lr);
    out += buf;
  }
  return out;
}

std::vector<EpochStats> parse_history_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("epoch,", 0) != 0) throw std::invalid_argument("history CSV lacks its header row");
  std::vector<EpochStats> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochStats s;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf", &s.epoch, &s.train_loss, &s.train_acc, &s.val_loss,
                    &s.val_acc, &s.lr) != 6) {
      throw std::invalid_argument("malformed history row: " + line);
    }
    out.push_back(s);
  }
  return out;
}

#define HFC_INSTANTIATE(S)                                                                               \
  template Tensor<S> make_batch<S>(const Dataset&, std::span<const std::size_t>);                        \
  template double cross_entropy<S>(const Tensor<S>&, std::span<const int>);                              \
  template Tensor<S> cross_entropy_logit_grad<S>(const Tensor<S>&, std::span<const int>);                \
  template LossAccuracy evaluate_loss<S>(Model<S>&, const Dataset&, std::size_t);                        \
  template class Trainer<S>;

HFC_INSTANTIATE(float)
HFC_INSTANTIATE(double)

}  // namespace hfc::nn
