#include "definf/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "definf/rng.hpp"

namespace definf {

void TrainConfig::validate() const {
  if (lr <= 0.0) throw Error("lr must be positive");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (grad_accum < 1) throw Error("grad_accum must be >= 1");
  if (weight_decay < 0.0) throw Error("weight_decay must be >= 0");
  if (clip_norm <= 0.0) throw Error("clip_norm must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) {
    throw Error("warmup_fraction must be in [0,1)");
  }
}

TrainConfig TrainConfig::paper_preset() {
  TrainConfig cfg;
  cfg.lr = 2e-5;
  return cfg;
}

double lr_at_step(const TrainConfig& cfg, long long step, long long total_steps) {
  if (total_steps < 1 || step < 1) return 0.0;
  const long long warmup = std::llround(cfg.warmup_fraction * static_cast<double>(total_steps));
  if (warmup > 0 && step <= warmup) {
    return cfg.lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const long long denom = std::max<long long>(1, total_steps - warmup);
  const double frac = static_cast<double>(total_steps - step) / static_cast<double>(denom);
  return cfg.lr * std::max(0.0, frac);
}

int label_index(Label l) { return l == Label::strengthens ? 0 : 1; }

namespace {

int gold_of(const Example& ex, const char* split, std::size_t i) {
  if (!ex.query.label) {
    throw DataError(std::string("missing gold label in ") + split + " example " + std::to_string(i));
  }
  return label_index(*ex.query.label);
}

struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
};

void adam_step(ParamRegistry& reg, AdamState& st, const TrainConfig& cfg, long long t,
               double lr_t) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  auto& tensors = reg.tensors();
  for (std::size_t pi = 0; pi < tensors.size(); ++pi) {
    ParamTensor& p = tensors[pi];
    Mat& m = st.m[pi];
    Mat& v = st.v[pi];
    for (std::size_t j = 0; j < p.value.a.size(); ++j) {
      const double g = p.grad.a[j];
      m.a[j] = cfg.beta1 * m.a[j] + (1.0 - cfg.beta1) * g;
      v.a[j] = cfg.beta2 * v.a[j] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m.a[j] / bc1;
      const double vhat = v.a[j] / bc2;
      p.value.a[j] -= lr_t * (mhat / (std::sqrt(vhat) + cfg.eps));
      p.value.a[j] -= lr_t * cfg.weight_decay * p.value.a[j];
    }
  }
}

std::vector<Mat> snapshot(const ParamRegistry& reg) {
  std::vector<Mat> out;
  for (const auto& p : reg.tensors()) out.push_back(p.value);
  return out;
}

void restore(ParamRegistry& reg, const std::vector<Mat>& snap) {
  auto& tensors = reg.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i].value = snap[i];
}

}  // namespace

TrainResult train(const Corpus& train_split, const Corpus& dev_split,
                  const EncoderConfig& enc_cfg, const EmbedderConfig& emb_cfg,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_split.empty()) throw DataError("EmptySplit(train)");
  if (dev_split.empty()) throw DataError("EmptySplit(dev)");
  for (std::size_t i = 0; i < train_split.size(); ++i) gold_of(train_split[i], "train", i);
  for (std::size_t i = 0; i < dev_split.size(); ++i) gold_of(dev_split[i], "dev", i);

  TrainResult out;
  out.model = make_model(enc_cfg, emb_cfg, cfg.seed);
  EncoderModel& model = out.model;

  AdamState adam;
  for (const auto& p : model.params.tensors()) {
    adam.m.emplace_back(p.value.rows, p.value.cols);
    adam.v.emplace_back(p.value.rows, p.value.cols);
  }

  const long long n = static_cast<long long>(train_split.size());
  const long long batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const long long steps_per_epoch = (batches_per_epoch + cfg.grad_accum - 1) / cfg.grad_accum;
  const long long total_steps = steps_per_epoch * cfg.epochs;

  std::mt19937_64 shuffle_rng(cfg.seed);
  std::mt19937_64 dropout_rng(splitmix64(cfg.seed ^ 0xd1f7c0de5eedULL));

  // The untrained model is the epoch-0 candidate, so the selected checkpoint
  // can never be worse on dev than the initialization.
  out.history.best_epoch = 0;
  out.history.best_dev_acc = evaluate(model, dev_split).accuracy;
  std::vector<Mat> best = snapshot(model.params);

  long long step = 0;
  long long global_batch = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_split.size());
    std::iota(order.begin(), order.end(), 0);
    rng::shuffle(order, shuffle_rng);

    model.params.zero_grad();
    double epoch_loss = 0.0;
    long long window_examples = 0;
    long long window_batches = 0;

    for (long long b = 0; b < batches_per_epoch; ++b, ++global_batch) {
      const std::size_t lo = static_cast<std::size_t>(b) * static_cast<std::size_t>(cfg.batch_size);
      const std::size_t hi = std::min(train_split.size(), lo + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = lo; i < hi; ++i) {
        const Example& ex = train_split[order[i]];
        Tape t;
        ForwardResult fr = model_forward(t, model, ex.query, ex.graph, true, &dropout_rng);
        Tape::Id loss = t.softmax_xent(fr.logits, label_index(*ex.query.label));
        try {
          t.backward(loss);
        } catch (const NonFiniteError&) {
          throw NonFiniteError("NonFiniteLoss at batch " + std::to_string(global_batch));
        }
        epoch_loss += t.value(loss)[0];
      }
      window_examples += static_cast<long long>(hi - lo);
      ++window_batches;

      const bool last_batch = b + 1 == batches_per_epoch;
      if (window_batches == cfg.grad_accum || last_batch) {
        const double inv = 1.0 / static_cast<double>(window_examples);
        for (auto& p : model.params.tensors()) {
          for (double& g : p.grad.a) g *= inv;
        }
        out.history.post_clip_norms.push_back(model.params.clip_grad_norm(cfg.clip_norm));
        ++step;
        adam_step(model.params, adam, cfg, step, lr_at_step(cfg, step, total_steps));
        model.params.zero_grad();
        window_examples = 0;
        window_batches = 0;
      }
    }

    EpochStats es;
    es.epoch = epoch;
    es.train_loss = epoch_loss / static_cast<double>(n);
    es.dev_acc = evaluate(model, dev_split).accuracy;
    out.history.epochs.push_back(es);
    if (es.dev_acc > out.history.best_dev_acc) {
      out.history.best_dev_acc = es.dev_acc;
      out.history.best_epoch = epoch;
      best = snapshot(model.params);
    }
  }

  restore(model.params, best);
  return out;
}

EvalResult evaluate(EncoderModel& model, const Corpus& data) {
  EvalResult out;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Example& ex = data[i];
    Tape t;
    ForwardResult fr = model_forward(t, model, ex.query, ex.graph, false, nullptr);
    const Mat& logits = t.value(fr.logits);
    const int pred = logits[1] > logits[0] ? 1 : 0;
    out.preds.push_back(pred);
    if (fr.trace) out.traces.push_back(*fr.trace);
    if (pred == gold_of(ex, "eval", i)) ++correct;
  }
  out.accuracy = data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
  return out;
}

namespace {

nlohmann::json config_to_json(const EncoderConfig& c) {
  nlohmann::json j;
  j["d"] = c.d;
  nlohmann::json roles = nlohmann::json::array();
  for (NodeRole r : c.moe_roles) roles.push_back(std::string(role_tag(r)));
  j["moe_roles"] = roles;
  j["gcn_layers"] = c.gcn_layers;
  j["gcn_hidden"] = c.gcn_hidden;
  j["attn_heads"] = c.attn_heads;
  j["attn_dim"] = c.attn_dim;
  j["dropout"] = c.dropout;
  j["str_layout"] = str_layout_name(c.str_layout);
  return j;
}

EncoderConfig config_from_json(const nlohmann::json& j, EncoderKind kind) {
  EncoderConfig c;
  c.kind = kind;
  c.d = j.at("d").get<int>();
  c.moe_roles.clear();
  for (const auto& r : j.at("moe_roles")) {
    auto role = parse_role(r.get<std::string>());
    if (!role) throw CheckpointError("CorruptCheckpoint: bad role " + r.get<std::string>());
    c.moe_roles.push_back(*role);
  }
  c.gcn_layers = j.at("gcn_layers").get<int>();
  c.gcn_hidden = j.at("gcn_hidden").get<int>();
  c.attn_heads = j.at("attn_heads").get<int>();
  c.attn_dim = j.at("attn_dim").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.str_layout = parse_str_layout(j.at("str_layout").get<std::string>());
  return c;
}

}  // namespace

void save_checkpoint(const EncoderModel& model, const std::string& path) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["kind"] = encoder_kind_name(model.cfg.kind);
  j["seed"] = model.seed;
  j["config"] = config_to_json(model.cfg);
  nlohmann::json emb;
  emb["d"] = model.embedder.d;
  emb["n_hash"] = model.embedder.n_hash;
  emb["seed"] = model.embedder.seed;
  emb["scale"] = model.embedder.scale;
  j["embedder"] = emb;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : model.params.tensors()) {
    nlohmann::json t;
    t["shape"] = {p.value.rows, p.value.cols};
    t["values"] = p.value.a;
    params[p.name] = t;
  }
  j["params"] = params;
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  out << j.dump(2) << "\n";
}

EncoderModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("CorruptCheckpoint: ") + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("VersionMismatch: checkpoint version " + std::to_string(version) +
                            ", expected " + std::to_string(kCheckpointVersion));
    }
    const EncoderKind kind = parse_encoder_kind(j.at("kind").get<std::string>());
    EncoderModel model;
    model.cfg = config_from_json(j.at("config"), kind);
    model.seed = j.at("seed").get<std::uint64_t>();
    model.embedder.d = j.at("embedder").at("d").get<int>();
    model.embedder.n_hash = j.at("embedder").at("n_hash").get<int>();
    model.embedder.seed = j.at("embedder").at("seed").get<std::uint64_t>();
    model.embedder.scale = j.at("embedder").at("scale").get<double>();
    model.params = init_params(model.cfg, model.seed);

    const auto& params = j.at("params");
    std::size_t seen = 0;
    for (auto& p : model.params.tensors()) {
      if (!params.contains(p.name)) {
        throw CheckpointError("CorruptCheckpoint: missing tensor " + p.name);
      }
      const auto& t = params.at(p.name);
      const auto shape = t.at("shape").get<std::vector<int>>();
      if (shape.size() != 2 || shape[0] != p.value.rows || shape[1] != p.value.cols) {
        throw CheckpointError("CorruptCheckpoint: shape mismatch for " + p.name);
      }
      const auto values = t.at("values").get<std::vector<double>>();
      if (values.size() != p.value.a.size()) {
        throw CheckpointError("CorruptCheckpoint: value count mismatch for " + p.name);
      }
      p.value.a = values;
      ++seen;
    }
    if (seen != params.size()) {
      throw CheckpointError("CorruptCheckpoint: unexpected extra tensors");
    }
    return model;
  } catch (const CheckpointError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("CorruptCheckpoint: ") + e.what());
  }
}

EncoderModel load_checkpoint(const std::string& path, EncoderKind expect) {
  EncoderModel model = load_checkpoint(path);
  if (model.cfg.kind != expect) {
    throw CheckpointError("KindMismatch: checkpoint is " + encoder_kind_name(model.cfg.kind) +
                          ", expected " + encoder_kind_name(expect));
  }
  return model;
}

void save_history_csv(const TrainHistory& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write history " + path);
  out << "epoch,loss,dev_acc\n";
  for (const EpochStats& e : h.epochs) {
    out << e.epoch << "," << nlohmann::json(e.train_loss).dump() << ","
        << nlohmann::json(e.dev_acc).dump() << "\n";
  }
}

}  // namespace definf
