// definf — one binary wiring the whole pipeline: graph validation, overlap
// feedback, correction-data assembly, synthetic corpora, training, eval,
// gate analysis, model comparison, and gradient certification.
//
// Exit codes: 0 success, 1 validation findings (invalid graphs, unconverged
// corrections, failed grad check), 2 usage or IO errors.
// Logs go to stderr (silence with DEFINF_LOG=quiet), data to stdout/files.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "toml_lite.hpp"

#include "definf/analysis.hpp"
#include "definf/corrdata.hpp"
#include "definf/dataset.hpp"
#include "definf/feedback.hpp"
#include "definf/graph.hpp"
#include "definf/nn.hpp"
#include "definf/stats.hpp"
#include "definf/synth.hpp"
#include "definf/train.hpp"

using namespace definf;
using ordered_json = nlohmann::ordered_json;

namespace {

bool verbose_logs() {
  static const bool quiet = [] {
    const char* v = std::getenv("DEFINF_LOG");
    return v != nullptr && std::string_view(v) == "quiet";
  }();
  return !quiet;
}

void log_info(const std::string& msg) {
  if (verbose_logs()) std::cerr << msg << "\n";
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  while (!out.empty() && toml_trim(out.back()).empty()) out.pop_back();
  return out;
}

std::vector<InferenceGraph> load_graphs(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<InferenceGraph> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(parse_graph(lines[i]));
    } catch (const Error& e) {
      throw DataError(path + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

// Writes to the file when a path was given, to stdout otherwise.
class OutTarget {
 public:
  explicit OutTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw DataError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

OverlapConfig overlap_config(double threshold) {
  OverlapConfig cfg = OverlapConfig::defaults();
  cfg.jaccard_threshold = threshold;
  return cfg;
}

Corpus load_corpus(const std::string& prefix) {
  return load_dataset(prefix + ".queries.jsonl", prefix + ".graphs.txt");
}

void require_labels(const Corpus& corpus, const std::string& what) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].query.label) {
      throw DataError(what + ": example " + std::to_string(i + 1) + " is unlabeled");
    }
  }
}

void emit_json_line(const std::string& json) {
  std::cout << json;
  if (json.empty() || json.back() != '\n') std::cout << "\n";
}

std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

// ---------------------------------------------------------------- validate

int run_validate(const std::string& path) {
  const auto lines = read_lines(path);
  int findings = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string at = "line " + std::to_string(i + 1) + ": ";
    try {
      const InferenceGraph g = parse_graph(lines[i]);
      for (const Violation& v : validate_graph(g)) {
        std::cout << at << v.render() << "\n";
        ++findings;
      }
    } catch (const Error& e) {
      std::cout << at << e.what() << "\n";
      ++findings;
    }
  }
  log_info("checked " + std::to_string(lines.size()) + " graphs, " +
           std::to_string(findings) + " findings");
  return findings == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- feedback

int run_feedback(const std::string& path, double threshold, const std::string& out_path) {
  const auto graphs = load_graphs(path);
  const OverlapConfig cfg = overlap_config(threshold);
  OutTarget out(out_path);
  int dirty = 0;
  for (const InferenceGraph& g : graphs) {
    const OverlapReport r = detect_overlaps(g, cfg);
    if (!r.clean()) ++dirty;
    out.stream() << r.message << "\n";
  }
  log_info(std::to_string(graphs.size()) + " graphs, " + std::to_string(dirty) +
           " with repetition feedback");
  return 0;
}

// ----------------------------------------------------------------- metrics

int run_metrics(const std::string& path, double threshold) {
  const auto graphs = load_graphs(path);
  const OverlapConfig cfg = overlap_config(threshold);
  std::vector<OverlapReport> reports;
  reports.reserve(graphs.size());
  for (const InferenceGraph& g : graphs) reports.push_back(detect_overlaps(g, cfg));
  const RepetitionMetrics m = repetition_metrics(reports);
  ordered_json j;
  j["per_graph"] = m.per_graph;
  j["pct_with_repetition"] = m.pct_with_repetition;
  j["n_graphs"] = m.n_graphs;
  emit_json_line(j.dump());
  return 0;
}

// ---------------------------------------------------------------- assemble

int run_assemble(const std::string& m_path, const std::string& mstar_path,
                 const std::string& out_path, const std::string& drops_path,
                 double threshold) {
  const auto gm = load_graphs(m_path);
  const auto gs = load_graphs(mstar_path);
  const OverlapConfig cfg = overlap_config(threshold);
  const AssembleResult r = assemble_correction_dataset(gm, gs, cfg);

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path);
  for (const CorrectionExample& ex : r.examples) {
    ordered_json j;
    j["input"] = serialize_graph(ex.input_graph);
    j["feedback"] = ex.feedback;
    j["target"] = serialize_graph(ex.target_graph);
    out << j.dump() << "\n";
  }

  if (!drops_path.empty()) {
    std::ofstream drops(drops_path);
    if (!drops) throw DataError("cannot write " + drops_path);
    for (int idx : r.dropped_indices) {
      const std::size_t i = static_cast<std::size_t>(idx);
      const bool input_clean = detect_overlaps(gm[i], cfg).clean();
      ordered_json j;
      j["index"] = idx;
      j["reason"] = input_clean ? "target_dirty" : "both_dirty";
      j["input"] = serialize_graph(gm[i]);
      j["target"] = serialize_graph(gs[i]);
      drops << j.dump() << "\n";
    }
  }

  ordered_json s;
  s["emitted_with_feedback"] = r.summary.emitted_with_feedback;
  s["emitted_clean"] = r.summary.emitted_clean;
  s["dropped_target_dirty"] = r.summary.dropped_target_dirty;
  s["dropped_both_dirty"] = r.summary.dropped_both_dirty;
  emit_json_line(s.dump());
  log_info("emitted " + std::to_string(r.summary.emitted()) + " examples to " + out_path +
           ", dropped " + std::to_string(r.summary.dropped()));
  return 0;
}

// ----------------------------------------------------------------- correct

int run_correct(const std::string& path, int max_iters, double threshold,
                std::uint64_t salt, const std::string& out_path) {
  const auto graphs = load_graphs(path);
  const OverlapConfig cfg = overlap_config(threshold);
  const Corrector reference = [&cfg, salt](const InferenceGraph& g, const OverlapReport& r) {
    return reference_correct(g, r, cfg, salt);
  };
  OutTarget out(out_path);
  int stuck = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const CorrectionResult r = iterative_correct(graphs[i], reference, cfg, max_iters);
    out.stream() << serialize_graph(r.final_graph) << "\n";
    if (r.converged) {
      log_info("graph " + std::to_string(i + 1) + ": converged after " +
               std::to_string(r.iterations) + " iteration(s)");
    } else {
      ++stuck;
      log_info("graph " + std::to_string(i + 1) + ": not converged within " +
               std::to_string(r.iterations) + " iterations");
    }
  }
  return stuck == 0 ? 0 : 1;
}

// ------------------------------------------------------------------- synth

int run_synth(int n, std::uint64_t seed, const std::string& role_tag_str,
              double strength, double duplicate_rate, int vocab,
              const std::string& prefix) {
  const auto role = parse_role(role_tag_str);
  if (!role) throw DataError("unknown role tag: " + role_tag_str);
  SynthConfig sc;
  sc.n_examples = n;
  sc.signal_role = *role;
  sc.signal_strength = strength;
  sc.duplicate_rate = duplicate_rate;
  sc.vocab_size = vocab;
  sc.seed = seed;
  sc.validate();
  const Corpus corpus = generate(sc);
  save_dataset(corpus, prefix);
  log_info("wrote " + std::to_string(corpus.size()) + " examples to " + prefix +
           ".queries.jsonl and " + prefix + ".graphs.txt");
  ordered_json j;
  j["n"] = corpus.size();
  j["prefix"] = prefix;
  emit_json_line(j.dump());
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainCli {
  std::string encoder, data_prefix, config_path, ckpt, history;
  std::string str_layout = "PH_G_S";
  std::string moe_roles = "C+,C-,S-,M+,M-";
  int d = 64, gcn_layers = 2, gcn_hidden = 0, attn_heads = 1, attn_dim = 256;
  int emb_d = 64, n_hash = 2;
  int epochs = 30, batch_size = 16, grad_accum = 2;
  double dropout = 0.1, emb_scale = 0.0;
  double lr = 1e-3, weight_decay = 0.01, clip_norm = 1.0, warmup_fraction = 0.1;
  double dev_frac = 0.25;
  std::uint64_t seed = 0, emb_seed = 0, split_seed = 0;
  bool paper_preset = false;
};

int parse_config_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(x);
  } catch (...) {
    throw DataError("config key " + key + ": expected an integer, got \"" + v + "\"");
  }
}

double parse_config_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw DataError("config key " + key + ": expected a number, got \"" + v + "\"");
  }
}

std::uint64_t parse_config_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(x);
  } catch (...) {
    throw DataError("config key " + key + ": expected an unsigned integer, got \"" + v + "\"");
  }
}

bool parse_config_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw DataError("config key " + key + ": expected true or false, got \"" + v + "\"");
}

std::vector<NodeRole> parse_moe_roles(const std::string& csv) {
  std::vector<NodeRole> roles;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    const std::string tag = toml_trim(item);
    const auto role = parse_role(tag);
    if (!role) throw DataError("unknown role tag in moe roles: \"" + tag + "\"");
    roles.push_back(*role);
  }
  if (roles.empty()) throw DataError("moe roles list is empty");
  return roles;
}

int run_train(const TrainCli& a, const std::map<std::string, CLI::Option*>& opt) {
  static const std::set<std::string> known = {
      "encoder",     "d",          "gcn_layers",   "gcn_hidden",      "attn_heads",
      "attn_dim",    "dropout",    "str_layout",   "moe_roles",       "emb_d",
      "n_hash",      "emb_seed",   "emb_scale",    "lr",              "epochs",
      "batch_size",  "grad_accum", "weight_decay", "clip_norm",       "warmup_fraction",
      "seed",        "dev_frac",   "split_seed",   "paper_preset"};
  std::map<std::string, std::string> file;
  if (!a.config_path.empty()) file = load_toml_lite(a.config_path);
  for (const auto& [key, value] : file) {
    (void)value;
    if (!known.count(key)) throw DataError("config key " + key + " is not recognized");
  }
  const auto from_file = [&](const char* key) -> const std::string* {
    const auto it = file.find(key);
    return it == file.end() ? nullptr : &it->second;
  };
  const auto flagged = [&](const char* key) { return opt.at(key)->count() > 0; };
  const auto pick_int = [&](const char* key, int flag_value, int base) {
    if (flagged(key)) return flag_value;
    if (const std::string* v = from_file(key)) return parse_config_int(key, *v);
    return base;
  };
  const auto pick_double = [&](const char* key, double flag_value, double base) {
    if (flagged(key)) return flag_value;
    if (const std::string* v = from_file(key)) return parse_config_double(key, *v);
    return base;
  };
  const auto pick_u64 = [&](const char* key, std::uint64_t flag_value, std::uint64_t base) {
    if (flagged(key)) return flag_value;
    if (const std::string* v = from_file(key)) return parse_config_u64(key, *v);
    return base;
  };
  const auto pick_str = [&](const char* key, const std::string& flag_value,
                            const std::string& base) {
    if (flagged(key)) return flag_value;
    if (const std::string* v = from_file(key)) return *v;
    return base;
  };

  const bool preset = flagged("paper_preset")
                          ? a.paper_preset
                          : (from_file("paper_preset") != nullptr &&
                             parse_config_bool("paper_preset", *from_file("paper_preset")));
  const TrainConfig tbase = preset ? TrainConfig::paper_preset() : TrainConfig{};
  const EncoderConfig ebase;
  const EmbedderConfig mbase;

  const std::string enc_name = pick_str("encoder", a.encoder, "");
  if (enc_name.empty()) {
    throw DataError("--encoder is required (flag or config key encoder)");
  }

  EncoderConfig enc;
  enc.kind = parse_encoder_kind(enc_name);
  enc.d = pick_int("d", a.d, ebase.d);
  enc.moe_roles = parse_moe_roles(pick_str("moe_roles", a.moe_roles, "C+,C-,S-,M+,M-"));
  enc.gcn_layers = pick_int("gcn_layers", a.gcn_layers, ebase.gcn_layers);
  enc.gcn_hidden = pick_int("gcn_hidden", a.gcn_hidden, ebase.gcn_hidden);
  enc.attn_heads = pick_int("attn_heads", a.attn_heads, ebase.attn_heads);
  enc.attn_dim = pick_int("attn_dim", a.attn_dim, ebase.attn_dim);
  enc.dropout = pick_double("dropout", a.dropout, ebase.dropout);
  enc.str_layout = parse_str_layout(pick_str("str_layout", a.str_layout, "PH_G_S"));
  enc.validate();

  EmbedderConfig emb;
  emb.d = pick_int("emb_d", a.emb_d, enc.d);
  emb.n_hash = pick_int("n_hash", a.n_hash, mbase.n_hash);
  emb.seed = pick_u64("emb_seed", a.emb_seed, mbase.seed);
  emb.scale = pick_double("emb_scale", a.emb_scale, mbase.scale);

  TrainConfig tc;
  tc.lr = pick_double("lr", a.lr, tbase.lr);
  tc.epochs = pick_int("epochs", a.epochs, tbase.epochs);
  tc.batch_size = pick_int("batch_size", a.batch_size, tbase.batch_size);
  tc.grad_accum = pick_int("grad_accum", a.grad_accum, tbase.grad_accum);
  tc.weight_decay = pick_double("weight_decay", a.weight_decay, tbase.weight_decay);
  tc.clip_norm = pick_double("clip_norm", a.clip_norm, tbase.clip_norm);
  tc.warmup_fraction = pick_double("warmup_fraction", a.warmup_fraction, tbase.warmup_fraction);
  tc.seed = pick_u64("seed", a.seed, tbase.seed);
  tc.validate();

  const double dev_frac = pick_double("dev_frac", a.dev_frac, 0.25);
  const std::uint64_t split_seed = pick_u64("split_seed", a.split_seed, 0);

  const Corpus corpus = load_corpus(a.data_prefix);
  require_labels(corpus, "train");
  const SplitResult split = split_dataset(corpus, dev_frac, split_seed);
  log_info("training " + encoder_kind_name(enc.kind) + " on " +
           std::to_string(split.train.size()) + " examples, dev " +
           std::to_string(split.dev.size()));

  const TrainResult res = train(split.train, split.dev, enc, emb, tc);
  for (const EpochStats& e : res.history.epochs) {
    log_info("epoch " + std::to_string(e.epoch) + ": loss=" + fmt(e.train_loss) +
             " dev_acc=" + fmt(e.dev_acc));
  }
  save_checkpoint(res.model, a.ckpt);
  if (!a.history.empty()) save_history_csv(res.history, a.history);

  ordered_json j;
  j["encoder"] = encoder_kind_name(enc.kind);
  j["n_train"] = split.train.size();
  j["n_dev"] = split.dev.size();
  j["epochs"] = tc.epochs;
  j["best_epoch"] = res.history.best_epoch;
  j["best_dev_acc"] = res.history.best_dev_acc;
  j["ckpt"] = a.ckpt;
  emit_json_line(j.dump());
  return 0;
}

// -------------------------------------------------------------------- eval

int run_eval(const std::string& ckpt, const std::string& prefix, const std::string& traces) {
  EncoderModel model = load_checkpoint(ckpt);
  const Corpus corpus = load_corpus(prefix);
  require_labels(corpus, "eval");
  const EvalResult r = evaluate(model, corpus);
  if (!traces.empty()) {
    std::ofstream out(traces);
    if (!out) throw DataError("cannot write " + traces);
    for (const GateTrace& t : r.traces) {
      ordered_json j;
      j["moe_v"] = t.moe_v;
      j["moe_gx"] = t.moe_gx;
      out << j.dump() << "\n";
    }
    if (r.traces.empty()) {
      log_info("no gate traces: the " + encoder_kind_name(model.cfg.kind) +
               " encoder does not produce them");
    }
  }
  ordered_json j;
  j["kind"] = encoder_kind_name(model.cfg.kind);
  j["accuracy"] = r.accuracy;
  j["n"] = corpus.size();
  emit_json_line(j.dump());
  return 0;
}

// ----------------------------------------------------------------- analyze

int run_analyze_gates(const std::string& ckpt, const std::string& prefix, bool table,
                      const std::string& csv_path) {
  EncoderModel model = load_checkpoint(ckpt, EncoderKind::moe);
  const Corpus corpus = load_corpus(prefix);
  require_labels(corpus, "analyze");
  const EvalResult ev = evaluate(model, corpus);
  std::vector<Label> gold;
  gold.reserve(corpus.size());
  for (const Example& ex : corpus) gold.push_back(*ex.query.label);
  const GateReport r = gate_report(ev.traces, gold, ev.preds);
  std::vector<std::string> names;
  for (NodeRole role : model.cfg.moe_roles) names.push_back(role_tag(role));
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw DataError("cannot write " + csv_path);
    for (const std::string& n : names) csv << n << ",";
    csv << "graph,question,gold,pred\n";
    for (std::size_t i = 0; i < ev.traces.size(); ++i) {
      for (double v : ev.traces[i].moe_v) csv << nlohmann::json(v).dump() << ",";
      csv << nlohmann::json(ev.traces[i].moe_gx[0]).dump() << ","
          << nlohmann::json(ev.traces[i].moe_gx[1]).dump() << ","
          << label_index(gold[i]) << "," << ev.preds[i] << "\n";
    }
  }
  if (table && verbose_logs()) std::cerr << gate_report_table(r, names);
  emit_json_line(gate_report_json(r, names));
  return 0;
}

int run_analyze_compare(const std::string& ckpt_a, const std::string& ckpt_b,
                        const std::string& prefix) {
  EncoderModel model_a = load_checkpoint(ckpt_a);
  EncoderModel model_b = load_checkpoint(ckpt_b);
  const Corpus corpus = load_corpus(prefix);
  require_labels(corpus, "analyze");
  const EvalResult ra = evaluate(model_a, corpus);
  const EvalResult rb = evaluate(model_b, corpus);
  std::vector<int> gold;
  gold.reserve(corpus.size());
  for (const Example& ex : corpus) gold.push_back(label_index(*ex.query.label));
  const CompareReport r = compare_models(ra.preds, rb.preds, gold);
  emit_json_line(compare_report_json(r));
  return 0;
}

// ---------------------------------------------------------------- gradcheck

int run_gradcheck(const std::string& encoder, std::uint64_t seed, double tol, int d) {
  EncoderConfig cfg;
  cfg.kind = parse_encoder_kind(encoder);
  cfg.d = d;
  cfg.attn_dim = d;
  cfg.validate();
  EmbedderConfig emb;
  emb.d = d;
  EncoderModel model = make_model(cfg, emb, seed);
  SynthConfig sc;
  sc.n_examples = 1;
  sc.seed = seed;
  const Corpus corpus = generate(sc);
  const Example& ex = corpus[0];
  const LossBuilder build = [&](Tape& t) {
    const ForwardResult r = model_forward(t, model, ex.query, ex.graph);
    return t.softmax_xent(r.logits, 0);
  };
  const GradCheckReport rep = grad_check(build, model.params, 1e-5, tol);
  log_info("checked " + std::to_string(rep.checked) + " parameters of the " +
           encoder_kind_name(cfg.kind) + " encoder");
  if (rep.ok()) {
    std::cout << "PASS max_rel_err=" << fmt(rep.max_rel_err) << "\n";
    return 0;
  }
  std::cout << "FAIL max_rel_err=" << fmt(rep.max_rel_err) << " worst=" << rep.worst_param
            << "[" << rep.worst_index << "]\n";
  return 1;
}

const std::string kGraphsHelp =
    "Graph corpus file: one graph per line in the form\n"
    "  [C+] text [C-] text [S] text [S-] text [M+] text [M-] text [H+] text [H-] text";

const std::string kDataPrefixHelp =
    "Data prefix P names two files: P.queries.jsonl (one\n"
    "{\"premise\",\"hypothesis\",\"update\",\"label\"} object per line) and P.graphs.txt\n"
    "(one graph per line, aligned by line number).";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"defeasible inference graphs: feedback, correction data, encoders"};
  app.require_subcommand(1);

  // validate
  std::string v_path;
  auto* validate = app.add_subcommand("validate", "Report structural violations per graph line");
  validate->add_option("graphs", v_path, "graph corpus file")->required();
  validate->footer(kGraphsHelp + "\nExit 1 when any finding is printed.");

  // feedback
  std::string f_path, f_out;
  double f_threshold = 0.8;
  auto* feedback = app.add_subcommand("feedback", "Render repetition feedback per graph");
  feedback->add_option("graphs", f_path, "graph corpus file")->required();
  feedback->add_option("--threshold", f_threshold, "Jaccard overlap threshold")
      ->capture_default_str();
  feedback->add_option("--out", f_out, "write messages here instead of stdout");
  feedback->footer(kGraphsHelp + "\nOutput: one feedback message per input line.");

  // metrics
  std::string m_path;
  double m_threshold = 0.8;
  auto* metrics = app.add_subcommand("metrics", "Corpus repetition metrics as JSON");
  metrics->add_option("graphs", m_path, "graph corpus file")->required();
  metrics->add_option("--threshold", m_threshold, "Jaccard overlap threshold")
      ->capture_default_str();
  metrics->footer(kGraphsHelp +
                  "\nOutput: {\"per_graph\", \"pct_with_repetition\", \"n_graphs\"}.");

  // assemble
  std::string a_m, a_mstar, a_out, a_drops;
  double a_threshold = 0.8;
  auto* assemble = app.add_subcommand("assemble", "Build the correction dataset from aligned corpora");
  assemble->add_option("--m", a_m, "graphs from source M")->required();
  assemble->add_option("--mstar", a_mstar, "aligned corrected graphs from source M*")->required();
  assemble->add_option("--out", a_out, "output JSONL path")->required();
  assemble->add_option("--drops", a_drops, "optional JSONL audit file for dropped pairs");
  assemble->add_option("--threshold", a_threshold, "Jaccard overlap threshold")
      ->capture_default_str();
  assemble->footer(kGraphsHelp +
                   "\nOutput lines: {\"input\", \"feedback\", \"target\"}; drops lines add"
                   "\n{\"index\", \"reason\"}. Summary JSON goes to stdout.");

  // correct
  std::string c_path, c_out;
  int c_max_iters = 0;
  double c_threshold = 0.8;
  std::uint64_t c_salt = 0;
  auto* correct = app.add_subcommand("correct", "Iteratively apply the reference corrector");
  correct->add_option("graphs", c_path, "graph corpus file")->required();
  correct->add_option("--max-iters", c_max_iters, "correction iteration cap")->required();
  correct->add_option("--threshold", c_threshold, "Jaccard overlap threshold")
      ->capture_default_str();
  correct->add_option("--salt", c_salt, "suffix-choice salt for the corrector")
      ->capture_default_str();
  correct->add_option("--out", c_out, "write corrected graphs here instead of stdout");
  correct->footer(kGraphsHelp +
                  "\nOutput: one corrected graph per input line. Exit 1 if any graph"
                  "\nfails to converge within the cap.");

  // synth
  int s_n = 512, s_vocab = 64;
  std::uint64_t s_seed = 0;
  std::string s_role = "S-", s_prefix;
  double s_strength = 1.0, s_dup = 0.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--n", s_n, "number of examples")->capture_default_str();
  synth->add_option("--seed", s_seed, "generator seed")->capture_default_str();
  synth->add_option("--signal-role", s_role, "node carrying the planted cue")
      ->capture_default_str();
  synth->add_option("--signal-strength", s_strength, "P(cue agrees with label), in [0.5, 1]")
      ->capture_default_str();
  synth->add_option("--duplicate-rate", s_dup, "P(a node pair is duplicated verbatim)")
      ->capture_default_str();
  synth->add_option("--vocab", s_vocab, "filler vocabulary size")->capture_default_str();
  synth->add_option("--out-prefix", s_prefix, "output path prefix")->required();
  synth->footer(kDataPrefixHelp);

  // train
  TrainCli t;
  std::map<std::string, CLI::Option*> topt;
  auto* train_cmd = app.add_subcommand("train", "Train an encoder and save the best checkpoint");
  topt["encoder"] = train_cmd->add_option("--encoder", t.encoder, "moe|gcn|str|baseline");
  train_cmd->add_option("--data-prefix", t.data_prefix, "labeled corpus prefix")->required();
  train_cmd->add_option("--config", t.config_path, "TOML manifest; flags override its keys");
  train_cmd->add_option("--ckpt", t.ckpt, "checkpoint output path")->required();
  train_cmd->add_option("--history", t.history, "optional epoch,loss,dev_acc CSV");
  topt["d"] = train_cmd->add_option("--d", t.d, "model width")->capture_default_str();
  topt["moe_roles"] =
      train_cmd->add_option("--moe-roles", t.moe_roles, "expert roles, comma-separated")
          ->capture_default_str();
  topt["gcn_layers"] =
      train_cmd->add_option("--gcn-layers", t.gcn_layers, "message-passing layers")
          ->capture_default_str();
  topt["gcn_hidden"] =
      train_cmd->add_option("--gcn-hidden", t.gcn_hidden, "gcn hidden width (0 = d)")
          ->capture_default_str();
  topt["attn_heads"] = train_cmd->add_option("--attn-heads", t.attn_heads, "attention heads")
                           ->capture_default_str();
  topt["attn_dim"] =
      train_cmd->add_option("--attn-dim", t.attn_dim, "attention width (clamped to 8*d)")
          ->capture_default_str();
  topt["dropout"] =
      train_cmd->add_option("--dropout", t.dropout, "dropout rate")->capture_default_str();
  topt["str_layout"] =
      train_cmd->add_option("--str-layout", t.str_layout, "PH_G_S|nodes_only")
          ->capture_default_str();
  topt["emb_d"] = train_cmd->add_option("--emb-d", t.emb_d, "embedder width")
                      ->capture_default_str();
  topt["n_hash"] = train_cmd->add_option("--n-hash", t.n_hash, "hash functions per token")
                       ->capture_default_str();
  topt["emb_seed"] =
      train_cmd->add_option("--emb-seed", t.emb_seed, "embedder seed")->capture_default_str();
  topt["emb_scale"] =
      train_cmd->add_option("--emb-scale", t.emb_scale, "embedding scale (<=0 means 1/sqrt(d))")
          ->capture_default_str();
  topt["lr"] = train_cmd->add_option("--lr", t.lr, "peak learning rate")->capture_default_str();
  topt["epochs"] =
      train_cmd->add_option("--epochs", t.epochs, "training epochs")->capture_default_str();
  topt["batch_size"] =
      train_cmd->add_option("--batch-size", t.batch_size, "examples per batch")
          ->capture_default_str();
  topt["grad_accum"] =
      train_cmd->add_option("--grad-accum", t.grad_accum, "batches per optimizer step")
          ->capture_default_str();
  topt["weight_decay"] =
      train_cmd->add_option("--weight-decay", t.weight_decay, "decoupled weight decay")
          ->capture_default_str();
  topt["clip_norm"] =
      train_cmd->add_option("--clip-norm", t.clip_norm, "global gradient-norm cap")
          ->capture_default_str();
  topt["warmup_fraction"] =
      train_cmd->add_option("--warmup-fraction", t.warmup_fraction, "warmup share of steps")
          ->capture_default_str();
  topt["seed"] =
      train_cmd->add_option("--seed", t.seed, "training seed")->capture_default_str();
  topt["dev_frac"] =
      train_cmd->add_option("--dev-frac", t.dev_frac, "held-out fraction")->capture_default_str();
  topt["split_seed"] =
      train_cmd->add_option("--split-seed", t.split_seed, "split shuffle seed")
          ->capture_default_str();
  topt["paper_preset"] = train_cmd->add_flag("--paper-preset", t.paper_preset,
                                             "start from the paper hyperparameter table");
  train_cmd->footer(kDataPrefixHelp +
                    "\nConfig file: flat TOML `key = value` mirroring every flag"
                    "\n(underscored names, e.g. lr, batch_size, moe_roles). Flags win.");

  // eval
  std::string e_ckpt, e_prefix, e_traces;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled corpus");
  eval_cmd->add_option("--ckpt", e_ckpt, "checkpoint path")->required();
  eval_cmd->add_option("--data-prefix", e_prefix, "labeled corpus prefix")->required();
  eval_cmd->add_option("--traces", e_traces, "write per-example gate traces (moe) as JSONL");
  eval_cmd->footer(kDataPrefixHelp + "\nOutput: {\"kind\", \"accuracy\", \"n\"}.");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Gate statistics and model comparison");
  analyze->require_subcommand(1);
  std::string ag_ckpt, ag_prefix, ag_csv;
  bool ag_table = false;
  auto* gates = analyze->add_subcommand("gates", "Aggregate moe gate statistics");
  gates->add_option("--ckpt", ag_ckpt, "moe checkpoint path")->required();
  gates->add_option("--data-prefix", ag_prefix, "labeled corpus prefix")->required();
  gates->add_flag("--table", ag_table, "also print a plain-text table to stderr");
  gates->add_option("--csv", ag_csv, "per-example gate values as CSV, for external plotting");
  gates->footer(kDataPrefixHelp + "\nOutput: gate report JSON (means, entropies, correlation).");
  std::string ac_a, ac_b, ac_prefix;
  auto* compare = analyze->add_subcommand("compare", "Paired comparison of two checkpoints");
  compare->add_option("--ckpt-a", ac_a, "first checkpoint")->required();
  compare->add_option("--ckpt-b", ac_b, "second checkpoint")->required();
  compare->add_option("--data-prefix", ac_prefix, "labeled corpus prefix")->required();
  compare->footer(kDataPrefixHelp +
                  "\nOutput: confusion cells with McNemar and micro-sign p-values.");

  // gradcheck
  std::string gc_encoder = "moe";
  std::uint64_t gc_seed = 7;
  double gc_tol = 1e-5;
  int gc_d = 4;
  auto* gradcheck = app.add_subcommand("gradcheck", "Certify tape gradients by central differences");
  gradcheck->add_option("--encoder", gc_encoder, "moe|gcn|str|baseline")->capture_default_str();
  gradcheck->add_option("--seed", gc_seed, "model and instance seed")->capture_default_str();
  gradcheck->add_option("--tol", gc_tol, "max relative error accepted")->capture_default_str();
  gradcheck->add_option("--d", gc_d, "model width for the probe")->capture_default_str();
  gradcheck->footer("Output: \"PASS max_rel_err=<x>\" (exit 0) or a FAIL line (exit 1).");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return run_validate(v_path);
    if (feedback->parsed()) return run_feedback(f_path, f_threshold, f_out);
    if (metrics->parsed()) return run_metrics(m_path, m_threshold);
    if (assemble->parsed()) return run_assemble(a_m, a_mstar, a_out, a_drops, a_threshold);
    if (correct->parsed()) return run_correct(c_path, c_max_iters, c_threshold, c_salt, c_out);
    if (synth->parsed())
      return run_synth(s_n, s_seed, s_role, s_strength, s_dup, s_vocab, s_prefix);
    if (train_cmd->parsed()) return run_train(t, topt);
    if (eval_cmd->parsed()) return run_eval(e_ckpt, e_prefix, e_traces);
    if (analyze->parsed()) {
      if (gates->parsed()) return run_analyze_gates(ag_ckpt, ag_prefix, ag_table, ag_csv);
      return run_analyze_compare(ac_a, ac_b, ac_prefix);
    }
    if (gradcheck->parsed()) return run_gradcheck(gc_encoder, gc_seed, gc_tol, gc_d);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
