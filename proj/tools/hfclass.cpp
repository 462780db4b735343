// hfclass: dataset generation, training, evaluation and file inspection.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hfclass/dataset.hpp"
#include "hfclass/eval.hpp"
#include "hfclass/nn/checkpoint.hpp"
#include "hfclass/nn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw UsageError(std::string("cannot open ") + what + " '" + path.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string digest_of(const std::string& text) {
  const auto h = hfc::fnv1a64({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- generate ------------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a) {
  hfc::GenerationConfig config;
  try {
    config = hfc::config_from_json(read_text(a.config, "config file"));
    if (a.seed) config.master_seed = *a.seed;
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(a.config + ": " + e.what());
  }
  const auto r = hfc::generate(config, a.out);
  std::cout << "config digest " << r.digest << "  master seed " << config.master_seed << '\n'
            << "train      " << r.train_count << " records -> " << r.train_path.string() << '\n'
            << "validation " << r.validation_count << " records -> " << r.validation_path.string() << '\n'
            << "manifest   " << r.manifest_path.string() << '\n';
  return 0;
}

// --- train ---------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string arch = "classical_cnn";
  std::optional<int> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::uint64_t> seed;
  std::string resume;
  std::string precision = "float";
};

/// Training settings: every tunable constant of the optimizer, scheduler and
/// architecture options, overridable from a JSON file.
struct TrainSettings {
  hfc::nn::TrainConfig train;
  hfc::nn::ArchOptions arch;
  std::uint64_t model_seed = 0;

  json to_json() const {
    return json{{"batch_size", train.batch_size},
                {"epochs", train.epochs},
                {"lr", train.adam.lr},
                {"beta1", train.adam.beta1},
                {"beta2", train.adam.beta2},
                {"epsilon", train.adam.epsilon},
                {"plateau_factor", train.plateau.factor},
                {"plateau_patience", train.plateau.patience},
                {"plateau_min_delta", train.plateau.min_delta},
                {"plateau_min_lr", train.plateau.min_lr},
                {"seed", train.seed},
                {"model_seed", model_seed},
                {"dense_units", arch.dense_units},
                {"conv_dropout", arch.conv_dropout},
                {"dense_dropout", arch.dense_dropout}};
  }
};

TrainSettings settings_from_json(const std::string& text) {
  TrainSettings s;
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("training config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k == "batch_size") s.train.batch_size = v.get<std::size_t>();
    else if (k == "epochs") s.train.epochs = v.get<int>();
    else if (k == "lr") s.train.adam.lr = v.get<double>();
    else if (k == "beta1") s.train.adam.beta1 = v.get<double>();
    else if (k == "beta2") s.train.adam.beta2 = v.get<double>();
    else if (k == "epsilon") s.train.adam.epsilon = v.get<double>();
    else if (k == "plateau_factor") s.train.plateau.factor = v.get<double>();
    else if (k == "plateau_patience") s.train.plateau.patience = v.get<int>();
    else if (k == "plateau_min_delta") s.train.plateau.min_delta = v.get<double>();
    else if (k == "plateau_min_lr") s.train.plateau.min_lr = v.get<double>();
    else if (k == "seed") s.train.seed = v.get<std::uint64_t>();
    else if (k == "model_seed") s.model_seed = v.get<std::uint64_t>();
    else if (k == "dense_units") s.arch.dense_units = v.get<int>();
    else if (k == "conv_dropout") s.arch.conv_dropout = v.get<double>();
    else if (k == "dense_dropout") s.arch.dense_dropout = v.get<double>();
    else throw std::invalid_argument("unknown key '" + k + "'");
  }
  return s;
}

/// Directory arguments resolve to the named split file inside them.
fs::path dataset_file(const fs::path& p, const char* split) {
  if (fs::is_directory(p)) return p / (std::string(split) + ".hfds");
  return p;
}

template <typename Scalar>
int run_train(const TrainArgs& a, TrainSettings settings, hfc::nn::Arch arch) {
  using namespace hfc::nn;
  const fs::path data(a.data);
  const fs::path train_file = dataset_file(data, "train");
  if (!fs::exists(train_file)) throw UsageError("dataset file '" + train_file.string() + "' not found");
  const hfc::Dataset train = hfc::load_file(train_file);
  hfc::Dataset validation;
  if (fs::is_directory(data) && fs::exists(data / "validation.hfds")) validation = hfc::load_file(data / "validation.hfds");

  fs::create_directories(a.out);
  std::optional<Model<Scalar>> model;
  TrainingState state;
  std::optional<SavedMoments> moments;
  std::vector<EpochStats> history;
  if (!a.resume.empty()) {
    if (!fs::exists(a.resume)) throw UsageError("checkpoint '" + a.resume + "' not found");
    auto ck = load_checkpoint<Scalar>(a.resume);
    model.emplace(std::move(ck.model));
    state = ck.state;
    moments = std::move(ck.moments);
    const fs::path prior = fs::path(a.resume).parent_path() / "history.csv";
    if (fs::exists(prior)) history = parse_history_csv(read_text(prior, "history"));
    std::cout << "resuming " << a.resume << " at epoch " << state.epoch << ", step " << state.step << '\n';
  } else {
    model.emplace(build_model<Scalar>(arch, settings.model_seed, settings.arch));
    state.lr = settings.train.adam.lr;
  }

  const std::string settings_json = settings.to_json().dump();
  const std::string digest = digest_of(settings_json + std::string(arch_name(model->arch())) + a.precision);
  std::cout << "architecture " << arch_name(model->arch()) << ": " << model->parameter_count() << " parameters, "
            << model->weighted_layer_count() << " weighted layers\n"
            << "train " << train.size() << " records, validation " << validation.size() << " records\n"
            << "run config digest " << digest << '\n';
  json run{{"command", "train"},
           {"config_digest", digest},
           {"arch", arch_name(model->arch())},
           {"precision", a.precision},
           {"data", a.data},
           {"settings", json::parse(settings_json)}};
  write_text(fs::path(a.out) / "run.json", run.dump(2) + "\n");

  Trainer<Scalar> trainer(*model, settings.train);
  if (!a.resume.empty()) {
    trainer.restore(state);
    if (moments) restore_moments(trainer.optimizer(), *moments);
  }
  const fs::path history_path = fs::path(a.out) / "history.csv";
  auto on_epoch = [&](const EpochStats& s) {
    history.push_back(s);
    std::printf("epoch %3d  loss %.4f  acc %.4f  val_loss %.4f  val_acc %.4f  lr %.2e\n", s.epoch, s.train_loss,
                s.train_acc, s.val_loss, s.val_acc, s.lr);
    std::fflush(stdout);
    write_text(history_path, history_csv(history));
    save_checkpoint(fs::path(a.out) / "checkpoint.hfnn", *model, trainer.state(), &trainer.optimizer());
  };
  trainer.fit(train, validation, on_epoch);
  write_text(history_path, history_csv(history));
  save_checkpoint(fs::path(a.out) / "checkpoint.hfnn", *model, trainer.state(), &trainer.optimizer());
  std::cout << "checkpoint " << (fs::path(a.out) / "checkpoint.hfnn").string() << " at step " << trainer.state().step
            << '\n';
  return 0;
}

int cmd_train(const TrainArgs& a) {
  TrainSettings settings;
  if (!a.config.empty()) {
    try {
      settings = settings_from_json(read_text(a.config, "config file"));
    } catch (const std::exception& e) {
      if (dynamic_cast<const UsageError*>(&e)) throw;
      throw UsageError(a.config + ": " + e.what());
    }
  }
  if (a.epochs) settings.train.epochs = *a.epochs;
  if (a.batch_size) settings.train.batch_size = *a.batch_size;
  if (a.seed) {
    settings.train.seed = *a.seed;
    settings.model_seed = *a.seed;
  }
  const auto arch = hfc::nn::arch_from_name(a.arch);
  if (!arch) throw UsageError("unknown architecture '" + a.arch + "'; valid names: " + hfc::nn::arch_names());
  try {
    settings.train.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.precision == "double") return run_train<double>(a, settings, *arch);
  return run_train<float>(a, settings, *arch);
}

// --- eval ----------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
};

template <typename Scalar>
int run_eval(const EvalArgs& a) {
  if (!fs::exists(a.checkpoint)) throw UsageError("checkpoint '" + a.checkpoint + "' not found");
  auto ck = hfc::nn::load_checkpoint<Scalar>(a.checkpoint);
  const fs::path data(a.data);
  const fs::path file = dataset_file(data, "validation");
  if (!fs::exists(file)) throw UsageError("dataset file '" + file.string() + "' not found");
  const hfc::Dataset dataset = hfc::load_file(file);

  hfc::DatasetManifest manifest;
  const fs::path manifest_path = (fs::is_directory(data) ? data : data.parent_path()) / "manifest.json";
  if (fs::exists(manifest_path)) {
    manifest = hfc::manifest_from_json(read_text(manifest_path, "manifest"));
  } else {
    for (const auto& m : hfc::all_modes()) manifest.mode_names.emplace_back(m.name);
  }
  if (ck.model.classes() != static_cast<int>(manifest.mode_names.size())) {
    throw UsageError("checkpoint has " + std::to_string(ck.model.classes()) + " classes but the dataset defines " +
                     std::to_string(manifest.mode_names.size()));
  }
  const hfc::EvalReport report = hfc::evaluate(ck.model, dataset);
  const auto rendered = hfc::render_report(report, manifest);
  hfc::write_report(rendered, a.out);
  std::cout << rendered.summary << "reports written to " << a.out << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  if (!fs::exists(a.checkpoint)) throw UsageError("checkpoint '" + a.checkpoint + "' not found");
  const auto bytes = hfc::nn::read_file_bytes(a.checkpoint);
  const auto summary = hfc::nn::summarize_checkpoint(bytes);
  return summary.scalar_bytes == 8 ? run_eval<double>(a) : run_eval<float>(a);
}

// --- inspect -------------------------------------------------------------------

int cmd_inspect(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("file '" + path + "' not found");
  const auto bytes = hfc::nn::read_file_bytes(path);
  auto matches = [&](const std::array<char, 4>& magic) {
    std::size_t i = 0;
    while (i < magic.size() && i < bytes.size() && bytes[i] == static_cast<std::uint8_t>(magic[i])) ++i;
    return i;
  };
  const std::size_t ds = matches(hfc::kDatasetMagic);
  const std::size_t ck = matches(hfc::nn::kCheckpointMagic);
  if (ds == 4) {
    const hfc::Dataset d = hfc::load(bytes);
    std::cout << "dataset " << path << "\n  format version " << hfc::kDatasetVersion << ", sample rate "
              << d.sample_rate_hz << " Hz, vector length " << hfc::kVectorLength << "\n  records " << d.size()
              << "\n  mode histogram:\n";
    const auto h = hfc::label_histogram(d);
    for (int i = 0; i < hfc::kModeCount; ++i) {
      if (h[static_cast<std::size_t>(i)] == 0) continue;
      std::printf("    %-14s %zu\n", std::string(hfc::mode_spec(static_cast<hfc::ModeId>(i)).name).c_str(),
                  h[static_cast<std::size_t>(i)]);
    }
    return 0;
  }
  if (ck == 4) {
    const auto s = hfc::nn::summarize_checkpoint(bytes);
    std::cout << "checkpoint " << path << "\n  format version " << s.version << ", " << 8 * s.scalar_bytes
              << "-bit values, architecture " << hfc::nn::arch_name(s.arch) << ", input "
              << hfc::nn::shape_string(s.sample_shape) << "\n  layers:\n";
    for (std::size_t i = 0; i < s.specs.size(); ++i) {
      std::printf("    %3zu  %-28s %10lld\n", i, hfc::nn::describe(s.specs[i]).c_str(),
                  static_cast<long long>(s.layer_parameters[i]));
    }
    std::cout << "  total parameters " << s.total_parameters << ", weighted layers " << s.weighted_layers
              << "\n  step " << s.state.step << ", epoch " << s.state.epoch << ", lr " << s.state.lr
              << (s.has_moments ? ", optimizer moments saved" : "") << '\n';
    return 0;
  }
  const std::size_t bad = std::max(ds, ck);
  throw hfc::FormatError("unknown magic: not a dataset (HFDS) or checkpoint (HFNN); first bad byte", bad);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HF transmission-mode classifier: generate IQ datasets, train, evaluate, inspect"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate train/validation datasets from a JSON config");
  g->add_option("--config", gen.config, "Generation config file (JSON)")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Override the master seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a classifier on a generated dataset");
  t->add_option("--data", tr.data, "Dataset directory or train .hfds file")->required();
  t->add_option("--out", tr.out, "Output directory for checkpoint and history")->required();
  t->add_option("--config", tr.config, "Training config file (JSON)");
  t->add_option("--arch", tr.arch, "classical_cnn, all_conv, deep_cnn or residual");
  t->add_option("--epochs", tr.epochs, "Total epochs");
  t->add_option("--batch-size", tr.batch_size, "Batch size");
  t->add_option("--seed", tr.seed, "Seed for initialization, dropout and shuffling");
  t->add_option("--resume", tr.resume, "Continue from a checkpoint");
  t->add_option("--precision", tr.precision, "float or double")->check(CLI::IsMember({"float", "double"}));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  e->add_option("--data", ev.data, "Dataset directory or .hfds file")->required();
  e->add_option("--out", ev.out, "Report directory (created if absent)")->required();

  std::string inspect_path;
  auto* in = app.add_subcommand("inspect", "Describe a dataset or checkpoint file");
  in->add_option("file", inspect_path, "File to inspect")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (t->parsed()) return cmd_train(tr);
    if (e->parsed()) return cmd_eval(ev);
    if (in->parsed()) return cmd_inspect(inspect_path);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}
