// Command-line entry point: train / eval / stats / extract-hl / synth.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kge/data.hpp"
#include "kge/eval.hpp"
#include "kge/loss.hpp"
#include "kge/scoring.hpp"
#include "kge/smoothing.hpp"
#include "kge/synth.hpp"
#include "kge/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<std::string, kge::ModelKind> kModelNames = {
    {"transe-l1", kge::ModelKind::TransE_L1},
    {"transe-l2", kge::ModelKind::TransE_L2},
    {"distmult", kge::ModelKind::DistMult},
    {"complex", kge::ModelKind::ComplEx},
    {"rotate", kge::ModelKind::RotatE},
};

const std::map<std::string, kge::LossFamily> kLossNames = {
    {"ns", kge::LossFamily::NS},
    {"sans", kge::LossFamily::SANS},
    {"tans", kge::LossFamily::TANS},
    {"unified", kge::LossFamily::Unified},
};

const std::map<std::string, kge::SubsamplingAssumption> kAssumptionNames = {
    {"none", kge::SubsamplingAssumption::None},
    {"base", kge::SubsamplingAssumption::Base},
    {"freq", kge::SubsamplingAssumption::Freq},
    {"uniq", kge::SubsamplingAssumption::Uniq},
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kge::IoError("cannot open " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

kge::Dataset load_data_dir(const std::string& data_dir) {
  fs::path d(data_dir);
  return kge::load_triples((d / "train.txt").string(), (d / "valid.txt").string(),
                           (d / "test.txt").string());
}

struct TrainArgs {
  std::string model = "distmult";
  std::string loss = "ns";
  std::string assumption = "none";
  double alpha = 0, beta = 0, gamma = 0, eta = 1, tau = 0;
  int nu = 16, dim = 32, epochs = 100, batch = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  int eval_every = 0;
  bool neg_filter = false;
  std::string data_dir, out_dir;
};

// The Table 2 lattice: each family owns a subset of the temperatures.
void validate_loss_flags(const TrainArgs& a, kge::LossFamily family) {
  auto fail = [](const std::string& msg) {
    throw UsageError(msg +
                     " (loss lattice: ns uses none of alpha/beta/gamma; sans uses "
                     "beta; tans uses beta and gamma; unified uses alpha, beta, "
                     "gamma, eta and an assumption)");
  };
  const bool has_sub = a.assumption != "none" || a.alpha != 0;
  switch (family) {
    case kge::LossFamily::NS:
      if (a.beta != 0) fail("--loss ns does not accept --beta");
      if (a.gamma != 0) fail("--loss ns does not accept --gamma");
      if (has_sub) fail("--loss ns does not accept subsampling; use --loss unified");
      break;
    case kge::LossFamily::SANS:
      if (a.gamma != 0) fail("--loss sans does not accept --gamma");
      if (has_sub) fail("--loss sans does not accept subsampling; use --loss unified");
      break;
    case kge::LossFamily::TANS:
      if (has_sub) fail("--loss tans does not accept subsampling; use --loss unified");
      break;
    case kge::LossFamily::Unified:
      break;
  }
  if (a.eta != 1 && family != kge::LossFamily::Unified) {
    fail("--eta only applies to --loss unified");
  }
}

void write_metrics_csv(const std::string& path, const TrainArgs& a,
                       const std::string& split, const kge::Metrics& m,
                       bool append = false) {
  bool header = !append || !fs::exists(path);
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw kge::IoError("cannot write " + path);
  out.precision(17);
  if (header) {
    out << "model,loss,assumption,alpha,beta,gamma,eta,seed,split,mrr,h1,h3,h10\n";
  }
  out << a.model << "," << a.loss << "," << a.assumption << "," << a.alpha << ","
      << a.beta << "," << a.gamma << "," << a.eta << "," << a.seed << "," << split
      << "," << m.mrr << "," << m.hits1 << "," << m.hits3 << "," << m.hits10
      << "\n";
}

int run_train(const TrainArgs& a) {
  kge::ModelKind model = kModelNames.at(a.model);
  kge::LossFamily family = kLossNames.at(a.loss);
  validate_loss_flags(a, family);
  if (!fs::is_directory(a.data_dir)) {
    throw UsageError("data dir not found: " + a.data_dir);
  }

  kge::TrainConfig cfg;
  cfg.loss.family = family;
  cfg.loss.alpha = a.alpha;
  cfg.loss.beta = a.beta;
  cfg.loss.gamma = a.gamma;
  cfg.loss.eta = a.eta;
  cfg.loss.tau = a.tau;
  cfg.loss.nu = a.nu;
  cfg.loss.assumption = kAssumptionNames.at(a.assumption);
  cfg.model = model;
  cfg.dim = a.dim;
  cfg.batch_size = a.batch;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.optimizer = a.optimizer == "sgd" ? kge::Optimizer::SGD : kge::Optimizer::Adam;
  cfg.seed = a.seed;
  cfg.eval_every = a.eval_every;
  cfg.negative_filtering = a.neg_filter;

  kge::Dataset ds = load_data_dir(a.data_dir);

  fs::create_directories(a.out_dir);
  fs::path out(a.out_dir);

  json manifest;
  manifest["command"] = "train";
  manifest["config"] = {
      {"model", a.model},       {"loss", a.loss},   {"assumption", a.assumption},
      {"alpha", a.alpha},       {"beta", a.beta},   {"gamma", a.gamma},
      {"eta", a.eta},           {"tau", a.tau},     {"nu", a.nu},
      {"dim", a.dim},           {"epochs", a.epochs},
      {"batch", a.batch},       {"lr", a.lr},       {"seed", a.seed},
      {"optimizer", a.optimizer}, {"eval_every", a.eval_every},
      {"negative_filtering", a.neg_filter}};
  manifest["data_dir"] = a.data_dir;
  for (const char* f : {"train.txt", "valid.txt", "test.txt"}) {
    manifest["input_hash"][f] = hex64(fnv64_file(fs::path(a.data_dir) / f));
  }
  manifest["outputs"] = {{"checkpoint", "checkpoint.bin"},
                         {"curves", "curves.csv"},
                         {"metrics", "metrics.csv"}};
  std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";

  kge::TrainReport report = kge::train(ds, cfg);
  kge::save_checkpoint(report.params, (out / "checkpoint.bin").string());
  kge::export_curves(report, (out / "curves.csv").string());

  kge::Metrics final_valid =
      ds.valid.empty() ? kge::Metrics{}
                       : kge::evaluate(report.params, ds, "valid", true);
  write_metrics_csv((out / "metrics.csv").string(), a, "valid", final_valid);
  std::cout << "valid mrr=" << final_valid.mrr << " h1=" << final_valid.hits1
            << " h3=" << final_valid.hits3 << " h10=" << final_valid.hits10
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph embedding trainer with smoothed negative sampling"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a model and export artifacts");
  train->add_option("--model", ta.model)->check(CLI::IsMember(kModelNames));
  train->add_option("--loss", ta.loss)->check(CLI::IsMember(kLossNames));
  train->add_option("--assumption", ta.assumption)
      ->check(CLI::IsMember(kAssumptionNames));
  train->add_option("--alpha", ta.alpha);
  train->add_option("--beta", ta.beta);
  train->add_option("--gamma", ta.gamma);
  train->add_option("--eta", ta.eta);
  train->add_option("--tau", ta.tau);
  train->add_option("--nu", ta.nu)->check(CLI::PositiveNumber);
  train->add_option("--dim", ta.dim)->check(CLI::PositiveNumber);
  train->add_option("--epochs", ta.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--batch", ta.batch)->check(CLI::PositiveNumber);
  train->add_option("--lr", ta.lr);
  train->add_option("--seed", ta.seed);
  train->add_option("--optimizer", ta.optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}));
  train->add_option("--eval-every", ta.eval_every);
  train->add_flag("--neg-filter", ta.neg_filter);
  train->add_option("--data-dir", ta.data_dir)->required();
  train->add_option("--out-dir", ta.out_dir)->required();

  struct {
    std::string checkpoint, data_dir, out_dir, split = "test", model;
    bool raw = false;
    int threads = 1;
  } ea;
  auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint");
  evalc->add_option("--checkpoint", ea.checkpoint)->required();
  evalc->add_option("--data-dir", ea.data_dir)->required();
  evalc->add_option("--out-dir", ea.out_dir)->required();
  evalc->add_option("--split", ea.split)->check(CLI::IsMember({"train", "valid", "test"}));
  evalc->add_option("--model", ea.model)->check(CLI::IsMember(kModelNames));
  evalc->add_flag("--raw", ea.raw);
  evalc->add_option("--threads", ea.threads)->check(CLI::PositiveNumber);

  struct {
    std::string data_dir, out_dir;
  } sa;
  auto* stats = app.add_subcommand("stats", "export frequency-rank CSV");
  stats->add_option("--data-dir", sa.data_dir)->required();
  stats->add_option("--out-dir", sa.out_dir)->required();

  struct {
    std::string data_dir, out_dir, mode = "both";
    double fraction = 0.005;
  } xa;
  auto* extract = app.add_subcommand("extract-hl", "extract high/low-frequency subset");
  extract->add_option("--data-dir", xa.data_dir)->required();
  extract->add_option("--out-dir", xa.out_dir)->required();
  extract->add_option("--fraction", xa.fraction);
  extract->add_option("--mode", xa.mode)->check(CLI::IsMember({"high", "low", "both"}));

  struct {
    std::size_t entities = 100, relations = 10, triples = 1000;
    double zipf = 1.0;
    std::uint64_t seed = 0;
    std::string out_dir;
  } ga;
  auto* synth = app.add_subcommand("synth", "generate a synthetic KG");
  synth->add_option("--entities", ga.entities)->check(CLI::PositiveNumber);
  synth->add_option("--relations", ga.relations)->check(CLI::PositiveNumber);
  synth->add_option("--triples", ga.triples)->check(CLI::PositiveNumber);
  synth->add_option("--zipf", ga.zipf);
  synth->add_option("--seed", ga.seed);
  synth->add_option("--out-dir", ga.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return run_train(ta);

    if (evalc->parsed()) {
      if (!fs::is_directory(ea.data_dir)) {
        throw UsageError("data dir not found: " + ea.data_dir);
      }
      kge::ModelParams params = [&] {
        try {
          return ea.model.empty()
                     ? kge::load_checkpoint(ea.checkpoint)
                     : kge::load_checkpoint_as(ea.checkpoint,
                                               kModelNames.at(ea.model));
        } catch (const kge::CheckpointError& e) {
          throw UsageError(e.what());
        }
      }();
      kge::Dataset ds = load_data_dir(ea.data_dir);
      if (params.num_entities != ds.vocab.num_entities() ||
          params.num_relations != ds.vocab.num_relations()) {
        throw UsageError("checkpoint vocabulary size does not match the dataset");
      }
      kge::Metrics m = kge::evaluate(params, ds, ea.split, !ea.raw, ea.threads);
      fs::create_directories(ea.out_dir);
      TrainArgs row;  // reuse the CSV layout; loss columns unknown at eval time
      row.model = kge::model_kind_name(params.kind);
      row.loss = ea.raw ? "raw" : "filtered";
      row.seed = params.seed;
      write_metrics_csv((fs::path(ea.out_dir) / "metrics.csv").string(), row,
                        ea.split, m);
      std::cout << ea.split << " mrr=" << m.mrr << " h1=" << m.hits1
                << " h3=" << m.hits3 << " h10=" << m.hits10 << "\n";
      return 0;
    }

    if (stats->parsed()) {
      if (!fs::is_directory(sa.data_dir)) {
        throw UsageError("data dir not found: " + sa.data_dir);
      }
      kge::Dataset ds = load_data_dir(sa.data_dir);
      fs::create_directories(sa.out_dir);
      kge::export_frequency_ranks(
          ds, (fs::path(sa.out_dir) / "frequency_ranks.csv").string());
      return 0;
    }

    if (extract->parsed()) {
      if (!fs::is_directory(xa.data_dir)) {
        throw UsageError("data dir not found: " + xa.data_dir);
      }
      if (!(xa.fraction > 0.0) || xa.fraction > 0.5) {
        throw UsageError("--fraction must be in (0, 0.5]");
      }
      kge::SubsetMode mode = xa.mode == "high"  ? kge::SubsetMode::High
                             : xa.mode == "low" ? kge::SubsetMode::Low
                                                : kge::SubsetMode::Both;
      kge::Dataset ds = load_data_dir(xa.data_dir);
      kge::Dataset hl = kge::extract_sparse_subset(ds, xa.fraction, mode);
      fs::create_directories(xa.out_dir);
      fs::path out(xa.out_dir);
      kge::write_split_tsv(hl, hl.train, (out / "train.txt").string());
      kge::write_split_tsv(hl, hl.valid, (out / "valid.txt").string());
      kge::write_split_tsv(hl, hl.test, (out / "test.txt").string());
      return 0;
    }

    if (synth->parsed()) {
      kge::SynthConfig cfg{ga.entities, ga.relations, ga.triples, ga.zipf, ga.seed};
      kge::Dataset ds = kge::generate(cfg);
      fs::create_directories(ga.out_dir);
      fs::path out(ga.out_dir);
      kge::write_split_tsv(ds, ds.train, (out / "train.txt").string());
      kge::write_split_tsv(ds, ds.valid, (out / "valid.txt").string());
      kge::write_split_tsv(ds, ds.test, (out / "test.txt").string());
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const kge::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
