// Copyright 2026 The gecprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gecprobe: generate, split, train, correct, score, few-shot and report.

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gecprobe/corpus_io.hpp"
#include "gecprobe/edits/align.hpp"
#include "gecprobe/edits/m2.hpp"
#include "gecprobe/error.hpp"
#include "gecprobe/gen/generator.hpp"
#include "gecprobe/gen/grammar.hpp"
#include "gecprobe/pipeline/experiment.hpp"
#include "gecprobe/scoring/score.hpp"
#include "gecprobe/seq2seq/checkpoint.hpp"
#include "gecprobe/seq2seq/config.hpp"
#include "gecprobe/splits/bundle_io.hpp"
#include "gecprobe/splits/splits.hpp"

#ifndef GECPROBE_DEFAULT_GRAMMAR
#define GECPROBE_DEFAULT_GRAMMAR "grammars/english.cfg"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace gecprobe::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitDivergence = 4;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInfeasibleSplit:
    case ErrorKind::kInsufficientDonors:
    case ErrorKind::kCapacityExceeded:
      return kExitInfeasible;
    case ErrorKind::kDivergenceDetected:
    case ErrorKind::kGradientMismatch:
      return kExitDivergence;
    default:
      return kExitValidation;
  }
}

struct Options {
  std::string config_path;
  uint64_t seed = 1;
  std::string run;

  // gen
  std::string etype = "VERB:SVA";
  size_t count = 5000;
  std::string grammar = GECPROBE_DEFAULT_GRAMMAR;

  // split
  std::string corpus;
  std::string m2;
  std::string setting = "both";
  std::string name;
  size_t train_size = 5000;
  size_t dev_size = 200;
  size_t test_size = 500;
  std::vector<std::string> held_out;

  // train / correct / score / fewshot
  std::string bundle = "known";
  std::string checkpoint = "best";
  seq2seq::ModelConfig model;
  seq2seq::TrainConfig train;
  seq2seq::DecodeConfig decode;
  bool exact_span = false;
  size_t bucket_width = 5;
  std::string pattern;
  std::vector<size_t> ks{0, 1, 2};
  std::vector<uint64_t> seeds{1, 2, 3};
  std::string donor;
  size_t donor_count = 5000;

  // report
  std::vector<std::string> runs;
};

/// Applies a declarative JSON file on top of the parsed flags.
void ApplyConfig(Options& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) Fail(ErrorKind::kIo, "cannot read config " + o.config_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kInvalidArgument, o.config_path + ": " + e.what());
  }
  if (!j.is_object()) Fail(ErrorKind::kInvalidArgument, o.config_path + ": expected a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") o.seed = v.get<uint64_t>();
      else if (key == "run") o.run = v.get<std::string>();
      else if (key == "etype") o.etype = v.get<std::string>();
      else if (key == "count") o.count = v.get<size_t>();
      else if (key == "grammar") o.grammar = v.get<std::string>();
      else if (key == "corpus") o.corpus = v.get<std::string>();
      else if (key == "m2") o.m2 = v.get<std::string>();
      else if (key == "setting") o.setting = v.get<std::string>();
      else if (key == "name") o.name = v.get<std::string>();
      else if (key == "train_size") o.train_size = v.get<size_t>();
      else if (key == "dev_size") o.dev_size = v.get<size_t>();
      else if (key == "test_size") o.test_size = v.get<size_t>();
      else if (key == "held_out") o.held_out = v.get<std::vector<std::string>>();
      else if (key == "bundle") o.bundle = v.get<std::string>();
      else if (key == "checkpoint") o.checkpoint = v.get<std::string>();
      else if (key == "model") o.model = v.get<seq2seq::ModelConfig>();
      else if (key == "train") o.train = v.get<seq2seq::TrainConfig>();
      else if (key == "decode") o.decode = v.get<seq2seq::DecodeConfig>();
      else if (key == "exact_span") o.exact_span = v.get<bool>();
      else if (key == "bucket_width") o.bucket_width = v.get<size_t>();
      else if (key == "pattern") o.pattern = v.get<std::string>();
      else if (key == "k") o.ks = v.get<std::vector<size_t>>();
      else if (key == "seeds") o.seeds = v.get<std::vector<uint64_t>>();
      else if (key == "donor") o.donor = v.get<std::string>();
      else if (key == "donor_count") o.donor_count = v.get<size_t>();
      else if (key == "runs") o.runs = v.get<std::vector<std::string>>();
      else Fail(ErrorKind::kInvalidArgument, o.config_path + ": unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kInvalidArgument, o.config_path + ": " + e.what());
  }
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string Sha256(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    Fail(ErrorKind::kIo, "sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return hex.str();
}

std::string FileHash(const fs::path& p) { return Sha256(Slurp(p)); }

void WriteText(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) Fail(ErrorKind::kIo, "cannot write " + p.string());
}

void WriteJson(const fs::path& p, const json& j) { WriteText(p, j.dump(2) + "\n"); }

/// Records one stage in <run>/manifest.json with its settings and the
/// hashes of the files it read and wrote.
void RecordStage(const Options& o, const std::string& stage, json settings, const std::vector<fs::path>& inputs,
                 const std::vector<fs::path>& outputs) {
  const fs::path path = fs::path(o.run) / "manifest.json";
  json m;
  if (fs::exists(path)) m = json::parse(Slurp(path));
  m["run"] = fs::path(o.run).filename().string();
  json in = json::object(), out = json::object();
  for (const auto& p : inputs) in[p.string()] = FileHash(p);
  for (const auto& p : outputs) out[fs::relative(p, o.run).string()] = FileHash(p);
  settings["seed"] = o.seed;
  m["stages"][stage] = {{"settings", settings}, {"inputs", in}, {"outputs", out}};
  WriteJson(path, m);
}

void RequireRun(const Options& o) {
  if (o.run.empty()) Fail(ErrorKind::kInvalidArgument, "--run <dir> is required");
}

void RequireFile(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) Fail(ErrorKind::kIo, what + " not found: " + path);
}

fs::path BundleDir(const Options& o, const std::string& name) { return fs::path(o.run) / "splits" / name; }

void RequireBundle(const Options& o) {
  if (!fs::is_regular_file(BundleDir(o, o.bundle) / "manifest.json")) {
    Fail(ErrorKind::kIo, "bundle not found: " + BundleDir(o, o.bundle).string() + " (run `split` first)");
  }
}

fs::path CheckpointPath(const Options& o) {
  return fs::path(o.run) / "model" / o.bundle / (o.checkpoint + ".bin");
}

fs::path HypsPath(const Options& o) { return fs::path(o.run) / "hyps" / (o.bundle + ".txt"); }

void ValidateModelOptions(const Options& o) {
  o.model.Validate();
  o.train.Validate();
  o.decode.Validate();
  if (o.checkpoint != "best" && o.checkpoint != "final") {
    Fail(ErrorKind::kInvalidArgument, "--checkpoint must be best or final");
  }
}

json SplitJson(const Options& o) {
  return {{"setting", o.setting}, {"train_size", o.train_size}, {"dev_size", o.dev_size},
          {"test_size", o.test_size}, {"held_out", o.held_out}};
}

// gen ---------------------------------------------------------------------

void CmdGen(const Options& o) {
  RequireRun(o);
  const ErrorType type = ErrorTypeOrThrow(o.etype);
  RequireFile(o.grammar, "grammar");
  const gen::Grammar grammar = gen::LoadGrammar(o.grammar);
  const Corpus corpus = gen::GenerateCorpus(grammar, type, o.count, o.seed);
  const fs::path dir = fs::path(o.run) / "corpus";
  fs::create_directories(dir);
  SaveJsonl(corpus, (dir / "corpus.jsonl").string());
  WriteJson(dir / "manifest.json", {{"error_type", o.etype},
                                    {"seed", o.seed},
                                    {"count", corpus.size()},
                                    {"grammar", o.grammar},
                                    {"grammar_sha256", FileHash(o.grammar)}});
  RecordStage(o, "gen", {{"error_type", o.etype}, {"count", o.count}}, {o.grammar},
              {dir / "corpus.jsonl", dir / "manifest.json"});
  std::cerr << "wrote " << corpus.size() << " pairs to " << (dir / "corpus.jsonl").string() << "\n";
}

// split -------------------------------------------------------------------

void CmdSplit(const Options& o) {
  RequireRun(o);
  const ErrorType type = ErrorTypeOrThrow(o.etype);
  std::vector<splits::Setting> settings;
  if (o.setting == "both") {
    if (!o.name.empty()) Fail(ErrorKind::kInvalidArgument, "--name needs a single --setting");
    settings = {splits::Setting::kKnown, splits::Setting::kUnknown};
  } else {
    settings = {splits::ParseSetting(o.setting)};
  }
  std::vector<ErrorCorrectionPattern> held;
  for (const auto& h : o.held_out) held.push_back(edits::ParsePattern(h));

  const fs::path corpus_dir = fs::path(o.run) / "corpus";
  fs::path corpus_path = o.corpus.empty() ? corpus_dir / "corpus.jsonl" : fs::path(o.corpus);
  std::vector<fs::path> inputs;
  Corpus corpus;
  if (!o.m2.empty()) {
    RequireFile(o.m2, "M2 file");
    corpus = edits::ExplodePerPattern(edits::LoadM2(o.m2).pairs, type);
    corpus_path = corpus_dir / "corpus.jsonl";
    fs::create_directories(corpus_dir);
    SaveJsonl(corpus, corpus_path.string());
    WriteJson(corpus_dir / "manifest.json", {{"error_type", o.etype},
                                             {"count", corpus.size()},
                                             {"m2", o.m2},
                                             {"m2_sha256", FileHash(o.m2)}});
    inputs.push_back(o.m2);
  } else {
    RequireFile(corpus_path.string(), "corpus (run `gen` or pass --corpus/--m2)");
    corpus = LoadJsonl(corpus_path.string());
    inputs.push_back(corpus_path);
  }

  // Build every bundle before writing any of them.
  std::vector<std::pair<std::string, splits::DatasetBundle>> bundles;
  for (splits::Setting s : settings) {
    splits::SplitSpec spec{s, type, o.train_size, o.dev_size, o.test_size, o.seed, held};
    const std::string name = o.name.empty() ? std::string(splits::ToString(s)) : o.name;
    bundles.emplace_back(name, splits::BuildSplit(corpus, spec));
  }
  std::vector<fs::path> outputs;
  for (const auto& [name, b] : bundles) {
    const fs::path dir = BundleDir(o, name);
    splits::SaveBundle(b, o.seed, dir);
    for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "manifest.json"}) outputs.push_back(dir / f);
    std::cerr << name << ": " << b.train.size() << "/" << b.dev.size() << "/" << b.test.size() << " pairs, "
              << b.held_out.size() << " held-out patterns\n";
  }
  const std::string stage = "split:" + (o.name.empty() ? o.setting : o.name);
  RecordStage(o, stage, SplitJson(o), inputs, outputs);
}

// train -------------------------------------------------------------------

void CmdTrain(const Options& o) {
  RequireRun(o);
  ValidateModelOptions(o);
  RequireBundle(o);
  const splits::DatasetBundle b = splits::LoadBundle(BundleDir(o, o.bundle));
  seq2seq::TrainConfig tc = o.train;
  tc.seed = o.seed;
  const fs::path dir = fs::path(o.run) / "model" / o.bundle;
  fs::create_directories(dir);
  std::ofstream log(dir / "train_log.jsonl", std::ios::binary);
  const seq2seq::TrainResult r = seq2seq::Train(o.model, tc, b, [&](const seq2seq::EpochRecord& e) {
    log << seq2seq::ToJson(e).dump() << "\n" << std::flush;
    std::cerr << "epoch " << e.epoch << " train_loss " << e.train_loss << " dev_loss " << e.dev_loss
              << " dev_acc " << e.dev_accuracy << " (" << e.wall_time << "s)\n";
  });
  seq2seq::SaveCheckpoint(r.final_model, dir / "final.bin");
  seq2seq::SaveCheckpoint(r.best_model, dir / "best.bin");
  WriteJson(dir / "summary.json", {{"best_epoch", r.best_epoch},
                                   {"best_dev_loss", r.log[static_cast<size_t>(r.best_epoch - 1)].dev_loss},
                                   {"final_step", r.final_model.step}});
  const fs::path bdir = BundleDir(o, o.bundle);
  RecordStage(o, "train:" + o.bundle,
              {{"model", nlohmann::json(o.model)}, {"train", nlohmann::json(tc)}},
              {bdir / "train.jsonl", bdir / "dev.jsonl"},
              {dir / "final.bin", dir / "final.json", dir / "best.bin", dir / "best.json", dir / "summary.json",
               dir / "train_log.jsonl"});
}

// correct -----------------------------------------------------------------

void CmdCorrect(const Options& o) {
  RequireRun(o);
  ValidateModelOptions(o);
  RequireBundle(o);
  RequireFile(CheckpointPath(o).string(), "checkpoint (run `train` first)");
  const splits::DatasetBundle b = splits::LoadBundle(BundleDir(o, o.bundle));
  const seq2seq::Checkpoint ckpt = seq2seq::LoadCheckpoint(CheckpointPath(o));
  const std::vector<Tokens> hyps = pipeline::CorrectAll(ckpt, b.test, o.decode);
  std::string text;
  for (const auto& h : hyps) text += JoinTokens(h) + "\n";
  WriteText(HypsPath(o), text);
  RecordStage(o, "correct:" + o.bundle, {{"checkpoint", o.checkpoint}, {"decode", nlohmann::json(o.decode)}},
              {CheckpointPath(o), BundleDir(o, o.bundle) / "test.jsonl"}, {HypsPath(o)});
  std::cerr << "wrote " << hyps.size() << " hypotheses to " << HypsPath(o).string() << "\n";
}

// score -------------------------------------------------------------------

std::vector<Tokens> ReadHyps(const fs::path& p) {
  std::ifstream in(p);
  if (!in) Fail(ErrorKind::kIo, "cannot read hypotheses " + p.string() + " (run `correct` first)");
  std::vector<Tokens> out;
  for (std::string line; std::getline(in, line);) out.push_back(SplitTokens(line));
  return out;
}

fs::path ReportPath(const fs::path& run, const std::string& bundle) {
  return run / "reports" / (bundle + ".json");
}

/// Known/Unknown gap table over runs that have both a known and an unknown
/// report; one column per run.
std::optional<std::pair<std::string, json>> GapTable(const std::vector<std::string>& runs) {
  std::vector<scoring::GapRecord> records;
  for (const auto& run : runs) {
    const fs::path k = ReportPath(run, "known"), u = ReportPath(run, "unknown");
    if (!fs::exists(k) || !fs::exists(u)) continue;
    const auto kj = nlohmann::json::parse(Slurp(k)), uj = nlohmann::json::parse(Slurp(u));
    if (kj.at("error_type") != uj.at("error_type")) {
      Fail(ErrorKind::kInvalidArgument, run + ": known and unknown reports disagree on error type");
    }
    records.push_back(scoring::GapFromPercent(kj.at("error_type").get<std::string>(),
                                              kj.at("scores").at("correction").at("f05").get<double>() * 100.0,
                                              uj.at("scores").at("correction").at("f05").get<double>() * 100.0));
  }
  if (records.empty()) return std::nullopt;
  json arr = json::array();
  for (const auto& r : records) arr.push_back(scoring::ToJson(r));
  return std::make_pair(scoring::FormatGapTable(records, "Synthetic"), arr);
}

void CmdScore(const Options& o) {
  RequireRun(o);
  RequireBundle(o);
  const splits::DatasetBundle b = splits::LoadBundle(BundleDir(o, o.bundle));
  const std::vector<Tokens> hyps = ReadHyps(HypsPath(o));
  if (o.bucket_width < 1) Fail(ErrorKind::kInvalidArgument, "--bucket-width must be positive");
  pipeline::Evaluation e = pipeline::Evaluate(hyps, b.test, o.bucket_width);
  if (o.exact_span) e.detection = scoring::Score(hyps, b.test, scoring::ScoreOptions{scoring::Mode::kDetection, true});
  const fs::path out = ReportPath(o.run, o.bundle);
  WriteJson(out, {{"bundle", o.bundle},
                  {"setting", std::string(splits::ToString(b.setting))},
                  {"error_type", std::string(ToString(b.error_type))},
                  {"exact_span_detection", o.exact_span},
                  {"scores", pipeline::ToJson(e)}});
  const fs::path tsv = fs::path(o.run) / "reports" / (o.bundle + "_length.tsv");
  WriteText(tsv, scoring::LengthTsv(e.correction_by_length));
  std::vector<fs::path> outputs{out, tsv};
  if (auto gap = GapTable({o.run})) {
    WriteText(fs::path(o.run) / "reports" / "gap.txt", gap->first);
    WriteJson(fs::path(o.run) / "reports" / "gap.json", gap->second);
    outputs.push_back(fs::path(o.run) / "reports" / "gap.txt");
    outputs.push_back(fs::path(o.run) / "reports" / "gap.json");
  }
  RecordStage(o, "score:" + o.bundle, {{"exact_span", o.exact_span}, {"bucket_width", o.bucket_width}},
              {HypsPath(o), BundleDir(o, o.bundle) / "test.jsonl"}, outputs);
  std::cout << o.bundle << " correction P/R/F0.5 " << scoring::Pct(e.correction.precision) << " / "
            << scoring::Pct(e.correction.recall) << " / " << scoring::Pct(e.correction.f05) << "\n"
            << o.bundle << " detection  P/R/F0.5 " << scoring::Pct(e.detection.precision) << " / "
            << scoring::Pct(e.detection.recall) << " / " << scoring::Pct(e.detection.f05) << "\n";
}

// fewshot -----------------------------------------------------------------

void CmdFewShot(const Options& o) {
  RequireRun(o);
  ValidateModelOptions(o);
  RequireBundle(o);
  if (o.pattern.empty()) Fail(ErrorKind::kInvalidArgument, "--pattern is required");
  const ErrorCorrectionPattern pattern = edits::ParsePattern(o.pattern);
  const splits::DatasetBundle b = splits::LoadBundle(BundleDir(o, o.bundle));
  std::vector<fs::path> inputs{BundleDir(o, o.bundle) / "manifest.json"};
  Corpus donor;
  if (!o.donor.empty()) {
    RequireFile(o.donor, "donor corpus");
    donor = LoadJsonl(o.donor);
    inputs.push_back(o.donor);
  } else {
    RequireFile(o.grammar, "grammar");
    donor = gen::GenerateCorpus(gen::LoadGrammar(o.grammar), b.error_type, o.donor_count, Rng::Derive(o.seed, 99));
    inputs.push_back(o.grammar);
  }
  // Fail on missing donors before any training starts.
  for (size_t k : o.ks) (void)splits::InjectPatterns(b, pattern, k, donor);
  const auto rows = pipeline::RunFewShot(b, pattern, o.ks, o.seeds, donor, o.model, o.train, o.decode);
  const fs::path dir = fs::path(o.run) / "reports";
  const fs::path jpath = dir / ("fewshot_" + o.bundle + ".json"), tpath = dir / ("fewshot_" + o.bundle + ".tsv");
  WriteJson(jpath, pipeline::ToJson(rows, pattern));
  WriteText(tpath, pipeline::FewShotTsv(rows));
  RecordStage(o, "fewshot:" + o.bundle,
              {{"pattern", o.pattern},
               {"k", o.ks},
               {"seeds", o.seeds},
               {"model", nlohmann::json(o.model)},
               {"train", nlohmann::json(o.train)}},
              inputs, {jpath, tpath});
  std::cout << pipeline::FewShotTsv(rows);
}

// report ------------------------------------------------------------------

void CmdReport(const Options& o) {
  std::vector<std::string> runs = o.runs;
  if (!o.run.empty()) runs.insert(runs.begin(), o.run);
  if (runs.empty()) Fail(ErrorKind::kInvalidArgument, "--run <dir> is required");
  std::ostringstream text;
  if (auto gap = GapTable(runs)) text << "Correction F0.5, Known vs Unknown\n" << gap->first << "\n";
  text << "Detection vs correction F0.5\n";
  for (const auto& run : runs) {
    for (const char* bundle : {"known", "unknown"}) {
      const fs::path p = ReportPath(run, bundle);
      if (!fs::exists(p)) continue;
      const auto j = nlohmann::json::parse(Slurp(p));
      text << "  " << j.at("error_type").get<std::string>() << " " << bundle << ": detection "
           << j.at("scores").at("detection").at("f05_pct").get<std::string>() << ", correction "
           << j.at("scores").at("correction").at("f05_pct").get<std::string>() << "\n";
    }
    if (!fs::is_directory(fs::path(run) / "reports")) Fail(ErrorKind::kIo, "no reports in " + run);
    for (const auto& entry : fs::directory_iterator(fs::path(run) / "reports")) {
      const std::string f = entry.path().filename().string();
      if (f.rfind("fewshot_", 0) == 0 && entry.path().extension() == ".tsv") {
        text << "Few-shot (" << run << ", " << f << ")\n" << Slurp(entry.path());
      }
    }
  }
  std::cout << text.str();
  if (!o.run.empty()) {
    const fs::path out = fs::path(o.run) / "reports" / "summary.txt";
    WriteText(out, text.str());
  }
}

void AddModelFlags(CLI::App* app, Options& o) {
  app->add_option("--encoder-layers", o.model.encoder_layers, "Encoder layers");
  app->add_option("--decoder-layers", o.model.decoder_layers, "Decoder layers");
  app->add_option("--model-dim", o.model.model_dim, "Model width");
  app->add_option("--ff-dim", o.model.ff_dim, "Feed-forward width");
  app->add_option("--heads", o.model.heads, "Attention heads");
  app->add_option("--dropout", o.model.dropout, "Dropout probability");
  app->add_option("--label-smoothing", o.model.label_smoothing, "Label smoothing epsilon");
  app->add_option("--max-len", o.model.max_sequence_length, "Maximum sequence length");
  app->add_option("--epochs", o.train.epochs, "Training epochs");
  app->add_option("--batch-size", o.train.batch_size, "Pairs per batch");
  app->add_option("--warmup", o.train.warmup_steps, "Warmup steps");
  app->add_option("--lr-scale", o.train.lr_scale, "Learning-rate multiplier");
  app->add_option("--clip", o.train.gradient_clip_norm, "Gradient clipping norm");
}

void AddDecodeFlags(CLI::App* app, Options& o) {
  app->add_option("--beam", o.decode.beam_size, "Beam size");
  app->add_option("--length-exponent", o.decode.length_exponent, "Length normalization exponent");
  app->add_flag("!--no-length-norm", o.decode.length_normalization, "Rank by raw log-probability");
  app->add_option("--checkpoint", o.checkpoint, "best or final")->check(CLI::IsMember({"best", "final"}));
}

int Main(int argc, char** argv) {
  Options o;
  CLI::App app{"gecprobe: probe whether GEC models generalize to unseen error-correction patterns"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config_path, "JSON file whose keys override flags");
  app.add_option("--seed", o.seed, "Seed for every stage");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic parallel corpus");
  gen->add_option("--run", o.run, "Run directory")->required();
  gen->add_option("--etype", o.etype, "VERB:SVA, VERB:FORM, WO, MORPH or NOUN:NUM");
  gen->add_option("--count", o.count, "Number of pairs");
  gen->add_option("--grammar", o.grammar, "Grammar file");

  auto* split = app.add_subcommand("split", "Build Known/Unknown bundles");
  split->add_option("--run", o.run, "Run directory")->required();
  split->add_option("--etype", o.etype, "Error type");
  split->add_option("--corpus", o.corpus, "JSONL corpus (default <run>/corpus/corpus.jsonl)");
  split->add_option("--m2", o.m2, "M2 file to split instead of a JSONL corpus");
  split->add_option("--setting", o.setting, "known, unknown or both")
      ->check(CLI::IsMember({"known", "unknown", "both"}));
  split->add_option("--name", o.name, "Bundle name (default: the setting)");
  split->add_option("--train", o.train_size, "Train pairs");
  split->add_option("--dev", o.dev_size, "Dev pairs");
  split->add_option("--test", o.test_size, "Test pairs");
  split->add_option("--held-out", o.held_out, "Pattern to hold out, e.g. \"run => runs\"");

  auto* train = app.add_subcommand("train", "Train a model on a bundle");
  train->add_option("--run", o.run, "Run directory")->required();
  train->add_option("--bundle", o.bundle, "Bundle name");
  AddModelFlags(train, o);

  auto* correct = app.add_subcommand("correct", "Decode a bundle's test sources");
  correct->add_option("--run", o.run, "Run directory")->required();
  correct->add_option("--bundle", o.bundle, "Bundle name");
  AddDecodeFlags(correct, o);

  auto* score = app.add_subcommand("score", "Score hypotheses against a bundle's test set");
  score->add_option("--run", o.run, "Run directory")->required();
  score->add_option("--bundle", o.bundle, "Bundle name");
  score->add_flag("--exact-span", o.exact_span, "Detection requires identical spans");
  score->add_option("--bucket-width", o.bucket_width, "Length bucket width in source tokens");

  auto* fewshot = app.add_subcommand("fewshot", "Retrain with k injected examples of a held-out pattern");
  fewshot->add_option("--run", o.run, "Run directory")->required();
  fewshot->add_option("--bundle", o.bundle, "Unknown bundle name");
  fewshot->add_option("--pattern", o.pattern, "Pattern, e.g. \"touches => touch\"");
  fewshot->add_option("--k", o.ks, "Injection counts")->delimiter(',');
  fewshot->add_option("--seeds", o.seeds, "Training seeds")->delimiter(',');
  fewshot->add_option("--donor", o.donor, "Donor JSONL corpus (default: freshly generated)");
  fewshot->add_option("--donor-count", o.donor_count, "Pairs to generate as donors");
  fewshot->add_option("--grammar", o.grammar, "Grammar for generated donors");
  AddModelFlags(fewshot, o);
  AddDecodeFlags(fewshot, o);

  auto* report = app.add_subcommand("report", "Summarize reports of one or more runs");
  report->add_option("--run", o.run, "Run directory");
  report->add_option("--runs", o.runs, "Further run directories for the gap table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    ApplyConfig(o);
    if (stage == "gen") CmdGen(o);
    else if (stage == "split") CmdSplit(o);
    else if (stage == "train") CmdTrain(o);
    else if (stage == "correct") CmdCorrect(o);
    else if (stage == "score") CmdScore(o);
    else if (stage == "fewshot") CmdFewShot(o);
    else if (stage == "report") CmdReport(o);
  } catch (const Error& e) {
    std::cerr << "gecprobe " << stage << ": " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "gecprobe " << stage << ": " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace
}  // namespace gecprobe::cli

int main(int argc, char** argv) { return gecprobe::cli::Main(argc, argv); }
