//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scm/chem/smiles.hpp"
#include "scm/core/checkpoint.hpp"
#include "scm/core/error.hpp"
#include "scm/harness/corpus.hpp"
#include "scm/harness/metrics.hpp"
#include "scm/lm/tokenizer.hpp"
#include "scm/train/assistant.hpp"
#include "scm/train/stage.hpp"

namespace scm::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::unique_ptr<train::Models> load_models(const std::string& checkpoint, std::uint64_t seed) {
  Rng rng(seed);
  auto models = std::make_unique<train::Models>(train::ModelConfig{}, rng);
  if (!checkpoint.empty()) checkpoint::restore(checkpoint::load(checkpoint), models->params());
  return models;
}

json tensor_json(const Tensor& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
    rows.push_back(row);
  }
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(Errc::IoError, "write failed: " + path.string());
}

std::vector<double> read_numbers(const fs::path& path) {
  std::vector<double> out;
  std::istringstream in(harness::read_file(path));
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double v = 0.0;
    std::string rest;
    if (!(ls >> v) || (ls >> rest)) {
      throw LineError(Errc::CorpusParseError, number, path.string() + ": expected one number");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<int> as_labels(const std::vector<double>& v) {
  std::vector<int> out;
  for (double x : v) {
    if (x != static_cast<int>(x)) throw Error(Errc::InvalidRange, "labels must be integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

struct Options {
  std::uint64_t seed = 0;
  std::string checkpoint;
  // parse / embed
  std::string smiles;
  std::string embed_kind = "mol";
  // train
  std::string stage_config;
  bool seed_set = false;
  // generate
  std::string prompt;
  std::size_t steps = 0;
  double cfg_scale = 1.0;
  std::string source;
  std::size_t bridge_t = 0;
  std::size_t attempts = 4;
  std::string reactions;
  // react
  std::string reaction_file;
  std::string task = "product";
  std::string library;
  // eval
  std::string pred_file, gold_file, metric, metric_name;
  // scorecard
  std::string reports_dir, out_path = "radar.json", svg_path;
};

void cmd_parse(const Options& o, std::ostream& out) {
  const chem::MolecularGraph g = chem::parse_smiles(o.smiles);
  json atoms = json::array();
  for (const chem::Atom& a : g.atoms) {
    atoms.push_back({{"element", std::string(chem::element_symbol(a.element))},
                     {"aromatic", a.aromatic},
                     {"charge", a.charge},
                     {"hydrogens", a.total_h()}});
  }
  json bonds = json::array();
  for (const chem::Bond& b : g.bonds) {
    bonds.push_back({b.begin, b.end, static_cast<int>(b.order)});
  }
  const json j = {{"smiles", o.smiles},
                  {"atoms", atoms},
                  {"bonds", bonds},
                  {"written", chem::write_smiles(g)}};
  out << j.dump() << "\n";
}

void cmd_embed(const Options& o, std::ostream& out) {
  const auto models = load_models(o.checkpoint, o.seed);
  const chem::MolecularGraph g = chem::parse_smiles(o.smiles);
  const Tensor t = o.embed_kind == "geo" ? models->gvp.embed_geo(g, o.seed)
                                         : models->gvp.embed_mol(g, o.seed);
  out << json{{"smiles", o.smiles}, {"kind", o.embed_kind}, {"embedding", tensor_json(t)[0]}}.dump()
      << "\n";
}

void cmd_train(const Options& o, std::ostream& out) {
  train::StageConfig config = train::load_stage_config(o.stage_config);
  if (o.seed_set) config.seed = o.seed;
  const train::StageCorpora corpora = train::load_stage_corpora(config);
  const auto models = load_models("", config.seed);
  const train::StageResult r = train::run_stage(config, *models, corpora);
  json j = {{"stage", std::string(train::stage_name(config.id))},
            {"steps", config.steps},
            {"trainable", r.trainable},
            {"frozen", r.frozen}};
  if (!r.metrics.empty()) {
    j["final"] = {{"task", r.metrics.back().task}, {"loss", r.metrics.back().loss}};
  }
  if (!config.checkpoint.empty()) j["checkpoint"] = config.checkpoint.string();
  if (!config.metrics.empty()) j["metrics"] = config.metrics.string();
  out << j.dump() << "\n";
}

void cmd_generate(const Options& o, std::ostream& out) {
  const auto models = load_models(o.checkpoint, 0);
  std::vector<rxn::ReactionRecord> corpus;
  if (!o.reactions.empty()) corpus = harness::load_reactions(o.reactions);
  const train::ReactionLibraries libs = train::build_libraries(models->gvp, corpus);
  train::GenerateSettings settings;
  settings.guidance.scale = o.cfg_scale;
  settings.guidance.steps = o.steps;
  if (!o.source.empty()) {
    if (!chem::check_validity(o.source)) {
      throw Error(Errc::InvalidSmiles, "source is not a valid SMILES: " + o.source);
    }
    settings.source = o.source;
  }
  settings.bridge_t = o.bridge_t;
  settings.attempts = o.attempts;
  Rng rng(o.seed);
  const lm::DispatchHandlers h = train::make_handlers(*models, libs, settings, rng);
  const lm::Generation gen = train::forced_dispatch(*models, h, o.prompt, lm::kGenerate, rng);
  const std::string smiles = gen.events.empty() ? std::string() : gen.events.front().output;
  out << json{{"prompt", o.prompt},
              {"continuation", gen.text},
              {"smiles", smiles},
              {"valid", chem::check_validity(smiles)}}
             .dump()
      << "\n";
}

void cmd_react(const Options& o, std::ostream& out) {
  const train::ReactTask task = train::react_task_from_name(o.task);
  const auto records = harness::load_reactions(o.reaction_file);
  const auto models = load_models(o.checkpoint, o.seed);
  const auto library = o.library.empty() ? records : harness::load_reactions(o.library);
  const train::ReactionLibraries libs = train::build_libraries(models->gvp, library);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const train::ReactAnswer a = train::react(*models, libs, records[i], task);
    json j = {{"record", i + 1}, {"task", o.task}, {"yield_percent", a.yield_percent}};
    if (task != train::ReactTask::Yield) j["molecules"] = a.molecules;
    out << j.dump() << "\n";
  }
}

void cmd_eval(const Options& o, std::ostream& out) {
  const std::vector<double> pred = read_numbers(o.pred_file);
  const std::vector<double> gold = read_numbers(o.gold_file);
  harness::MetricReport r;
  r.name = o.metric_name.empty() ? o.metric : o.metric_name;
  r.count = gold.size();
  if (o.metric == "mae" || o.metric == "rmse") {
    const auto m = harness::regression_metrics(pred, gold);
    r.orientation = harness::Orientation::LowerBetter;
    r.value = o.metric == "mae" ? m.mae : m.rmse;
  } else if (o.metric == "accuracy" || o.metric == "f1") {
    const auto m = harness::classification_metrics(as_labels(pred), as_labels(gold));
    if (o.metric == "f1" && !m.f1) throw Error(Errc::InvalidRange, "f1 needs 0/1 labels");
    r.value = o.metric == "accuracy" ? m.accuracy : *m.f1;
  } else {
    std::vector<std::size_t> ranking;
    for (int v : as_labels(pred)) {
      if (v < 0) throw Error(Errc::IndexOutOfRange, "negative item index");
      ranking.push_back(static_cast<std::size_t>(v));
    }
    r.value = harness::ndcg(ranking, gold);
  }
  r.validate();
  out << harness::report_json(r);
}

void cmd_scorecard(const Options& o, std::ostream& out, std::ostream& err) {
  auto [models, grouping] = harness::load_report_dir(o.reports_dir);
  const auto card = harness::scorecard(models, grouping);
  write_text(o.out_path, harness::radar_json(card));
  if (!o.svg_path.empty()) write_text(o.svg_path, harness::radar_svg(card));
  for (const auto& mc : card) {
    for (const std::string& w : mc.capability.warnings) err << "warning: " << mc.model << ": " << w << "\n";
  }
  out << json{{"models", card.size()}, {"out", o.out_path}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scicore: molecular language model toolkit", "scicore"};
  app.require_subcommand(1);
  Options o;

  auto* parse = app.add_subcommand("parse", "Parse a SMILES string and print its graph");
  parse->add_option("smiles", o.smiles, "SMILES")->required();

  auto* embed = app.add_subcommand("embed", "Print the structural embedding of a SMILES string");
  embed->add_option("smiles", o.smiles, "SMILES")->required();
  embed->add_option("--kind", o.embed_kind, "geo (encoder) or mol (adapted)")
      ->check(CLI::IsMember({"geo", "mol"}));
  embed->add_option("--checkpoint", o.checkpoint, "Model checkpoint");
  embed->add_option("--seed", o.seed, "Initialization and conformer seed");

  auto* trainc = app.add_subcommand("train", "Run one training stage");
  trainc->add_option("config", o.stage_config, "Stage config file")->required();
  auto* train_seed = trainc->add_option("--seed", o.seed, "Override the config seed");

  auto* gen = app.add_subcommand("generate", "Generate a molecule through a forced dispatch");
  gen->add_option("--prompt", o.prompt, "Prompt text (markers allowed)")->required();
  gen->add_option("--steps", o.steps, "Sampler steps (0 = full schedule)");
  gen->add_option("--cfg-scale", o.cfg_scale, "Guidance scale");
  gen->add_option("--seed", o.seed, "Sampling seed");
  gen->add_option("--source", o.source, "Source molecule for bridge editing");
  gen->add_option("--bridge-t", o.bridge_t, "Bridge start step (0 = T/2)");
  gen->add_option("--attempts", o.attempts, "Draws until a valid SMILES");
  gen->add_option("--checkpoint", o.checkpoint, "Model checkpoint");
  gen->add_option("--reactions", o.reactions, "Reaction corpus for the retrieval library");

  auto* react = app.add_subcommand("react", "Reaction reasoning over a reaction-jsonl file");
  react->add_option("reactions", o.reaction_file, "Reaction records")->required();
  react->add_option("--task", o.task, "product, retro or yield")
      ->check(CLI::IsMember({"product", "retro", "yield"}));
  react->add_option("--library", o.library, "Corpus for the retrieval libraries");
  react->add_option("--checkpoint", o.checkpoint, "Model checkpoint");
  react->add_option("--seed", o.seed, "Initialization seed");

  auto* eval = app.add_subcommand("eval", "Score predictions against references");
  eval->add_option("pred", o.pred_file, "Predictions, one per line")->required();
  eval->add_option("gold", o.gold_file, "References, one per line")->required();
  eval->add_option("--metric", o.metric, "mae, rmse, accuracy, f1 or ndcg")
      ->required()
      ->check(CLI::IsMember({"mae", "rmse", "accuracy", "f1", "ndcg"}));
  eval->add_option("--name", o.metric_name, "Report name (default: the metric)");
  eval->add_option("--seed", o.seed, "Unused; accepted for uniformity");

  auto* card = app.add_subcommand("scorecard", "Capability radar from per-model reports");
  card->add_option("reports", o.reports_dir, "Directory of report files")->required();
  card->add_option("--out", o.out_path, "Radar JSON output");
  card->add_option("--svg", o.svg_path, "Optional static chart");

  std::vector<std::string> argv_store = {"scicore"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }
  o.seed_set = train_seed->count() > 0;

  try {
    if (*parse) cmd_parse(o, out);
    if (*embed) cmd_embed(o, out);
    if (*trainc) cmd_train(o, out);
    if (*gen) cmd_generate(o, out);
    if (*react) cmd_react(o, out);
    if (*eval) cmd_eval(o, out);
    if (*card) cmd_scorecard(o, out, err);
  } catch (const LineError& e) {
    err << "error: " << errc_name(e.code()) << " at line " << e.line() << ": " << e.reason()
        << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace scm::cli
