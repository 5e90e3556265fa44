//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/train/stage.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

#include "scm/core/checkpoint.hpp"
#include "scm/core/error.hpp"
#include "scm/core/optim.hpp"
#include "scm/lm/tokenizer.hpp"

namespace scm::train {

using ag::Tape;
using ag::Var;

StageId stage_from_name(std::string_view name) {
  if (name == "1-pretrain") return StageId::Pretrain;
  if (name == "1-align") return StageId::Align;
  if (name == "2-joint") return StageId::Joint;
  if (name == "3-finetune") return StageId::Finetune;
  throw Error(Errc::ConfigError, "unknown stage '" + std::string(name) + "'");
}

std::string_view stage_name(StageId id) noexcept {
  switch (id) {
    case StageId::Pretrain: return "1-pretrain";
    case StageId::Align: return "1-align";
    case StageId::Joint: return "2-joint";
    case StageId::Finetune: return "3-finetune";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] void bad(std::size_t line, const std::string& reason) {
  throw LineError(Errc::ConfigError, line, reason);
}

double to_double(std::string_view v, std::size_t line) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(line, "expected a number, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_uint(std::string_view v, std::size_t line) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(line, "expected a count, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(line, "expected true or false, got '" + std::string(v) + "'");
}

bool matches(const std::string& name, const std::vector<std::string>& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) { return name.rfind(p, 0) == 0; });
}

// Cycles through a shuffled index order, reshuffling on each pass.
class Cycler {
 public:
  Cycler(std::size_t n, Rng& rng) : order_(n), rng_(&rng) { shuffle(); }
  std::size_t next() {
    if (pos_ == order_.size()) shuffle();
    return order_[pos_++];
  }

 private:
  void shuffle() {
    std::iota(order_.begin(), order_.end(), 0);
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_->below(i)]);
    pos_ = 0;
  }
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  Rng* rng_;
};

// Restores trainable flags when a stage ends, normally or not.
class FreezeGuard {
 public:
  explicit FreezeGuard(const ParamRefs& ps) : ps_(ps) {
    for (const Parameter* p : ps) flags_.push_back(p->trainable);
  }
  ~FreezeGuard() {
    for (std::size_t i = 0; i < ps_.size(); ++i) ps_[i]->trainable = flags_[i];
  }

 private:
  ParamRefs ps_;
  std::vector<bool> flags_;
};

}  // namespace

StageConfig parse_stage_config(std::string_view text, const std::filesystem::path& base) {
  StageConfig c;
  std::string section;
  bool have_id = false;
  auto path = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad(number, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "stage" && section != "freeze" && section != "weights" &&
          section != "optimizer") {
        bad(number, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(number, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) bad(number, "empty key or value");
    if (section.empty()) bad(number, "key '" + key + "' outside a section");

    if (section == "stage") {
      if (key == "id") {
        try {
          c.id = stage_from_name(value);
        } catch (const Error& e) {
          bad(number, e.what());
        }
        have_id = true;
      } else if (key == "steps") c.steps = to_uint(value, number);
      else if (key == "seed") c.seed = to_uint(value, number);
      else if (key == "batch") c.batch = to_uint(value, number);
      else if (key == "kl_weight") c.kl_weight = to_double(value, number);
      else if (key == "temperature") c.temperature = to_double(value, number);
      else if (key == "ae_noise") c.ae_noise = to_double(value, number);
      else if (key == "pairs") c.pairs = path(value);
      else if (key == "smiles") c.smiles = path(value);
      else if (key == "reactions") c.reactions = path(value);
      else if (key == "init") c.init = path(value);
      else if (key == "checkpoint") c.checkpoint = path(value);
      else if (key == "metrics") c.metrics = path(value);
      else bad(number, "unknown stage key '" + key + "'");
    } else if (section == "freeze") {
      if (key != "prefix") bad(number, "freeze entries are 'prefix = <name prefix>'");
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        if (!item.empty()) c.freeze.emplace_back(item);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    } else if (section == "weights") {
      double* slot = key == "lm"      ? &c.weights.lm
                     : key == "align" ? &c.weights.align
                     : key == "diff"  ? &c.weights.diff
                     : key == "rxn"   ? &c.weights.rxn
                     : key == "emb"   ? &c.weights.emb
                     : key == "amt"   ? &c.weights.amt
                     : key == "yield" ? &c.weights.yield
                     : key == "reg"   ? &c.weights.reg
                     : key == "cls"   ? &c.weights.cls
                                      : nullptr;
      if (!slot) bad(number, "unknown weight '" + key + "'");
      *slot = to_double(value, number);
      if (!(*slot >= 0.0)) bad(number, "weight '" + key + "' must be >= 0");
    } else {
      if (key == "lr") c.optimizer.lr = to_double(value, number);
      else if (key == "beta1") c.optimizer.beta1 = to_double(value, number);
      else if (key == "beta2") c.optimizer.beta2 = to_double(value, number);
      else if (key == "eps") c.optimizer.eps = to_double(value, number);
      else if (key == "clip_norm") c.optimizer.clip_norm = to_double(value, number);
      else if (key == "cosine") c.optimizer.cosine = to_bool(value, number);
      else bad(number, "unknown optimizer key '" + key + "'");
    }
  }
  if (!have_id) bad(number, "missing [stage] id");
  if (c.batch == 0) bad(number, "batch must be >= 1");
  return c;
}

StageConfig load_stage_config(const std::filesystem::path& path) {
  return parse_stage_config(harness::read_file(path), path.parent_path());
}

std::vector<std::string> effective_freeze(const StageConfig& config) {
  std::vector<std::string> out = config.freeze;
  auto add = [&](const char* p) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.emplace_back(p);
  };
  switch (config.id) {
    case StageId::Align:
      for (const char* p : {"lm.", "ae.", "dit.", "rxn."}) add(p);
      break;
    case StageId::Joint:
    case StageId::Finetune:
      add("ae.");
      break;
    case StageId::Pretrain:
      break;
  }
  return out;
}

StageCorpora load_stage_corpora(const StageConfig& config) {
  StageCorpora out;
  if (!config.pairs.empty()) out.pairs = harness::load_pairs(config.pairs);
  if (!config.smiles.empty()) out.smiles = harness::load_smiles_lines(config.smiles);
  if (!config.reactions.empty()) out.reactions = harness::load_reactions(config.reactions);
  return out;
}

LmItem caption_item(const harness::TextPair& pair) {
  return LmItem{lm::tokenize("<bos><mol>" + pair.smiles + "</mol>"), {pair.smiles},
                lm::tokenize(pair.description + "<eos>")};
}

void write_metrics(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "step,task,loss\n";
  out.precision(10);
  for (const MetricRow& r : rows) out << r.step << ',' << r.task << ',' << r.loss << '\n';
}

StageResult run_stage(const StageConfig& config, Models& models, const StageCorpora& corpora) {
  config.weights.validate();
  Rng rng(config.seed);
  ParamRefs params = models.params();
  if (!config.init.empty()) checkpoint::restore(checkpoint::load(config.init), params, true);

  FreezeGuard guard(params);
  const auto freeze = effective_freeze(config);
  StageResult result;
  for (Parameter* p : params) {
    if (matches(p->name, freeze)) p->trainable = false;
    (p->trainable ? result.trainable : result.frozen) += 1;
  }
  if (result.trainable == 0) {
    throw Error(Errc::FrozenAllParams, "every parameter is frozen in stage " +
                                           std::string(stage_name(config.id)));
  }

  // task pools
  std::vector<JointItem> lm_pool, align_pool, diff_pool, rxn_pool;
  for (const auto& p : corpora.pairs) {
    lm_pool.push_back({"lm", caption_item(p)});
    align_pool.push_back({"align", AlignItem{p.smiles, p.description}});
    diff_pool.push_back({"diffusion", DiffusionTextItem{p.smiles, p.description}});
  }
  // a frozen backbone gives fixed text embeddings
  const bool lm_frozen = std::none_of(params.begin(), params.end(), [](const Parameter* p) {
    return p->trainable && p->name.rfind("lm.", 0) == 0;
  });
  if (config.id == StageId::Align && lm_frozen) {
    for (JointItem& item : align_pool) {
      AlignItem& a = std::get<AlignItem>(item.payload);
      Tape tape;
      a.text = text_embedding(tape, models.lm, a.description).value();
    }
  }
  for (const auto& s : corpora.smiles) diff_pool.push_back({"diffusion", DiffusionTextItem{s, {}}});
  MoleculeCache cache;
  if (!corpora.reactions.empty()) {
    const auto norm = rxn::AmountNormalizer::fit(corpora.reactions);
    const rxn::GeometryFn geometry = [&](const std::string& s) {
      Tape tape;
      return models.gvp.h_geo(tape, cache.graph(s), cache.conformer(s)).value();
    };
    for (const auto& r : corpora.reactions) {
      rxn::ReactionSample sample{rxn::prepare(r, norm, geometry), {}};
      for (std::size_t i = 0; i < sample.rx.size(); ++i) {
        if (sample.rx.roles[i] == rxn::Role::Product) {
          sample.mask.push_back(i);
          break;
        }
      }
      rxn_pool.push_back({"reaction", std::move(sample)});
    }
  }

  struct Pool {
    std::string task;
    const std::vector<JointItem>* items = nullptr;  // null for autoencoder
    std::size_t size = 0;
  };
  std::vector<Pool> pools;
  switch (config.id) {
    case StageId::Pretrain:
      if (!corpora.smiles.empty()) pools.push_back({"autoencoder", nullptr, corpora.smiles.size()});
      if (!lm_pool.empty()) pools.push_back({"lm", &lm_pool, lm_pool.size()});
      if (!rxn_pool.empty()) pools.push_back({"reaction", &rxn_pool, rxn_pool.size()});
      break;
    case StageId::Align:
      if (!align_pool.empty()) pools.push_back({"align", &align_pool, align_pool.size()});
      break;
    case StageId::Joint:
    case StageId::Finetune:
      if (!lm_pool.empty()) pools.push_back({"lm", &lm_pool, lm_pool.size()});
      if (!align_pool.empty()) pools.push_back({"align", &align_pool, align_pool.size()});
      if (!diff_pool.empty()) pools.push_back({"diffusion", &diff_pool, diff_pool.size()});
      if (!rxn_pool.empty()) pools.push_back({"reaction", &rxn_pool, rxn_pool.size()});
      break;
  }
  if (pools.empty() && config.steps > 0) {
    throw Error(Errc::EmptyBatch, "stage " + std::string(stage_name(config.id)) +
                                      " has no corpus for its tasks");
  }
  std::vector<Cycler> cyclers;
  for (const Pool& p : pools) cyclers.emplace_back(p.size, rng);

  // backbone snapshot for the KL term
  std::optional<lm::LanguageModel> reference;
  if (config.id == StageId::Pretrain) reference = models.lm;

  AdamConfig adam;
  adam.lr = config.optimizer.lr;
  adam.beta1 = config.optimizer.beta1;
  adam.beta2 = config.optimizer.beta2;
  adam.eps = config.optimizer.eps;
  adam.clip_norm = config.optimizer.clip_norm;
  Adam opt(params, adam);

  const bool joint = config.id == StageId::Joint || config.id == StageId::Finetune;
  for (std::size_t step = 0; step < config.steps; ++step) {
    opt.zero_grad();
    Tape tape;
    Var loss;
    if (joint) {
      std::vector<JointItem> batch;
      for (std::size_t k = 0; k < config.batch; ++k) {
        const std::size_t t = (step * config.batch + k) % pools.size();
        batch.push_back((*pools[t].items)[cyclers[t].next()]);
      }
      const JointTerms terms =
          joint_loss(tape, models, batch, config.weights, cache, rng, config.temperature);
      const std::pair<const char*, const std::optional<Var>*> parts[] = {
          {"lm", &terms.lm}, {"align", &terms.align}, {"diffusion", &terms.diffusion},
          {"reaction", &terms.reaction}};
      for (const auto& [name, v] : parts) {
        if (*v) result.metrics.push_back({step, name, (*v)->item()});
      }
      loss = terms.total;
      result.metrics.push_back({step, "joint", loss.item()});
    } else {
      const std::size_t t = step % pools.size();
      const Pool& pool = pools[t];
      if (!pool.items) {
        std::vector<Var> terms;
        for (std::size_t k = 0; k < config.batch; ++k) {
          terms.push_back(models.autoencoder.reconstruction_loss(
              tape, corpora.smiles[cyclers[t].next()], rng, config.ae_noise));
        }
        loss = ag::scale(ag::add_n(terms), 1.0 / static_cast<double>(terms.size()));
      } else {
        std::vector<JointItem> batch;
        for (std::size_t k = 0; k < config.batch; ++k) batch.push_back((*pool.items)[cyclers[t].next()]);
        loss = joint_loss(tape, models, batch, config.weights, cache, rng, config.temperature).total;
        if (reference && pool.task == "lm") {
          std::vector<Var> kls;
          for (const JointItem& item : batch) {
            const LmItem& it = std::get<LmItem>(item.payload);
            std::vector<int> ids = it.prompt;
            ids.insert(ids.end(), it.target.begin(), it.target.end() - 1);
            std::vector<lm::Slot> slots;
            for (int id : ids) slots.push_back({id, std::nullopt});
            Tape ref_tape;
            const Tensor ref = reference->logits(ref_tape, reference->hidden(ref_tape, slots)).value();
            kls.push_back(kl_regularizer(models.lm.logits(tape, models.lm.hidden(tape, slots)), ref));
          }
          const Var kl = ag::scale(ag::add_n(kls), 1.0 / static_cast<double>(kls.size()));
          result.metrics.push_back({step, "kl", kl.item()});
          const Var parts[] = {loss, ag::scale(kl, config.kl_weight)};
          loss = ag::add_n(parts);
        }
      }
      result.metrics.push_back({step, pool.task, loss.item()});
    }
    tape.backward(loss);
    opt.step(config.optimizer.cosine ? cosine_lr(config.optimizer.lr, step, config.steps)
                                     : config.optimizer.lr);
  }

  for (const auto* out : {&config.checkpoint, &config.metrics}) {
    if (!out->empty() && out->has_parent_path()) {
      std::filesystem::create_directories(out->parent_path());
    }
  }
  if (!config.checkpoint.empty()) checkpoint::save(config.checkpoint, params);
  if (!config.metrics.empty()) write_metrics(config.metrics, result.metrics);
  return result;
}

}  // namespace scm::train
