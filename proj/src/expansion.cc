#include "ear/expansion.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "ear/jsonl.h"
#include "ear/random.h"

namespace ear {

std::string_view to_string(GeneratorTag tag) {
  switch (tag) {
    case GeneratorTag::kAnswer: return "answer";
    case GeneratorTag::kSentence: return "sentence";
    case GeneratorTag::kTitle: return "title";
    case GeneratorTag::kStub: return "stub";
    case GeneratorTag::kExternal: return "external";
  }
  return "external";
}

GeneratorTag parse_generator_tag(std::string_view name) {
  for (auto tag : {GeneratorTag::kAnswer, GeneratorTag::kSentence, GeneratorTag::kTitle,
                   GeneratorTag::kStub, GeneratorTag::kExternal})
    if (to_string(tag) == name) return tag;
  throw std::invalid_argument("unknown generator_tag '" + std::string(name) + "'");
}

void ConstructionConfig::validate() const {
  if (n_samples < 2) throw std::invalid_argument("n_samples must be at least 2");
  if (k_retrieve < 1) throw std::invalid_argument("k_retrieve must be at least 1");
  if (max_rank <= static_cast<int>(k_retrieve))
    throw std::invalid_argument("MAX_RANK (" + std::to_string(max_rank) + ") must exceed k_retrieve (" +
                                std::to_string(k_retrieve) + ")");
  if (folds < 2) throw std::invalid_argument("fold count must be at least 2");
}

std::string expanded_query(std::string_view question, std::string_view expansion) {
  std::string q(question);
  q.push_back(' ');
  q.append(expansion);
  return q;
}

uint64_t stable_hash(std::string_view s, uint64_t salt) {
  uint64_t h = 0xcbf29ce484222325ULL ^ mix_seed(salt, 0x5eed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// --- stub sampler ---------------------------------------------------------

namespace {

bool content_token(const std::string& tok) { return tok.size() > 1 && !is_stopword(tok); }

}  // namespace

CandidateSet StubSampler::sample(std::string_view qid, std::string_view question, size_t n,
                                 uint64_t seed) const {
  if (n == 0) throw std::invalid_argument("sample size must be at least 1");
  CandidateSet cs;
  cs.qid = std::string(qid);
  cs.requested_n = n;

  const auto q_tokens = normalize(question).tokens;
  const std::unordered_set<std::string> q_set(q_tokens.begin(), q_tokens.end());

  // Co-occurring terms: content tokens of passages the question retrieves.
  std::vector<std::string> cooccur;
  std::unordered_set<std::string> seen;
  for (const auto& e : index_.search(question, 20).entries) {
    for (const auto& tok : store_.tokens(e.pid))
      if (content_token(tok) && !q_set.count(tok) && seen.insert(tok).second) cooccur.push_back(tok);
  }

  Rng rng(mix_seed(seed, stable_hash(question)));
  auto distractor = [&]() -> std::string {
    for (int attempt = 0; attempt < 32; ++attempt) {
      const auto& toks = store_.tokens(rng.below(store_.size()));
      if (toks.empty()) continue;
      const auto& tok = toks[rng.below(toks.size())];
      if (content_token(tok)) return tok;
    }
    return "misc";
  };
  auto compose = [&]() {
    const size_t len = 2 + rng.below(5);
    std::string text;
    for (size_t t = 0; t < len; ++t) {
      if (t) text.push_back(' ');
      if (!cooccur.empty() && rng.bernoulli(0.7))
        text += cooccur[rng.below(cooccur.size())];
      else
        text += distractor();
    }
    return text;
  };

  std::unordered_set<std::string> texts;
  for (size_t i = 0; i < n; ++i) {
    std::string text = compose();
    for (int retry = 0; retry < 16 && texts.count(normalize(text).joined()); ++retry) text = compose();
    // Every pass lengthens the normalized text, so this ends once it is
    // longer than anything already taken.
    while (texts.count(normalize(text).joined())) text += " " + distractor() + std::to_string(i);
    texts.insert(normalize(text).joined());
    cs.candidates.push_back({std::move(text), GeneratorTag::kStub, mix_seed(seed, i)});
  }
  return cs;
}

// --- file ingestion -------------------------------------------------------

ExpansionTable load_expansions(const std::string& path, const std::vector<QAExample>* known_qids,
                               std::vector<std::string>* warnings) {
  std::unordered_set<std::string> known;
  if (known_qids)
    for (const auto& q : *known_qids) known.insert(q.qid);
  std::unordered_set<std::string> warned;
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  ExpansionTable table;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t line) {
    std::string qid = json_id(j, "qid", line);
    std::string tag_name = json_string(j, "generator_tag", line);
    GeneratorTag tag;
    try {
      tag = parse_generator_tag(tag_name);
    } catch (const std::invalid_argument&) {
      throw InputError(path + ": line " + std::to_string(line) + ": unknown generator_tag '" + tag_name + "'",
                       line);
    }
    std::string text = json_string(j, "text", line);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      warn(path + ": line " + std::to_string(line) + ": blank expansion skipped");
      return;
    }
    if (known_qids && !known.count(qid) && warned.insert(qid).second)
      warn(path + ": qid " + qid + " is not in the question set");
    auto& cs = table[qid];
    cs.qid = qid;
    uint64_t sample_seed = j.contains("sample_seed") && j["sample_seed"].is_number_unsigned()
                               ? j["sample_seed"].get<uint64_t>()
                               : cs.candidates.size();
    cs.candidates.push_back({std::move(text), tag, sample_seed});
    cs.requested_n = cs.candidates.size();
  });
  return table;
}

void write_expansions(const std::string& path, const ExpansionTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [qid, cs] : table)
    for (const auto& c : cs.candidates)
      out << nlohmann::json{{"qid", qid}, {"generator_tag", to_string(c.tag)}, {"text", c.text}}.dump()
          << '\n';
}

// --- set operations -------------------------------------------------------

CandidateSet dedup(const CandidateSet& cs) {
  CandidateSet out = cs;
  out.candidates.clear();
  std::unordered_set<std::string> seen;
  for (const auto& c : cs.candidates)
    if (seen.insert(normalize(c.text).joined()).second) out.candidates.push_back(c);
  return out;
}

CandidateSet truncate(const CandidateSet& cs, size_t n) {
  if (n == 0) throw std::invalid_argument("truncation size must be at least 1");
  CandidateSet out = cs;
  if (out.candidates.size() > n) out.candidates.resize(n);
  out.cap = out.cap ? std::min(*out.cap, n) : n;
  return out;
}

std::vector<CandidateSet> split_by_tag(const CandidateSet& cs) {
  std::vector<CandidateSet> out;
  for (const auto& c : cs.candidates) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const CandidateSet& s) { return s.candidates.front().tag == c.tag; });
    if (it == out.end()) {
      out.push_back(CandidateSet{cs.qid, {}, 0, cs.cap});
      it = std::prev(out.end());
    }
    it->candidates.push_back(c);
  }
  for (auto& s : out) s.requested_n = s.candidates.size();
  return out;
}

// --- labels ---------------------------------------------------------------

LabelResult label_candidates(const Index& index, const PassageStore& store, const QAExample& q,
                             const CandidateSet& cs, const ConstructionConfig& cfg) {
  cfg.validate();
  std::vector<std::string> queries;
  queries.reserve(cs.size());
  for (const auto& c : cs.candidates) queries.push_back(expanded_query(q.question, c.text));
  auto lists = index.batch_search(queries, cfg.k_retrieve, cfg.workers);

  AnswerMatcher matcher(q.answers);
  LabelResult out;
  out.labels.reserve(cs.size());
  out.top1.reserve(cs.size());
  for (size_t i = 0; i < lists.size(); ++i) {
    RankLabel label{i, cfg.max_rank, false};
    const auto& entries = lists[i].entries;
    for (size_t r = 0; r < entries.size(); ++r) {
      if (matcher.matches(store, entries[r].pid)) {
        label.rank = static_cast<int>(r + 1);
        label.hit = true;
        break;
      }
    }
    out.labels.push_back(label);
    out.top1.push_back(entries.empty() ? std::string() : entries.front().pid);
  }
  return out;
}

// --- training set ---------------------------------------------------------

CandidateSet StubSource::generate(const QAExample& q, size_t fold, const ConstructionConfig& cfg) const {
  return sampler_.sample(q.qid, q.question, cfg.n_samples, mix_seed(cfg.seed, fold + 1));
}

CandidateSet TableSource::generate(const QAExample& q, size_t, const ConstructionConfig&) const {
  auto it = table_.find(q.qid);
  if (it == table_.end()) return CandidateSet{q.qid, {}, 0, std::nullopt};
  return it->second;
}

std::vector<size_t> assign_folds(std::span<const QAExample> qa, size_t folds, uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("fold count must be at least 2");
  if (qa.size() < folds)
    throw std::invalid_argument("cannot split " + std::to_string(qa.size()) + " questions into " +
                                std::to_string(folds) + " folds");
  std::vector<size_t> order(qa.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<uint64_t> keys(qa.size());
  for (size_t i = 0; i < qa.size(); ++i) keys[i] = stable_hash(qa[i].qid, seed);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : qa[a].qid < qa[b].qid;
  });
  std::vector<size_t> fold(qa.size());
  for (size_t pos = 0; pos < order.size(); ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

std::vector<TrainingExample> build_training_set(const Index& index, const PassageStore& store,
                                                std::span<const QAExample> qa_train,
                                                const ConstructionConfig& cfg,
                                                const ExpansionSource& source, bool record_top1) {
  cfg.validate();
  auto folds = assign_folds(qa_train, cfg.folds, cfg.seed);
  std::vector<TrainingExample> out;
  out.reserve(qa_train.size());
  for (size_t i = 0; i < qa_train.size(); ++i) {
    const auto& q = qa_train[i];
    CandidateSet raw = source.generate(q, folds[i], cfg);
    raw.qid = q.qid;
    raw.requested_n = cfg.n_samples;
    if (raw.candidates.size() > cfg.n_samples) raw.candidates.resize(cfg.n_samples);

    TrainingExample ex;
    ex.qid = q.qid;
    ex.question = q.question;
    ex.fold = folds[i];
    ex.candidates = dedup(raw);
    auto labeled = label_candidates(index, store, q, ex.candidates, cfg);
    ex.labels = std::move(labeled.labels);
    if (record_top1) ex.top1 = std::move(labeled.top1);
    out.push_back(std::move(ex));
  }
  return out;
}

void write_training_set(const std::string& path, std::span<const TrainingExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& ex : examples) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : ex.candidates.candidates)
      cands.push_back({{"text", c.text}, {"generator_tag", to_string(c.tag)}, {"sample_seed", c.sample_seed}});
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : ex.labels) labels.push_back({{"index", l.index}, {"r", l.rank}, {"hit", l.hit}});
    nlohmann::json j{{"qid", ex.qid},
                     {"question", ex.question},
                     {"fold", ex.fold},
                     {"requested_n", ex.candidates.requested_n},
                     {"candidates", cands},
                     {"labels", labels}};
    if (ex.candidates.cap) j["cap_N"] = *ex.candidates.cap;
    if (ex.top1) j["top1"] = *ex.top1;
    out << j.dump() << '\n';
  }
}

std::vector<TrainingExample> load_training_set(const std::string& path) {
  std::vector<TrainingExample> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t line) {
    auto fail = [&](const std::string& why) {
      throw InputError(path + ": line " + std::to_string(line) + ": " + why, line);
    };
    TrainingExample ex;
    try {
      ex.qid = json_id(j, "qid", line);
      ex.question = json_string(j, "question", line);
      ex.fold = j.at("fold").get<size_t>();
      ex.candidates.qid = ex.qid;
      ex.candidates.requested_n = j.value("requested_n", size_t{0});
      if (j.contains("cap_N")) ex.candidates.cap = j["cap_N"].get<size_t>();
      for (const auto& c : j.at("candidates")) {
        ExpansionCandidate cand{c.at("text").get<std::string>(),
                                parse_generator_tag(c.at("generator_tag").get<std::string>()),
                                c.value("sample_seed", uint64_t{0})};
        ex.candidates.candidates.push_back(std::move(cand));
      }
      for (const auto& l : j.at("labels"))
        ex.labels.push_back({l.at("index").get<size_t>(), l.at("r").get<int>(), l.at("hit").get<bool>()});
      if (j.contains("top1")) ex.top1 = j["top1"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (ex.labels.size() != ex.candidates.size()) fail("labels and candidates differ in length");
    if (ex.top1 && ex.top1->size() != ex.candidates.size()) fail("top1 and candidates differ in length");
    for (size_t i = 0; i < ex.labels.size(); ++i) {
      const auto& l = ex.labels[i];
      if (l.index != i || l.rank < 1) fail("malformed rank label");
    }
    out.push_back(std::move(ex));
  });
  return out;
}

}  // namespace ear
