#include "ear/planted.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <unordered_set>

#include "ear/random.h"

namespace ear {

namespace {

// Pseudo-words built from CV syllables and a final k/m/n/t. No such word is
// a stopword or loses a suffix to the Porter stemmer, so surface forms and
// index terms coincide.
class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string fresh() {
    static constexpr std::string_view kCons = "bdfgklmnprtvz";
    static constexpr std::string_view kVowels = "aeiou";
    static constexpr std::string_view kFinal = "kmnt";
    while (true) {
      std::string w;
      const size_t syllables = 2 + rng_.below(2);
      for (size_t s = 0; s < syllables; ++s) {
        w.push_back(kCons[rng_.below(kCons.size())]);
        w.push_back(kVowels[rng_.below(kVowels.size())]);
      }
      w.push_back(kFinal[rng_.below(kFinal.size())]);
      if (porter_stem(w) != w || is_stopword(w)) continue;
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  return out;
}

class Filler {
 public:
  Filler(WordFactory& words, Rng& rng, size_t vocab) : rng_(rng) {
    double total = 0.0;
    for (size_t i = 0; i < vocab; ++i) {
      words_.push_back(words.fresh());
      total += 1.0 / std::pow(static_cast<double>(i + 1), 0.8);
      cumulative_.push_back(total);
    }
  }

  const std::string& draw() {
    const double u = rng_.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return words_[std::min(static_cast<size_t>(it - cumulative_.begin()), words_.size() - 1)];
  }

  void append(std::vector<std::string>& chunks, size_t n) {
    for (size_t i = 0; i < n; ++i) chunks.push_back(draw());
  }

 private:
  Rng& rng_;
  std::vector<std::string> words_;
  std::vector<double> cumulative_;
};

struct Topic {
  std::vector<std::string> terms;    // 4 topic terms
  std::vector<std::string> context;  // 6 distractor context terms
  std::string answer;
};

constexpr std::array<std::string_view, 4> kTemplates = {
    "what is the {0} of the {1} {2} {3}?",
    "where did the {0} {1} meet the {2} of {3}?",
    "who was the {0} in {1} {2} {3}?",
    "which {0} {1} made the {2} {3}?",
};

std::string render(std::string_view tmpl, const std::vector<std::string>& t) {
  std::string out;
  for (size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      out += t[static_cast<size_t>(tmpl[i + 1] - '0')];
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

enum class Kind { kUseful, kDecoy, kContext, kNoise, kPartial };

}  // namespace

PlantedFixture make_planted_fixture(const PlantedConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0x91a7));
  WordFactory words(rng);
  Filler filler(words, rng, 400);
  PlantedFixture fx;
  std::vector<Passage> passages;

  auto add_passage = [&](std::vector<std::string> chunks, std::string title) {
    rng.shuffle(std::span<std::string>(chunks));
    passages.push_back({"", std::move(title), join(chunks) + "."});
  };

  const size_t total = cfg.train_questions + cfg.test_questions;
  for (size_t qi = 0; qi < total; ++qi) {
    const bool is_train = qi < cfg.train_questions;
    Topic topic;
    for (int i = 0; i < 4; ++i) topic.terms.push_back(words.fresh());
    for (int i = 0; i < 6; ++i) topic.context.push_back(words.fresh());
    topic.answer = capitalize(words.fresh()) + " " + capitalize(words.fresh());

    QAExample q;
    q.qid = (is_train ? "train-" : "test-") + std::to_string(is_train ? qi : qi - cfg.train_questions);
    q.question = render(kTemplates[rng.below(kTemplates.size())], topic.terms);
    q.answers = {topic.answer};

    // Answer passage: all four topic terms once, the answer phrase, filler.
    {
      std::vector<std::string> chunks(topic.terms);
      chunks.push_back(topic.answer);
      filler.append(chunks, 30 + rng.below(16));
      add_passage(std::move(chunks), capitalize(topic.terms[0]) + " " + capitalize(topic.terms[1]));
    }
    // Distractors: three of the four topic terms, repeated, plus context.
    const size_t distractors = cfg.min_distractors + rng.below(cfg.max_distractors - cfg.min_distractors + 1);
    for (size_t d = 0; d < distractors; ++d) {
      std::vector<std::string> chunks;
      const size_t dropped = rng.below(4);
      for (size_t t = 0; t < 4; ++t) {
        if (t == dropped) continue;
        const size_t tf = 1 + rng.below(3);
        for (size_t r = 0; r < tf; ++r) chunks.push_back(topic.terms[t]);
      }
      const size_t ctx = 2 + rng.below(2);
      for (size_t c = 0; c < ctx; ++c) chunks.push_back(topic.context[rng.below(topic.context.size())]);
      filler.append(chunks, 12 + rng.below(14));
      add_passage(std::move(chunks), capitalize(topic.terms[(dropped + 1) % 4]));
    }

    // Candidate expansions.
    const bool hard = rng.bernoulli(cfg.hard_rate);
    const bool decoyed = !hard && rng.bernoulli(cfg.decoy_rate);
    const size_t useful = hard ? 0 : 1 + rng.below(3);
    const size_t decoys = decoyed ? 1 + rng.below(2) : 0;
    const size_t dups = 2 + rng.below(4);
    const size_t rest = cfg.candidates - useful - decoys - dups;

    std::vector<std::string> decoy_answers;
    for (size_t i = 0; i < decoys; ++i) {
      std::string wrong = capitalize(words.fresh()) + " " + capitalize(words.fresh());
      std::vector<std::string> chunks{wrong};
      filler.append(chunks, 20 + rng.below(20));
      add_passage(std::move(chunks), "");
      decoy_answers.push_back(std::move(wrong));
    }

    auto name_form = [&](const std::string& name) {
      switch (rng.below(3)) {
        case 0: return name;
        case 1: return topic.terms[rng.below(4)] + " " + name;
        default: return name + " " + filler.draw();
      }
    };

    std::vector<std::pair<Kind, std::string>> cands;
    for (size_t i = 0; i < useful; ++i) cands.emplace_back(Kind::kUseful, name_form(topic.answer));
    for (size_t i = 0; i < decoys; ++i) cands.emplace_back(Kind::kDecoy, name_form(decoy_answers[i]));
    for (size_t i = 0; i < rest; ++i) {
      const double u = rng.uniform();
      std::vector<std::string> parts;
      Kind kind;
      if (u < 0.6) {
        kind = Kind::kContext;
        const size_t n = 2 + rng.below(3);
        for (size_t j = 0; j < n; ++j) parts.push_back(topic.context[rng.below(topic.context.size())]);
      } else if (u < 0.85) {
        kind = Kind::kNoise;
        const size_t n = 2 + rng.below(3);
        for (size_t j = 0; j < n; ++j) parts.push_back(filler.draw());
      } else {
        kind = Kind::kPartial;
        const size_t n = 1 + rng.below(2);
        for (size_t j = 0; j < n; ++j) parts.push_back(topic.terms[rng.below(4)]);
        parts.push_back(filler.draw());
      }
      cands.emplace_back(kind, join(parts));
    }
    rng.shuffle(std::span<std::pair<Kind, std::string>>(cands));

    // The first candidate plays the generator's greedy output.
    auto first_useful = std::find_if(cands.begin(), cands.end(), [](const auto& c) { return c.first == Kind::kUseful; });
    auto first_other = std::find_if(cands.begin(), cands.end(),
                                    [](const auto& c) { return c.first != Kind::kUseful && c.first != Kind::kDecoy; });
    if (useful > 0 && rng.bernoulli(cfg.greedy_useful_rate)) {
      std::iter_swap(cands.begin(), first_useful);
    } else if (first_other != cands.end()) {
      std::iter_swap(cands.begin(), first_other);
    }

    std::vector<std::string> texts;
    for (auto& c : cands) texts.push_back(std::move(c.second));
    // Repeats of earlier samples, sometimes with different casing.
    for (size_t i = 0; i < dups; ++i) {
      const size_t src = rng.below(texts.size());
      std::string copy = texts[src];
      if (rng.bernoulli(0.5))
        std::transform(copy.begin(), copy.end(), copy.begin(),
                       [](char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; });
      const size_t pos = src + 1 + rng.below(texts.size() - src);
      texts.insert(texts.begin() + static_cast<ptrdiff_t>(pos), std::move(copy));
    }

    CandidateSet cs;
    cs.qid = q.qid;
    const GeneratorTag tag = is_train ? GeneratorTag::kExternal : GeneratorTag::kAnswer;
    for (size_t i = 0; i < texts.size(); ++i) cs.candidates.push_back({texts[i], tag, i});
    cs.requested_n = cs.candidates.size();
    (is_train ? fx.train_expansions : fx.test_expansions).emplace(q.qid, std::move(cs));
    (is_train ? fx.train : fx.test).push_back(std::move(q));
  }

  for (size_t j = 0; j < cfg.junk_passages; ++j) {
    std::vector<std::string> chunks;
    filler.append(chunks, 20 + rng.below(21));
    const size_t extra = rng.below(3);
    for (size_t i = 0; i < extra; ++i) chunks.push_back(words.fresh());
    add_passage(std::move(chunks), "");
  }

  // Ids follow a shuffled order so the answer passage has no positional tell.
  rng.shuffle(std::span<Passage>(passages));
  const size_t width = std::to_string(passages.size()).size();
  for (size_t i = 0; i < passages.size(); ++i) {
    std::string num = std::to_string(i);
    passages[i].id = "p" + std::string(width - num.size(), '0') + num;
  }
  fx.passages = std::move(passages);
  return fx;
}

void write_planted_fixture(const std::string& dir, const PlantedFixture& fx) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_corpus((base / "corpus.jsonl").string(), fx.passages);
  write_questions((base / "train.jsonl").string(), fx.train);
  write_questions((base / "test.jsonl").string(), fx.test);
  write_expansions((base / "train_expansions.jsonl").string(), fx.train_expansions);
  write_expansions((base / "test_expansions.jsonl").string(), fx.test_expansions);
}

}  // namespace ear
