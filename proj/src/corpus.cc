#include "ear/corpus.h"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "ear/jsonl.h"

namespace ear {

PassageStore::PassageStore(std::vector<Passage> passages) : passages_(std::move(passages)) {
  tokens_.reserve(passages_.size());
  by_id_.reserve(passages_.size());
  for (size_t i = 0; i < passages_.size(); ++i) {
    const auto& p = passages_[i];
    if (p.id.empty()) throw InputError("passage with empty id at position " + std::to_string(i + 1), i + 1);
    if (!by_id_.emplace(p.id, i).second) throw InputError("duplicate id " + p.id, i + 1);
    tokens_.push_back(normalize(p.text).tokens);
  }
}

std::optional<size_t> PassageStore::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const Passage& PassageStore::get(std::string_view id) const {
  auto i = find(id);
  if (!i) throw std::out_of_range("unknown passage id " + std::string(id));
  return passages_[*i];
}

const std::vector<std::string>& PassageStore::tokens(std::string_view id) const {
  auto i = find(id);
  if (!i) throw std::out_of_range("unknown passage id " + std::string(id));
  return tokens_[*i];
}

PassageStore load_corpus(const std::string& path) {
  std::vector<Passage> passages;
  std::unordered_set<std::string> seen;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t line) {
    Passage p;
    p.id = json_id(j, "id", line);
    p.title = j.contains("title") && j["title"].is_string() ? j["title"].get<std::string>() : "";
    p.text = json_string(j, "text", line);
    if (p.text.empty()) throw InputError("line " + std::to_string(line) + ": empty passage text", line);
    if (!seen.insert(p.id).second) throw InputError("duplicate id " + p.id, line);
    passages.push_back(std::move(p));
  });
  return PassageStore(std::move(passages));
}

std::vector<QAExample> load_questions(const std::string& path, bool require_answers) {
  std::vector<QAExample> out;
  std::unordered_set<std::string> seen;
  for_each_jsonl(path, [&](const nlohmann::json& j, size_t line) {
    QAExample q;
    q.qid = json_id(j, "qid", line);
    q.question = json_string(j, "question", line);
    if (q.question.empty()) throw InputError("line " + std::to_string(line) + ": empty question", line);
    const bool has_answers = j.contains("answers");
    if (has_answers && !j["answers"].is_array())
      throw InputError("line " + std::to_string(line) + ": answers must be an array", line);
    if (require_answers && !has_answers)
      throw InputError("line " + std::to_string(line) + ": missing answers array", line);
    for (const auto& a : has_answers ? j["answers"] : nlohmann::json::array()) {
      if (!a.is_string()) throw InputError("line " + std::to_string(line) + ": non-string answer", line);
      q.answers.push_back(a.get<std::string>());
    }
    if (require_answers && q.answers.empty()) throw InputError("line " + std::to_string(line) + ": empty answers list", line);
    if (!seen.insert(q.qid).second) throw InputError("duplicate qid " + q.qid, line);
    out.push_back(std::move(q));
  });
  return out;
}

void write_corpus(const std::string& path, std::span<const Passage> passages) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& p : passages)
    out << nlohmann::json{{"id", p.id}, {"title", p.title}, {"text", p.text}}.dump() << '\n';
}

void write_questions(const std::string& path, std::span<const QAExample> questions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& q : questions)
    out << nlohmann::json{{"qid", q.qid}, {"question", q.question}, {"answers", q.answers}}.dump()
        << '\n';
}

AnswerMatcher::AnswerMatcher(std::span<const std::string> answers) {
  for (const auto& a : answers) {
    auto toks = normalize(a).tokens;
    if (!toks.empty()) answers_.push_back(std::move(toks));
  }
}

bool AnswerMatcher::matches(const std::vector<std::string>& passage_tokens) const {
  for (const auto& a : answers_) {
    if (std::search(passage_tokens.begin(), passage_tokens.end(), a.begin(), a.end()) !=
        passage_tokens.end())
      return true;
  }
  return false;
}

bool contains_answer(const Passage& p, std::span<const std::string> answers) {
  return AnswerMatcher(answers).matches(normalize(p.text).tokens);
}

}  // namespace ear
