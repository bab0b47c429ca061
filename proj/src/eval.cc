#include "ear/eval.h"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace ear {

std::optional<size_t> min_answer_rank(const RankedList& rl, std::span<const std::string> answers,
                                      const PassageStore& store) {
  AnswerMatcher matcher(answers);
  for (size_t i = 0; i < rl.entries.size(); ++i)
    if (matcher.matches(store, rl.entries[i].pid)) return i + 1;
  return std::nullopt;
}

void AccuracyReport::check() const {
  double prev = 0.0;
  for (size_t k : ks) {
    const double a = accuracy.at(k);
    if (a < 0.0 || a > 1.0) throw std::logic_error("accuracy outside [0, 1] at k=" + std::to_string(k));
    if (a < prev) throw std::logic_error("accuracy decreases at k=" + std::to_string(k));
    prev = a;
  }
}

AccuracyReport topk_accuracy(const Run& run, std::span<const QAExample> qa, const PassageStore& store,
                             std::vector<size_t> ks, std::string tag) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty() || ks.front() == 0) throw std::invalid_argument("cut-offs must be positive");

  std::unordered_set<std::string> known;
  for (const auto& q : qa) known.insert(q.qid);
  for (const auto& [qid, list] : run)
    if (!known.count(qid)) throw std::invalid_argument("run contains qid " + qid + " absent from the questions");

  AccuracyReport report;
  report.tag = tag.empty() && !run.empty() ? run.begin()->second.tag : std::move(tag);
  report.questions = qa.size();
  report.ks = ks;
  std::vector<size_t> hits(ks.size(), 0);
  for (const auto& q : qa) {
    auto it = run.find(q.qid);
    if (it == run.end()) continue;
    auto r = min_answer_rank(it->second, q.answers, store);
    if (!r) continue;
    for (size_t i = 0; i < ks.size(); ++i)
      if (*r <= ks[i]) ++hits[i];
  }
  for (size_t i = 0; i < ks.size(); ++i)
    report.accuracy[ks[i]] = qa.empty() ? 0.0 : static_cast<double>(hits[i]) / static_cast<double>(qa.size());
  report.check();
  return report;
}

std::string AccuracyReport::to_text() const {
  std::ostringstream out;
  out << "run " << (tag.empty() ? "-" : tag) << "  questions " << questions << '\n';
  for (size_t k : ks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  top-%-4zu %7.2f\n", k, 100.0 * accuracy.at(k));
    out << buf;
  }
  return out.str();
}

std::string AccuracyReport::to_json() const {
  nlohmann::json acc = nlohmann::json::object();
  for (size_t k : ks) acc[std::to_string(k)] = accuracy.at(k);
  return nlohmann::json{{"tag", tag}, {"questions", questions}, {"ks", ks}, {"accuracy", acc}}.dump(2);
}

std::vector<AblationRow> ablate_candidate_size(const StrategySpec& spec, const PipelineContext& ctx,
                                               std::span<const QAExample> qa, const ExpansionTable& expansions,
                                               std::span<const size_t> ns, std::vector<size_t> ks) {
  if (!std::is_sorted(ns.begin(), ns.end())) throw std::invalid_argument("candidate sizes must be ascending");
  std::vector<AblationRow> rows;
  for (size_t n : ns) {
    StrategySpec at_n = spec;
    at_n.cap_n = n;
    auto result = run_dataset(at_n, ctx, qa, &expansions);
    if (!result.errors.empty()) throw std::runtime_error("ablation at N=" + std::to_string(n) + ": " + result.errors.front());
    rows.push_back({n, topk_accuracy(result.run, qa, ctx.store, ks, at_n.run_tag())});
  }
  return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "N";
  if (!rows.empty())
    for (size_t k : rows.front().report.ks) out << ",top" << k;
  out << '\n';
  for (const auto& row : rows) {
    out << row.n;
    for (size_t k : row.report.ks) out << ',' << row.report.at(k);
    out << '\n';
  }
  return out.str();
}

std::string accuracy_csv(std::span<const AccuracyReport> reports) {
  std::ostringstream out;
  out << "run,k,accuracy\n";
  for (const auto& r : reports)
    for (size_t k : r.ks) out << r.tag << ',' << k << ',' << r.at(k) << '\n';
  return out.str();
}

}  // namespace ear
