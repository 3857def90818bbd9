#include <string>
#include <string_view>

#include "sqlsel/judge.hpp"
#include "sqlsel/text.hpp"

namespace sqlsel {

namespace {

constexpr std::string_view kPreamble =
    R"(You first thinks about the reasoning process in the mind and then provides the user with the answer.

Task Overview:
You are a data science expert. Below, you are provided with a database schema, a natural language question, two candidates SQL and its corresponding execution result. Your task is to understand the schema and choose the correct SQL which answers the natural language question from the two candidates.

Database Engine:
SQLite

Database Schema:
{DATABASE_SCHEMA}

)";

constexpr std::string_view kOutputFormat =
    R"(Output Format:
Show your work in <think> </think> tags. And return your answer 'A' or 'B' in <answer> </answer> tags. For example, <think>reasoning process here</think><answer>A</answer> if the candidate A is correct, <think>reasoning process here</think><answer>B</answer> if the candidate B is correct.)";

constexpr std::string_view kPJudgeBody =
    R"(This schema describes the database's structure, including tables, columns, primary keys, foreign keys, and any relevant relationships or constraints.

Question:
{EVIDENCE}
{QUESTION}

Here are two candidate SQLs and their execute results:
Candidate A:
{CANDIDATE_A_QUERY}
Execution result of A:
{CANDIDATE_A_RESULT}

Candidate B:
{CANDIDATE_B_QUERY}
Execution result of B:
{CANDIDATE_B_RESULT}

Instructions:
- Before choosing the final answer, please think through the steps of how to confirm its correctness. You should think through these steps:
1. Understanding the user question requirements:  – What information is being requested? What are the key columns and filters?
2. Analyzing the Database schema: – Which tables and joins are necessary to answer the question? What are the key relationships?
3. Evaluating candidate A and its execution results: – Does it select the correct columns? Does it apply the correct conditions and joins? Does the result match expectations?
4. Evaluating candidate B and its execution results: – Does it select the correct columns? Does it apply the correct conditions and joins? Does the result match expectations?
5. Comparing two candidates and their execution results: -– Identify differences between the two queries in terms of structure, logic, and execution result.
6. Determining the Correct answer: – Select the query that best satisfies the question requirements, with correct columns, filters, and joins.

Remember:
- The correct SQL should return all of the information asked in the question without any missing or extra information. If the question asks for a specific column, the correct candidate SQL only include that column in the SELECT clause, nothing more, nothing less.
- The empty execution result "[]" does not necessarily mean that the SQL query is incorrect; it might simply indicate that the database does not contain such data.

)";

constexpr std::string_view kRJudgeBody =
    R"(This schema describes the database's structure, including tables, columns, primary keys, foreign keys, and any relevant relationships or constraints.

Question:
{EVIDENCE}
{QUESTION}

Here are two candidate SQLs and their execute results:
Candidate A:
{CANDIDATE_A_QUERY}
Execution result:
{CANDIDATE_A_RESULT}

Candidate B:
{CANDIDATE_B_QUERY}
Execution result:
{CANDIDATE_B_RESULT}

Instructions:
- The correct SQL should return all of the information asked in the question without any missing or extra information. If the question asks for a specific column, the correct candidate SQL only include that column in the SELECT clause, nothing more.
- The empty execution result "[]" does not necessarily mean that the SQL query is incorrect; it might simply indicate that the database does not contain such data.
- Before choosing the final answer, please think through the steps of how to confirm its correctness.

)";

std::string result_text(const JudgedSide& side) {
  return side.outcome ? side.outcome->rendered : std::string("[]");
}

// Single left-to-right pass, so slot names inside substituted values are
// never expanded.
std::string fill(std::string_view tmpl, const JudgmentRequest& req) {
  std::string out;
  out.reserve(tmpl.size() + 1024);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i++]);
      continue;
    }
    const auto close = tmpl.find('}', i);
    const std::string_view slot = tmpl.substr(i + 1, close - i - 1);
    std::size_t next = close + 1;
    if (slot == "DATABASE_SCHEMA") {
      out += req.schema_union.ddl_text;
    } else if (slot == "EVIDENCE") {
      // The evidence line disappears entirely when there is no evidence.
      if (trim(req.evidence).empty()) {
        if (next < tmpl.size() && tmpl[next] == '\n') ++next;
      } else {
        out += req.evidence;
      }
    } else if (slot == "QUESTION") {
      out += req.question;
    } else if (slot == "CANDIDATE_A_QUERY") {
      out += req.side_a.sql;
    } else if (slot == "CANDIDATE_A_RESULT") {
      out += result_text(req.side_a);
    } else if (slot == "CANDIDATE_B_QUERY") {
      out += req.side_b.sql;
    } else if (slot == "CANDIDATE_B_RESULT") {
      out += result_text(req.side_b);
    } else {
      out.append(tmpl.substr(i, next - i));
    }
    i = next;
  }
  return out;
}

}  // namespace

std::string_view to_string(PromptTemplate t) noexcept {
  return t == PromptTemplate::pjudge ? "pjudge" : "rjudge";
}

std::string render_prompt(const JudgmentRequest& req) {
  std::string tmpl(kPreamble);
  tmpl += req.prompt_template == PromptTemplate::pjudge ? kPJudgeBody : kRJudgeBody;
  tmpl += kOutputFormat;
  return fill(tmpl, req);
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::A: return "A";
    case Verdict::B: return "B";
    case Verdict::parse_failure: return "parse_failure";
  }
  return "parse_failure";
}

Verdict flip(Verdict v) noexcept {
  switch (v) {
    case Verdict::A: return Verdict::B;
    case Verdict::B: return Verdict::A;
    default: return v;
  }
}

namespace {

std::size_t count_of(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

Verdict verdict_of(std::string_view content) {
  const std::string v = to_upper(trim(content));
  if (v == "A") return Verdict::A;
  if (v == "B") return Verdict::B;
  return Verdict::parse_failure;
}

}  // namespace

ParsedJudgment parse_judgment(std::string_view raw) {
  static constexpr std::string_view kThinkOpen = "<think>", kThinkClose = "</think>";
  static constexpr std::string_view kAnswerOpen = "<answer>", kAnswerClose = "</answer>";
  ParsedJudgment out;

  // Last complete answer span.
  const auto open = raw.rfind(kAnswerOpen);
  if (open != std::string_view::npos) {
    const auto body = open + kAnswerOpen.size();
    const auto close = raw.find(kAnswerClose, body);
    if (close != std::string_view::npos) out.winner = verdict_of(raw.substr(body, close - body));
  }

  const auto think_open = raw.find(kThinkOpen);
  if (think_open != std::string_view::npos) {
    const auto body = think_open + kThinkOpen.size();
    const auto close = raw.find(kThinkClose, body);
    if (close != std::string_view::npos) out.reasoning = std::string(raw.substr(body, close - body));
  }

  // Format check: exactly one think span followed by exactly one answer
  // span, nothing else outside them.
  const std::string_view t = trim(raw);
  if (out.winner != Verdict::parse_failure && count_of(t, kThinkOpen) == 1 &&
      count_of(t, kThinkClose) == 1 && count_of(t, kAnswerOpen) == 1 &&
      count_of(t, kAnswerClose) == 1 && t.starts_with(kThinkOpen) && t.ends_with(kAnswerClose)) {
    const auto tc = t.find(kThinkClose);
    const auto ao = t.find(kAnswerOpen);
    out.format_ok = tc < ao && trim(t.substr(tc + kThinkClose.size(), ao - tc - kThinkClose.size())).empty();
  }
  return out;
}

JudgmentRequest swap_sides(JudgmentRequest req) {
  std::swap(req.side_a, req.side_b);
  return req;
}

}  // namespace sqlsel
