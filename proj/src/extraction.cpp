#include "natprog/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace natprog {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

// Case-insensitive literal substring search.
size_t ifind(const std::string& haystack_lower, const std::string& needle_lower, size_t from = 0) {
  return haystack_lower.find(needle_lower, from);
}

std::string strip_trailing(std::string s, const char* chars) {
  while (!s.empty() && std::strchr(chars, s.back()) != nullptr) s.pop_back();
  return s;
}

// --- rational comparison -------------------------------------------------

struct Rational {
  bool ok = false;
  long long num = 0;
  long long den = 1;
};

Rational make_rational(long long num, long long den) {
  if (den == 0) return {};
  if (den < 0) { num = -num; den = -den; }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) { num /= g; den /= g; }
  return {true, num, den};
}

// Plain decimal: [-]digits[.digits], whole string, overflow-guarded.
Rational parse_decimal(const std::string& s) {
  if (s.empty()) return {};
  size_t i = 0;
  bool neg = false;
  if (s[i] == '-' || s[i] == '+') { neg = s[i] == '-'; ++i; }
  long long num = 0, den = 1;
  int digits = 0;
  bool seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot) return {};
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) return {};
    if (++digits > 18) return {};
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
  }
  if (digits == 0) return {};
  return make_rational(neg ? -num : num, den);
}

long long parse_int(const std::string& s, bool* ok) {
  Rational r = parse_decimal(s);
  if (!r.ok || r.den != 1) { *ok = false; return 0; }
  *ok = true;
  return r.num;
}

// Decimal, a/b, or (a/b)/c.
Rational parse_rational(const std::string& s) {
  static const std::regex nested(R"(^(-?)\((\d+)/(\d+)\)/(\d+)$)");
  static const std::regex simple(R"(^(-?\d+)/(\d+)$)");
  std::smatch m;
  if (std::regex_match(s, m, nested)) {
    bool ok = true;
    long long a = parse_int(m[2].str(), &ok);
    bool ok2 = true, ok3 = true;
    long long b = parse_int(m[3].str(), &ok2);
    long long c = parse_int(m[4].str(), &ok3);
    if (!ok || !ok2 || !ok3 || b == 0 || c == 0 || b > 1000000 || c > 1000000) return {};
    return make_rational(m[1].str() == "-" ? -a : a, b * c);
  }
  if (std::regex_match(s, m, simple)) {
    bool ok = true, ok2 = true;
    long long a = parse_int(m[1].str(), &ok);
    long long b = parse_int(m[2].str(), &ok2);
    if (!ok || !ok2 || b == 0) return {};
    return make_rational(a, b);
  }
  return parse_decimal(s);
}

bool rational_eq(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
}

// Commas, currency marks, and spaces are formatting; trailing periods are
// sentence punctuation.
std::string normalize_numeric(const std::string& in) {
  std::string s = trim(in);
  static const char* currency[] = {"$", "\xC2\xA3", "\xE2\x82\xAC", "\xC2\xA5"};
  for (const char* cur : currency) {
    size_t pos;
    while ((pos = s.find(cur)) != std::string::npos) s.erase(pos, std::strlen(cur));
  }
  std::string out;
  for (char c : s)
    if (c != ',' && c != ' ') out.push_back(c);
  return strip_trailing(out, ".");
}

bool parse_double_full(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

std::string normalize_choice(const std::string& in) {
  std::string s = strip_trailing(trim(in), ".) ");
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

std::string normalize_freetext(const std::string& in) {
  return lower(trim(strip_quotes(trim(in))));
}

}  // namespace

std::string last_nonempty_lines(const std::string& text, int count) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_blank(line)) lines.push_back(line);
  }
  size_t start = lines.size() > static_cast<size_t>(count) ? lines.size() - count : 0;
  std::string out;
  for (size_t i = start; i < lines.size(); ++i) {
    if (!out.empty()) out += "\n";
    out += lines[i];
  }
  return out;
}

std::vector<std::string> load_pattern_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern file: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::string answer_type_regex(AnswerType type) {
  switch (type) {
    case AnswerType::Number: return R"((-?\d[\d,\. ]*))";
    case AnswerType::Fraction: return R"((-?\(\d+\/\d+\)\/\d+|-?\d+\/\d+))";
    case AnswerType::Date: return R"((\d\d/\d\d/\d\d\d\d))";
    case AnswerType::YesNo: return R"((?:Yes|No|yes|no|NO|YES))";
    case AnswerType::MultipleChoice: return R"(([A-E])\))";
    case AnswerType::FreeText: return "";
  }
  return "";
}

AnswerExtractor::AnswerExtractor(std::vector<std::string> no_answer_patterns,
                                 std::vector<std::string> answer_split_patterns)
    : no_answer_(std::move(no_answer_patterns)), split_(std::move(answer_split_patterns)) {}

AnswerExtractor AnswerExtractor::load(const std::string& asset_dir) {
  return AnswerExtractor(load_pattern_file(asset_dir + "/patterns/no_answer.txt"),
                         load_pattern_file(asset_dir + "/patterns/answer_split.txt"));
}

ExtractionResult AnswerExtractor::extract_final_answer(const std::string& response,
                                                       AnswerType type) const {
  ExtractionResult out;
  std::string block = last_nonempty_lines(response, 3);
  out.source_block = block;

  for (const auto& pat : no_answer_) {
    std::regex re(pat, std::regex::ECMAScript | std::regex::icase);
    if (std::regex_search(block, re)) {
      out.matched_pattern = "no-answer:" + pat;
      return out;
    }
  }

  bool split_happened = false;
  std::string block_lower = lower(block);
  for (const auto& pat : split_) {
    std::string pat_lower = lower(pat);
    size_t pos = ifind(block_lower, pat_lower);
    if (pos == std::string::npos) continue;
    size_t last = pos;
    for (size_t next = ifind(block_lower, pat_lower, last + 1); next != std::string::npos;
         next = ifind(block_lower, pat_lower, next + 1))
      last = next;
    block = block.substr(last + pat.size());
    out.matched_pattern = "split:" + pat;
    out.source_block = block;
    split_happened = true;
    break;
  }

  auto first_match = [&block](const std::string& pattern, std::string* captured) {
    std::regex re(pattern);
    std::smatch m;
    if (!std::regex_search(block, m, re)) return false;
    *captured = m.size() > 1 && m[1].matched ? m[1].str() : m[0].str();
    return true;
  };

  std::string captured;
  switch (type) {
    case AnswerType::Number:
      if (first_match(answer_type_regex(type), &captured)) {
        out.value = strip_trailing(captured, "., ");
        out.matched_pattern = "type:" + answer_type_regex(type);
        return out;
      }
      break;
    case AnswerType::Fraction:
    case AnswerType::Date:
    case AnswerType::YesNo:
      if (first_match(answer_type_regex(type), &captured)) {
        out.value = captured;
        out.matched_pattern = "type:" + answer_type_regex(type);
        return out;
      }
      break;
    case AnswerType::MultipleChoice: {
      if (first_match(answer_type_regex(type), &captured)) {
        out.value = captured;
        out.matched_pattern = "choice:" + answer_type_regex(type);
        return out;
      }
      // Standalone letter right after an "option is" / "answer is" phrase
      // (the phrase may already be consumed by the split).
      std::string scan = block;
      std::string scan_lower = lower(scan);
      for (const char* phrase : {"option is", "answer is"}) {
        size_t pos = scan_lower.find(phrase);
        if (pos != std::string::npos) {
          scan = scan.substr(pos + std::strlen(phrase));
          break;
        }
      }
      std::smatch m;
      static const std::regex standalone(R"(\b([A-E])\b)");
      if (split_happened || scan.size() != block.size()) {
        if (std::regex_search(scan, m, standalone)) {
          out.value = m[1].str();
          out.matched_pattern = "choice:standalone";
          return out;
        }
      }
      std::string whole = strip_trailing(trim(block), ".)");
      if (whole.size() == 1 && whole[0] >= 'A' && whole[0] <= 'E') {
        out.value = whole;
        out.matched_pattern = "choice:bare";
        return out;
      }
      break;
    }
    case AnswerType::FreeText: {
      if (!split_happened) break;
      std::string line = block.substr(0, block.find('\n'));
      line = trim(line);
      line = strip_trailing(line, ".!?,;");
      line = strip_quotes(line);
      line = trim(strip_trailing(line, ".!?,;"));
      if (!line.empty()) {
        out.value = line;
        out.matched_pattern = "freetext:line-remainder";
        return out;
      }
      break;
    }
  }

  out.value.reset();
  out.matched_pattern = "none";
  return out;
}

std::string normalize_answer(const std::string& a, AnswerType type) {
  switch (type) {
    case AnswerType::Number:
    case AnswerType::Fraction: {
      std::string n = normalize_numeric(a);
      Rational r = parse_rational(n);
      if (r.ok) return std::to_string(r.num) + "/" + std::to_string(r.den);
      return lower(n);
    }
    case AnswerType::Date:
      return trim(a);
    case AnswerType::YesNo:
      return lower(trim(a));
    case AnswerType::MultipleChoice:
      return normalize_choice(a);
    case AnswerType::FreeText:
      return normalize_freetext(a);
  }
  return trim(a);
}

bool answers_equal(const std::string& a, const std::string& b, AnswerType type) {
  if (type == AnswerType::Number || type == AnswerType::Fraction) {
    std::string na = normalize_numeric(a), nb = normalize_numeric(b);
    Rational ra = parse_rational(na), rb = parse_rational(nb);
    if (ra.ok && rb.ok) return rational_eq(ra, rb);
    double da = 0, db = 0;
    if (parse_double_full(na, &da) && parse_double_full(nb, &db))
      return std::fabs(da - db) <= 1e-6;
    return lower(na) == lower(nb);
  }
  return normalize_answer(a, type) == normalize_answer(b, type);
}

}  // namespace natprog
