//
// Copyright 2026 The Envre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "envre/value_rename.h"

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "envre/error.h"
#include "envre/random.h"
#include "envre/text_util.h"

namespace envre {
namespace {

constexpr int kAttempts = 16;
constexpr int kYearRadius = 80;

enum class Role {
  kGeneric,
  kFraction,
  kGroup,
  kYear,
  kDecade,
  kMonth,
  kDay,
  kHour,
  kMinute,
  kOrdinal,
};

struct Run {
  std::size_t begin = 0;
  std::size_t end = 0;
  Role role = Role::kGeneric;
  // Calendar month known from context (month word or date partner run).
  int month_hint = 0;
  std::optional<std::size_t> month_partner;
  std::optional<std::size_t> year_partner;
  // Length of an ordinal suffix ("st", "th", ...) directly after the digits.
  std::size_t suffix = 0;
  bool twelve_hour = false;

  std::size_t size() const { return end - begin; }
};

struct Word {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string folded;
};

bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsAlpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

int MonthFromWord(const std::string& folded) {
  static const std::array<std::array<const char*, 3>, 12> kMonths = {{
      {"january", "jan", ""},
      {"february", "feb", ""},
      {"march", "mar", ""},
      {"april", "apr", ""},
      {"may", "", ""},
      {"june", "jun", ""},
      {"july", "jul", ""},
      {"august", "aug", ""},
      {"september", "sep", "sept"},
      {"october", "oct", ""},
      {"november", "nov", ""},
      {"december", "dec", ""},
  }};
  for (int m = 0; m < 12; ++m) {
    for (const char* form : kMonths[m]) {
      if (*form != '\0' && folded == form) return m + 1;
    }
  }
  return 0;
}

// Spelled-out number words grouped by magnitude class.
const std::vector<std::vector<std::string>>& NumberWordClasses() {
  static const auto* classes = new std::vector<std::vector<std::string>>{
      {"one", "two", "three", "four", "five", "six", "seven", "eight", "nine"},
      {"ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen",
       "seventeen", "eighteen", "nineteen"},
      {"twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty",
       "ninety"},
      {"first", "second", "third", "fourth", "fifth", "sixth", "seventh",
       "eighth", "ninth"},
  };
  return *classes;
}

const std::vector<std::string>* NumberWordClass(const std::string& folded) {
  for (const auto& cls : NumberWordClasses()) {
    for (const std::string& w : cls) {
      if (w == folded) return &cls;
    }
  }
  return nullptr;
}

std::string MatchCase(const std::string& replacement, std::string_view like) {
  std::string out = replacement;
  bool all_upper = like.size() > 1;
  for (char c : like) {
    if (IsAlpha(c) && !(c >= 'A' && c <= 'Z')) all_upper = false;
  }
  if (all_upper) {
    for (char& c : out) c = static_cast<char>(std::toupper(c));
  } else if (!like.empty() && like.front() >= 'A' && like.front() <= 'Z') {
    out.front() = static_cast<char>(std::toupper(out.front()));
  }
  return out;
}

std::string OrdinalSuffix(int value, std::string_view like) {
  std::string suffix = "th";
  if (value % 100 < 11 || value % 100 > 13) {
    switch (value % 10) {
      case 1: suffix = "st"; break;
      case 2: suffix = "nd"; break;
      case 3: suffix = "rd"; break;
      default: break;
    }
  }
  if (!like.empty() && like.front() >= 'A' && like.front() <= 'Z') {
    for (char& c : suffix) c = static_cast<char>(std::toupper(c));
  }
  return suffix;
}

bool IsLeap(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int DaysInMonth(int month, std::optional<int> year) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) return 28;
  if (month == 2 && year && IsLeap(*year)) return 29;
  return kDays[month - 1];
}

std::string Pad(int value, std::size_t width) {
  std::string s = std::to_string(value);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

// Draws a field value in [lo, hi] keeping the original's width class: a
// two-digit field with a leading zero stays below 10, one without stays at 10
// or above, and a one-digit field stays below 10.
std::string DrawField(std::string_view original, int lo, int hi,
                      SeededStream& stream) {
  int a = lo;
  int b = hi;
  if (original.size() == 1) {
    b = std::min(b, 9);
  } else if (original.front() == '0') {
    b = std::min(b, 9);
  } else {
    a = std::max(a, 10);
  }
  if (a > b) return std::string(original);
  return Pad(stream.UniformInt(a, b), original.size());
}

std::string DrawDigits(std::string_view original, bool leading_nonzero,
                       SeededStream& stream) {
  std::string out(original);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i == 0 && leading_nonzero) {
      if (original == "0") {
        out[i] = static_cast<char>('0' + stream.UniformInt(0, 9));
      } else if (original.front() == '0') {
        out[i] = '0';
      } else {
        out[i] = static_cast<char>('0' + stream.UniformInt(1, 9));
      }
    } else {
      out[i] = static_cast<char>('0' + stream.UniformInt(0, 9));
    }
  }
  return out;
}

int DrawYear(int year, std::size_t width, bool decade, SeededStream& stream) {
  int lo = year - kYearRadius;
  int hi = year + kYearRadius;
  int min_value = width <= 1 ? 0 : 1;
  for (std::size_t i = 1; i < width; ++i) min_value *= 10;
  int max_value = 1;
  for (std::size_t i = 0; i < width; ++i) max_value *= 10;
  max_value -= 1;
  lo = std::max(lo, min_value);
  hi = std::min(hi, max_value);
  std::vector<int> options;
  for (int y = lo; y <= hi; ++y) {
    if (y == year) continue;
    if (decade && y % 10 != year % 10) continue;
    options.push_back(y);
  }
  if (options.empty()) return year;
  return options[stream.Uniform(options.size())];
}

class ValueParser {
 public:
  ValueParser(std::string_view text, bool is_time) : text_(text) {
    Scan();
    AssignRoles(is_time);
  }

  bool parsed() const {
    if (!runs_.empty()) return true;
    for (const Word& w : words_) {
      if (NumberWordClass(w.folded) != nullptr) return true;
    }
    return false;
  }

  std::string Render(SeededStream& stream) const {
    std::vector<std::string> values(runs_.size());
    std::vector<std::optional<int>> numeric(runs_.size());
    auto draw = [&](std::size_t i) {
      const Run& r = runs_[i];
      const std::string_view digits = text_.substr(r.begin, r.size());
      const int original = std::stoi(std::string(digits.substr(
          0, std::min<std::size_t>(digits.size(), 9))));
      switch (r.role) {
        case Role::kYear:
        case Role::kDecade: {
          int y = DrawYear(original, r.size(), r.role == Role::kDecade, stream);
          numeric[i] = y;
          values[i] = Pad(y, r.size());
          break;
        }
        case Role::kMonth: {
          values[i] = DrawField(digits, 1, 12, stream);
          numeric[i] = std::stoi(values[i]);
          break;
        }
        case Role::kDay: {
          int month = r.month_hint;
          if (r.month_partner && numeric[*r.month_partner]) {
            month = *numeric[*r.month_partner];
          }
          std::optional<int> year;
          if (r.year_partner && numeric[*r.year_partner]) {
            year = numeric[*r.year_partner];
          }
          values[i] = DrawField(digits, 1, DaysInMonth(month, year), stream);
          numeric[i] = std::stoi(values[i]);
          break;
        }
        case Role::kHour:
          values[i] = r.twelve_hour ? DrawField(digits, 1, 12, stream)
                                    : DrawField(digits, 0, 23, stream);
          break;
        case Role::kMinute:
          values[i] = Pad(stream.UniformInt(0, 59), r.size());
          break;
        case Role::kOrdinal:
          values[i] = DrawDigits(digits, /*leading_nonzero=*/true, stream);
          if (values[i].find_first_not_of('0') == std::string::npos) {
            values[i].back() = static_cast<char>('0' + stream.UniformInt(1, 9));
          }
          numeric[i] = std::stoi(values[i]);
          break;
        case Role::kFraction:
        case Role::kGroup:
          values[i] = DrawDigits(digits, /*leading_nonzero=*/false, stream);
          break;
        case Role::kGeneric:
          values[i] = DrawDigits(digits, /*leading_nonzero=*/true, stream);
          break;
      }
    };
    // Years first so days can respect leap years, then months, then the rest.
    for (Role pass : {Role::kYear, Role::kDecade, Role::kMonth}) {
      for (std::size_t i = 0; i < runs_.size(); ++i) {
        if (runs_[i].role == pass) draw(i);
      }
    }
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      const Role role = runs_[i].role;
      if (role != Role::kYear && role != Role::kDecade && role != Role::kMonth) {
        draw(i);
      }
    }

    std::string out;
    std::size_t pos = 0;
    std::size_t next_run = 0;
    std::size_t next_word = 0;
    while (pos < text_.size()) {
      if (next_run < runs_.size() && runs_[next_run].begin == pos) {
        const Run& r = runs_[next_run];
        out += values[next_run];
        pos = r.end;
        if (r.suffix > 0) {
          const int value = numeric[next_run].value_or(std::stoi(values[next_run]));
          out += OrdinalSuffix(value, text_.substr(r.end, r.suffix));
          pos += r.suffix;
        }
        ++next_run;
        continue;
      }
      while (next_word < words_.size() && words_[next_word].begin < pos) {
        ++next_word;
      }
      if (next_word < words_.size() && words_[next_word].begin == pos) {
        const Word& w = words_[next_word];
        const std::string_view original = text_.substr(w.begin, w.end - w.begin);
        if (const auto* cls = NumberWordClass(w.folded)) {
          std::string pick = w.folded;
          while (pick == w.folded) pick = (*cls)[stream.Uniform(cls->size())];
          out += MatchCase(pick, original);
        } else {
          out += original;
        }
        pos = w.end;
        ++next_word;
        continue;
      }
      out += text_[pos++];
    }
    return out;
  }

 private:
  void Scan() {
    std::size_t i = 0;
    while (i < text_.size()) {
      if (IsDigit(text_[i])) {
        std::size_t j = i;
        while (j < text_.size() && IsDigit(text_[j])) ++j;
        Run run;
        run.begin = i;
        run.end = j;
        runs_.push_back(run);
        i = j;
      } else if (IsAlpha(text_[i])) {
        std::size_t j = i;
        while (j < text_.size() && IsAlpha(text_[j])) ++j;
        words_.push_back({i, j, FoldCase(text_.substr(i, j - i))});
        i = j;
      } else {
        ++i;
      }
    }
  }

  char At(std::size_t i) const { return i < text_.size() ? text_[i] : '\0'; }

  // Run index starting exactly at `pos`, if any.
  std::optional<std::size_t> RunAt(std::size_t pos) const {
    for (std::size_t k = 0; k < runs_.size(); ++k) {
      if (runs_[k].begin == pos) return k;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> WordAt(std::size_t pos) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k].begin == pos) return k;
    }
    return std::nullopt;
  }

  // Month number of the word adjacent to run `k` across spaces/commas/dots.
  int AdjacentMonth(std::size_t k) const {
    const Run& r = runs_[k];
    std::size_t after = r.end + r.suffix;
    while (after < text_.size() && (text_[after] == ' ' || text_[after] == ','))
      ++after;
    if (auto w = WordAt(after)) {
      if (int m = MonthFromWord(words_[*w].folded)) return m;
    }
    std::size_t before = r.begin;
    while (before > 0 &&
           (text_[before - 1] == ' ' || text_[before - 1] == '.' ||
            text_[before - 1] == ',')) {
      --before;
    }
    for (const Word& w : words_) {
      if (w.end == before) {
        if (int m = MonthFromWord(w.folded)) return m;
      }
    }
    return 0;
  }

  std::size_t OrdinalSuffixAt(const Run& r) const {
    if (r.end + 2 > text_.size()) return 0;
    const std::string s = FoldCase(text_.substr(r.end, 2));
    if (s != "st" && s != "nd" && s != "rd" && s != "th") return 0;
    if (IsAlpha(At(r.end + 2))) return 0;
    return 2;
  }

  void AssignRoles(bool is_time) {
    std::vector<bool> done(runs_.size(), false);
    for (std::size_t k = 0; k < runs_.size(); ++k) {
      if (done[k]) continue;
      Run& r = runs_[k];
      // yyyy-mm-dd
      if (r.size() == 4 && At(r.end) == '-') {
        auto m = RunAt(r.end + 1);
        if (m && runs_[*m].size() <= 2 && At(runs_[*m].end) == '-') {
          auto d = RunAt(runs_[*m].end + 1);
          if (d && runs_[*d].size() <= 2) {
            r.role = Role::kYear;
            runs_[*m].role = Role::kMonth;
            runs_[*d].role = Role::kDay;
            runs_[*d].month_partner = *m;
            runs_[*d].year_partner = k;
            done[k] = done[*m] = done[*d] = true;
            continue;
          }
        }
      }
      // dd/mm/yyyy or mm/dd/yyyy (also with dots)
      if (r.size() <= 2 && (At(r.end) == '/' || At(r.end) == '.')) {
        const char sep = At(r.end);
        auto b = RunAt(r.end + 1);
        if (b && runs_[*b].size() <= 2 && At(runs_[*b].end) == sep) {
          auto y = RunAt(runs_[*b].end + 1);
          if (y && (runs_[*y].size() == 4 || runs_[*y].size() == 2)) {
            const int first = std::stoi(std::string(text_.substr(r.begin, r.size())));
            std::size_t month = first <= 12 ? k : *b;
            std::size_t day = first <= 12 ? *b : k;
            runs_[month].role = Role::kMonth;
            runs_[day].role = Role::kDay;
            runs_[day].month_partner = month;
            if (runs_[*y].size() == 4) {
              runs_[*y].role = Role::kYear;
              runs_[day].year_partner = *y;
            }
            done[k] = done[*b] = done[*y] = true;
            continue;
          }
        }
      }
      // hh:mm
      if (r.size() <= 2 && At(r.end) == ':') {
        auto m = RunAt(r.end + 1);
        if (m && runs_[*m].size() == 2) {
          r.role = Role::kHour;
          runs_[*m].role = Role::kMinute;
          std::size_t after = runs_[*m].end;
          while (At(after) == ' ') ++after;
          if (auto w = WordAt(after)) {
            const std::string& f = words_[*w].folded;
            r.twelve_hour = f == "am" || f == "pm";
          }
          done[k] = done[*m] = true;
          continue;
        }
      }
      r.suffix = OrdinalSuffixAt(r);
      const int month = r.size() <= 2 ? AdjacentMonth(k) : 0;
      if (month != 0 && std::stoi(std::string(text_.substr(r.begin, r.size()))) <= 31) {
        r.role = Role::kDay;
        r.month_hint = month;
        // A year later in the same string pins leap-day validity.
        for (std::size_t y = k + 1; y < runs_.size(); ++y) {
          if (runs_[y].size() == 4) {
            r.year_partner = y;
            break;
          }
        }
      } else if (r.suffix > 0) {
        r.role = Role::kOrdinal;
      } else if (r.begin >= 2 && At(r.begin - 1) == '.' && IsDigit(At(r.begin - 2))) {
        r.role = Role::kFraction;
      } else if (r.size() == 3 && r.begin >= 2 && At(r.begin - 1) == ',' &&
                 IsDigit(At(r.begin - 2))) {
        r.role = Role::kGroup;
      } else if (is_time && r.size() == 4 && At(r.end) == 's' &&
                 !IsAlpha(At(r.end + 1))) {
        r.role = Role::kDecade;
      } else if (is_time && r.size() == 4 &&
                 !(At(r.end) == ',' && IsDigit(At(r.end + 1)))) {
        r.role = Role::kYear;
      } else {
        r.role = Role::kGeneric;
      }
      done[k] = true;
    }
    // Resolve year partners that were guessed before roles were final.
    for (Run& r : runs_) {
      if (r.year_partner && runs_[*r.year_partner].role != Role::kYear) {
        r.year_partner.reset();
      }
    }
  }

  std::string_view text_;
  std::vector<Run> runs_;
  std::vector<Word> words_;
};

}  // namespace

bool IsRuleBasedType(std::string_view entity_type) {
  return entity_type == "NUM" || entity_type == "TIME";
}

RenamedValue RenameValue(std::string_view name, std::string_view entity_type,
                         std::uint64_t seed) {
  if (!IsRuleBasedType(entity_type)) {
    throw Error(ErrorCode::kValidation,
                "rule-based renaming applies to NUM and TIME, not '" +
                    std::string(entity_type) + "'");
  }
  ValueParser parser(name, entity_type == "TIME");
  if (!parser.parsed()) return {std::string(name), false};
  SeededStream stream(seed);
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::string value = parser.Render(stream);
    if (value != name) return {std::move(value), true};
  }
  return {std::string(name), false};
}

}  // namespace envre
