#include "sfusion/qa_eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>
#include <set>

#include "sfusion/io_util.hpp"

namespace sfusion {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct Keyword {
  std::string_view word;
  RelationLabel label;
};

// Checked by position; at equal positions the longer phrase wins.
constexpr Keyword kEffectKeywords[] = {
    {"not yet clear", RelationLabel::COMB}, {"not clear", RelationLabel::COMB},
    {"unclear", RelationLabel::COMB},       {"undetermined", RelationLabel::COMB},
    {"positive", RelationLabel::POS},       {"strengthen", RelationLabel::POS},
    {"negative", RelationLabel::NEG},       {"weaken", RelationLabel::NEG},
};

constexpr std::string_view kRefusals[] = {
    "cannot determine", "can't determine", "can not determine", "not sure",
    "no information",   "i don't know",    "i do not know",     "unable to determine",
};

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto t = trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool decimal_point = c == '.' && i > 0 && i + 1 < text.size() &&
                               std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                               std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if ((c == '.' && !decimal_point) || c == '!' || c == '?' || c == '\n') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

// Lowercased, single-spaced copy used for matching.
std::string fold(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> entities_in(const std::string& sentence,
                                     const std::vector<std::string>& names_by_length) {
  std::vector<char> taken(sentence.size(), 0);
  std::set<std::string> found;
  for (const auto& name : names_by_length) {
    for (auto pos = sentence.find(name); pos != std::string::npos;
         pos = sentence.find(name, pos + 1)) {
      const auto end = pos + name.size();
      if (pos > 0 && is_word_char(sentence[pos - 1])) continue;
      if (end < sentence.size() && is_word_char(sentence[end])) continue;
      if (std::any_of(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                      taken.begin() + static_cast<std::ptrdiff_t>(end), [](char t) { return t; })) {
        continue;
      }
      std::fill(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                taken.begin() + static_cast<std::ptrdiff_t>(end), 1);
      found.insert(name);
    }
  }
  return {found.begin(), found.end()};
}

std::optional<RelationLabel> effect_in(const std::string& sentence) {
  std::optional<RelationLabel> best;
  std::size_t best_pos = std::string::npos;
  std::size_t best_len = 0;
  for (const auto& kw : kEffectKeywords) {
    for (auto pos = sentence.find(kw.word); pos != std::string::npos;
         pos = sentence.find(kw.word, pos + 1)) {
      // "HER2-positive" describes a population, not an effect.
      if (pos > 0 && (is_word_char(sentence[pos - 1]) || sentence[pos - 1] == '-')) continue;
      if (pos < best_pos || (pos == best_pos && kw.word.size() > best_len)) {
        best = kw.label;
        best_pos = pos;
        best_len = kw.word.size();
      }
      break;
    }
  }
  return best;
}

std::int64_t lcm_of_sizes(const std::vector<ComboAnswer>& standards) {
  std::int64_t l = 1;
  for (const auto& s : standards) {
    l = std::lcm(l, static_cast<std::int64_t>(std::max<std::size_t>(1, s.entities.size())));
  }
  return l;
}

std::size_t intersection_size(const ComboAnswer& a, const ComboAnswer& b) {
  std::size_t n = 0;
  auto i = a.entities.begin();
  auto j = b.entities.begin();
  while (i != a.entities.end() && j != b.entities.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

std::string normalize_entity(std::string_view name) { return fold(trim(name)); }

ComboAnswer make_combo(const std::vector<std::string>& names, std::optional<RelationLabel> effect) {
  ComboAnswer c;
  for (const auto& n : names) {
    auto norm = normalize_entity(n);
    if (!norm.empty()) c.entities.push_back(std::move(norm));
  }
  std::sort(c.entities.begin(), c.entities.end());
  c.entities.erase(std::unique(c.entities.begin(), c.entities.end()), c.entities.end());
  c.effect = effect;
  return c;
}

bool is_refusal(std::string_view text) {
  const auto folded = fold(text);
  return std::any_of(std::begin(kRefusals), std::end(kRefusals),
                     [&](std::string_view r) { return folded.find(r) != std::string::npos; });
}

std::vector<ComboAnswer> normalize_answer(std::string_view text, const Sample& sample) {
  if (is_refusal(text)) return {};

  std::vector<std::string> names;
  for (const auto& s : sample.spans) {
    auto n = normalize_entity(s.text);
    if (!n.empty()) names.push_back(std::move(n));
  }
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  names.erase(std::unique(names.begin(), names.end()), names.end());

  std::vector<std::string> sentences;
  for (auto& s : split_sentences(text)) sentences.push_back(fold(s));

  std::vector<ComboAnswer> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto ents = entities_in(sentences[i], names);
    if (ents.size() < 2) continue;
    auto effect = effect_in(sentences[i]);
    if (!effect && i + 1 < sentences.size() && entities_in(sentences[i + 1], names).empty()) {
      effect = effect_in(sentences[i + 1]);
      if (effect) ++i;
    }
    auto combo = make_combo(ents, effect);
    if (std::find(out.begin(), out.end(), combo) == out.end()) out.push_back(std::move(combo));
  }
  return out;
}

double combo_score(const ComboAnswer& standard, const ComboAnswer& generated) {
  if (standard.entities.empty()) return 0.0;
  const auto common = intersection_size(standard, generated);
  if (common <= 1) return 0.0;
  return static_cast<double>(common) / static_cast<double>(standard.entities.size());
}

SampleScore sample_score(const std::vector<ComboAnswer>& standards,
                         const std::vector<ComboAnswer>& generated) {
  if (standards.empty()) throw DataError("sample has no standard combinations to score against");

  // Integer weights proportional to |S ∩ G| / |S| over a common denominator.
  const auto denom = lcm_of_sizes(standards);
  WeightMatrix w(standards.size(), std::vector<std::int64_t>(generated.size(), 0));
  for (std::size_t s = 0; s < standards.size(); ++s) {
    const auto per_entity =
        denom / static_cast<std::int64_t>(std::max<std::size_t>(1, standards[s].entities.size()));
    for (std::size_t g = 0; g < generated.size(); ++g) {
      const auto common = intersection_size(standards[s], generated[g]);
      if (common > 1) w[s][g] = static_cast<std::int64_t>(common) * per_entity;
    }
  }
  const auto pairing = max_weight_pairing(w, generated.size());

  SampleScore out;
  out.combo_scores.assign(standards.size(), 0.0);
  out.effect_flags.assign(standards.size(), 0);
  out.paired_with.assign(standards.size(), std::nullopt);
  for (const auto& [s, g] : pairing) {
    out.paired_with[s] = g;
    out.combo_scores[s] = combo_score(standards[s], generated[g]);
    const auto& gen = generated[g];
    bool contradicted = false;
    for (const auto& other : generated) {
      if (other.entities == gen.entities && other.effect && gen.effect &&
          *other.effect != *gen.effect) {
        contradicted = true;
        break;
      }
    }
    out.effect_flags[s] =
        (gen.effect && standards[s].effect && *gen.effect == *standards[s].effect && !contradicted)
            ? 1
            : 0;
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < standards.size(); ++s) {
    sum += out.combo_scores[s] * out.effect_flags[s];
  }
  out.d = sum / static_cast<double>(standards.size());
  return out;
}

std::vector<SampleScore> score_cases(const std::vector<QaCase>& cases) {
  std::vector<SampleScore> out(cases.size());
  const auto n = static_cast<std::ptrdiff_t>(cases.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& c = cases[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = sample_score(c.standards, c.generated);
    out[static_cast<std::size_t>(i)].sample_id = c.sample_id;
  }
  return out;
}

std::vector<SampleScore> score_cases_serial(const std::vector<QaCase>& cases) {
  std::vector<SampleScore> out;
  out.reserve(cases.size());
  for (const auto& c : cases) {
    out.push_back(sample_score(c.standards, c.generated));
    out.back().sample_id = c.sample_id;
  }
  return out;
}

namespace {

void recompute(AccuracyReport& r) {
  double sum = 0.0;
  for (const auto& s : r.samples) sum += s.d;
  r.n = r.samples.size();
  r.total = sum / static_cast<double>(r.n);
  r.final_accuracy = r.total;
}

}  // namespace

AccuracyReport corpus_accuracy(const std::vector<SampleScore>& scores) {
  if (scores.empty()) throw DataError("no samples to compute accuracy over");
  AccuracyReport r;
  for (const auto& s : scores) r.samples.push_back(SampleAccuracy{s.sample_id, s.d, false, {}});
  recompute(r);
  return r;
}

std::vector<Adjudication> load_adjudications(const std::filesystem::path& path) {
  std::vector<Adjudication> out;
  const auto text = read_file(path);
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("sample_id") || !j.contains("D") ||
        !j["D"].is_number()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected {sample_id, D, note}");
    }
    Adjudication a;
    a.sample_id = j["sample_id"].is_string() ? j["sample_id"].get<std::string>()
                                             : j["sample_id"].dump();
    a.d = j["D"].get<double>();
    a.note = j.value("note", "");
    out.push_back(std::move(a));
  }
  return out;
}

AccuracyReport apply_adjudication(const AccuracyReport& report,
                                  const std::vector<Adjudication>& overrides) {
  AccuracyReport out = report;
  for (const auto& o : overrides) {
    if (!(o.d >= 0.0 && o.d <= 1.0)) {
      throw DataError("adjudicated score for '" + o.sample_id + "' outside [0, 1]");
    }
    auto it = std::find_if(out.samples.begin(), out.samples.end(),
                           [&](const SampleAccuracy& s) { return s.sample_id == o.sample_id; });
    if (it == out.samples.end()) {
      throw DataError("adjudication references unknown sample '" + o.sample_id + "'");
    }
    it->d = o.d;
    it->adjudicated = true;
    it->note = o.note;
  }
  if (!out.samples.empty()) recompute(out);
  return out;
}

nlohmann::ordered_json to_json(const AccuracyReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["total_score"] = r.total;
  j["final_accuracy"] = r.final_accuracy;
  j["final_accuracy_percent"] = r.final_accuracy * 100.0;
  j["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : r.samples) {
    nlohmann::ordered_json e;
    e["sample_id"] = s.sample_id;
    e["D"] = s.d;
    if (s.adjudicated) {
      e["adjudicated"] = true;
      e["note"] = s.note;
    }
    j["samples"].push_back(std::move(e));
  }
  return j;
}

std::string format_report(const AccuracyReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "samples: %zu\ntotal score T: %.4f\nfinal accuracy: %.1f%%\n", r.n,
                r.total, r.final_accuracy * 100.0);
  std::string out = buf;
  std::size_t adjudicated = 0;
  for (const auto& s : r.samples) adjudicated += s.adjudicated ? 1 : 0;
  if (adjudicated) out += "adjudicated samples: " + std::to_string(adjudicated) + "\n";
  return out;
}

nlohmann::ordered_json combo_to_json(const ComboAnswer& combo) {
  nlohmann::ordered_json j;
  j["entities"] = combo.entities;
  j["effect"] = combo.effect ? to_string(*combo.effect) : "UNKNOWN";
  return j;
}

}  // namespace sfusion
