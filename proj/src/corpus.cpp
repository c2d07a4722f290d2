#include "sfusion/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "sfusion/io_util.hpp"

namespace sfusion {

using ojson = nlohmann::ordered_json;

const char* to_string(DatasetKind kind) {
  return kind == DatasetKind::DCE ? "DCE" : "MEE";
}

DatasetKind parse_dataset_kind(std::string_view text) {
  auto lower = to_lower_ascii(text);
  if (lower == "dce") return DatasetKind::DCE;
  if (lower == "mee") return DatasetKind::MEE;
  throw UsageError("unknown dataset kind '" + std::string(text) + "' (expected DCE or MEE)");
}

const char* to_string(RelationLabel label) {
  switch (label) {
    case RelationLabel::POS: return "POS";
    case RelationLabel::NEG: return "NEG";
    case RelationLabel::COMB: return "COMB";
    case RelationLabel::NO_COMB: return "NO_COMB";
  }
  return "?";
}

std::optional<RelationLabel> parse_label(std::string_view text) {
  for (auto label : kAllLabels) {
    if (text == to_string(label)) return label;
  }
  return std::nullopt;
}

Relation make_relation(RelationLabel label, std::vector<SpanId> spans,
                       std::optional<bool> is_context_needed) {
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
  return Relation{label, std::move(spans), is_context_needed};
}

const SpanMention* Sample::find_span(SpanId id) const {
  for (const auto& s : spans) {
    if (s.span_id == id) return &s;
  }
  return nullptr;
}

const Sample* Corpus::find(std::string_view id) const {
  for (const auto& s : samples) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

void validate_sample(const Sample& sample, const std::string& where) {
  if (sample.sentence.empty()) throw DataError(where + ": empty sentence");
  if (sample.paragraph.empty()) throw DataError(where + ": empty paragraph");
  std::unordered_set<SpanId> ids;
  for (const auto& span : sample.spans) {
    if (span.span_id < 0) throw DataError(where + ": negative span_id");
    if (!ids.insert(span.span_id).second) {
      throw DataError(where + ": duplicate span_id " + std::to_string(span.span_id));
    }
    if (span.start && span.end && *span.start > *span.end) {
      throw DataError(where + ": span " + std::to_string(span.span_id) + " has start > end");
    }
    if (span.token_start && span.token_end && *span.token_start > *span.token_end) {
      throw DataError(where + ": span " + std::to_string(span.span_id) +
                      " has token_start > token_end");
    }
  }
  for (const auto& rel : sample.gold) {
    if (rel.spans.size() < 2) throw DataError(where + ": gold relation with fewer than 2 spans");
    for (auto id : rel.spans) {
      if (!ids.count(id)) {
        throw DataError(where + ": gold relation references unknown span_id " +
                        std::to_string(id));
      }
    }
  }
}

namespace {

std::optional<std::int64_t> opt_int(const ojson& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw DataError(where + ": '" + key + "' must be an integer");
  return it->get<std::int64_t>();
}

const std::string& require_string(const ojson& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(where + ": missing '" + key + "'");
  if (!it->is_string()) throw DataError(where + ": '" + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

// Some exports store list fields as JSON text; accept both shapes.
ojson as_array(const ojson& value, const std::string& where, const char* key) {
  if (value.is_array()) return value;
  if (value.is_string()) {
    auto parsed = ojson::parse(value.get<std::string>(), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) return parsed;
  }
  throw DataError(where + ": '" + key + "' must be a list");
}

const std::set<std::string> kKnownKeys = {"id", "sentence", "result", "spans", "paragraph", "gold"};

}  // namespace

Relation relation_from_json(const ojson& obj, const std::string& where) {
  if (!obj.is_object()) throw DataError(where + ": relation must be an object");
  const auto& cls = require_string(obj, "class", where);
  auto label = parse_label(cls);
  if (!label) throw DataError(where + ": unknown label '" + cls + "'");
  auto it = obj.find("spans");
  if (it == obj.end() || !it->is_array()) throw DataError(where + ": relation spans must be a list");
  std::vector<SpanId> spans;
  for (const auto& v : *it) {
    if (!v.is_number_integer()) throw DataError(where + ": relation spans must be integers");
    spans.push_back(v.get<SpanId>());
  }
  std::optional<bool> ctx;
  if (auto c = obj.find("is_context_needed"); c != obj.end() && !c->is_null()) {
    if (!c->is_boolean()) throw DataError(where + ": is_context_needed must be a boolean");
    ctx = c->get<bool>();
  }
  return make_relation(*label, std::move(spans), ctx);
}

ojson relation_to_json(const Relation& rel) {
  ojson obj = ojson::object();
  obj["class"] = to_string(rel.label);
  obj["spans"] = rel.spans;
  if (rel.is_context_needed) obj["is_context_needed"] = *rel.is_context_needed;
  return obj;
}

Sample sample_from_json(const ojson& record, DatasetKind kind, std::size_t index) {
  const std::string where = "record " + std::to_string(index);
  if (!record.is_object()) throw DataError(where + ": not an object");
  Sample sample;

  if (auto it = record.find("id"); it != record.end()) {
    if (it->is_string()) {
      sample.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      sample.id = std::to_string(it->get<std::int64_t>());
    } else {
      throw DataError(where + ": 'id' must be a string or integer");
    }
  } else {
    sample.id = std::to_string(index);
  }

  if (record.contains("sentence")) {
    sample.sentence = require_string(record, "sentence", where);
  } else if (kind == DatasetKind::MEE && record.contains("result")) {
    sample.sentence = require_string(record, "result", where);
    sample.sentence_key = "result";
  } else {
    throw DataError(where + ": missing 'sentence'");
  }
  sample.paragraph = require_string(record, "paragraph", where);

  auto spans_it = record.find("spans");
  if (spans_it == record.end()) throw DataError(where + ": missing 'spans'");
  for (const auto& s : as_array(*spans_it, where, "spans")) {
    if (!s.is_object()) throw DataError(where + ": span entries must be objects");
    SpanMention m;
    auto id = opt_int(s, "span_id", where);
    if (!id) throw DataError(where + ": span without span_id");
    m.span_id = *id;
    m.text = require_string(s, "text", where);
    m.start = opt_int(s, "start", where);
    m.end = opt_int(s, "end", where);
    m.token_start = opt_int(s, "token_start", where);
    m.token_end = opt_int(s, "token_end", where);
    sample.spans.push_back(std::move(m));
  }

  if (auto g = record.find("gold"); g != record.end() && !g->is_null()) {
    for (const auto& r : as_array(*g, where, "gold")) {
      sample.gold.push_back(relation_from_json(r, where));
    }
  }

  for (auto it = record.begin(); it != record.end(); ++it) {
    if (!kKnownKeys.count(it.key()) ||
        (it.key() == "result" && sample.sentence_key != "result")) {
      sample.extras[it.key()] = it.value();
    }
  }

  validate_sample(sample, where);
  return sample;
}

ojson sample_to_json(const Sample& sample) {
  ojson obj = ojson::object();
  obj["id"] = sample.id;
  obj[sample.sentence_key] = sample.sentence;
  ojson spans = ojson::array();
  for (const auto& s : sample.spans) {
    ojson js = ojson::object();
    js["span_id"] = s.span_id;
    js["text"] = s.text;
    if (s.start) js["start"] = *s.start;
    if (s.end) js["end"] = *s.end;
    if (s.token_start) js["token_start"] = *s.token_start;
    if (s.token_end) js["token_end"] = *s.token_end;
    spans.push_back(std::move(js));
  }
  obj["spans"] = std::move(spans);
  obj["paragraph"] = sample.paragraph;
  ojson gold = ojson::array();
  for (const auto& r : sample.gold) gold.push_back(relation_to_json(r));
  obj["gold"] = std::move(gold);
  for (auto it = sample.extras.begin(); it != sample.extras.end(); ++it) {
    obj[it.key()] = it.value();
  }
  return obj;
}

Corpus parse_corpus(std::string_view text, DatasetKind kind) {
  Corpus corpus;
  corpus.kind = kind;

  std::vector<ojson> records;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') {
    auto doc = ojson::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) throw DataError("dataset is not a valid JSON array");
    records.assign(doc.begin(), doc.end());
  } else {
    std::size_t line_no = 0;
    for (auto line : split_lines(text)) {
      auto doc = ojson::parse(line, nullptr, false);
      if (doc.is_discarded()) {
        throw DataError("record " + std::to_string(line_no) + ": malformed JSON");
      }
      records.push_back(std::move(doc));
      ++line_no;
    }
  }

  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto sample = sample_from_json(records[i], kind, i);
    if (!ids.insert(sample.id).second) {
      throw DataError("record " + std::to_string(i) + ": duplicate sample id '" + sample.id + "'");
    }
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, DatasetKind kind) {
  return parse_corpus(read_file(path), kind);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.samples) {
    out += sample_to_json(s).dump(-1, ' ', false);
    out += '\n';
  }
  return out;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction,
                                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = corpus.samples.size();
  if (n == 0) throw DataError("cannot split an empty corpus");
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test == n) {
    throw UsageError("test fraction " + std::to_string(test_fraction) + " leaves an empty side for " +
                     std::to_string(n) + " samples");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  seeded_shuffle(order, rng);
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  Corpus train{corpus.kind, {}}, test{corpus.kind, {}};
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? test : train).samples.push_back(corpus.samples[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace sfusion
