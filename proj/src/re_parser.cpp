#include "sfusion/re_parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "json.hpp"

namespace sfusion {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::NoList: return "no bracketed list found";
    case ParseErrorKind::UnknownLabel: return "unknown class label";
    case ParseErrorKind::BadSpans: return "spans not a list of integers";
    case ParseErrorKind::TooFewSpans: return "relation has fewer than two spans";
    case ParseErrorKind::UnresolvedSpan: return "span id unresolvable in sample";
  }
  return "parse error";
}

namespace {

using json = nlohmann::json;

constexpr int kMaxDepth = 64;

// Recursive-descent reader for the JSON dialect models actually emit.
class LenientReader {
 public:
  LenientReader(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

  std::optional<json> read_value(int depth = 0) {
    if (depth > kMaxDepth) return std::nullopt;
    skip_ws();
    if (pos_ >= text_.size()) return std::nullopt;
    char c = text_[pos_];
    if (c == '[') return read_array(depth);
    if (c == '{') return read_object(depth);
    if (c == '"' || c == '\'') {
      auto s = read_string();
      if (!s) return std::nullopt;
      return json(std::move(*s));
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return read_number();
    return read_literal();
  }

  std::size_t pos() const { return pos_; }
  bool single_quotes = false;
  bool boolean_casing = false;
  bool trailing_comma = false;

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<json> read_array(int depth) {
    ++pos_;  // '['
    json arr = json::array();
    if (consume(']')) return arr;
    while (true) {
      auto v = read_value(depth + 1);
      if (!v) return std::nullopt;
      arr.push_back(std::move(*v));
      if (consume(']')) return arr;
      if (!consume(',')) return std::nullopt;
      if (consume(']')) {
        trailing_comma = true;
        return arr;
      }
    }
  }

  std::optional<json> read_object(int depth) {
    ++pos_;  // '{'
    json obj = json::object();
    if (consume('}')) return obj;
    while (true) {
      skip_ws();
      if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) return std::nullopt;
      auto key = read_string();
      if (!key || !consume(':')) return std::nullopt;
      auto v = read_value(depth + 1);
      if (!v) return std::nullopt;
      obj[*key] = std::move(*v);
      if (consume('}')) return obj;
      if (!consume(',')) return std::nullopt;
      if (consume('}')) {
        trailing_comma = true;
        return obj;
      }
    }
  }

  std::optional<std::string> read_string() {
    const char quote = text_[pos_++];
    if (quote == '\'') single_quotes = true;
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == quote) return out;
      if (c == '\n') return std::nullopt;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) return std::nullopt;
      char e = text_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'u': {
          if (pos_ + 4 > text_.size()) return std::nullopt;
          unsigned cp = 0;
          for (int i = 0; i < 4; ++i) {
            char h = text_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= static_cast<unsigned>(h - '0');
            else if (h >= 'a' && h <= 'f') cp |= static_cast<unsigned>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') cp |= static_cast<unsigned>(h - 'A' + 10);
            else return std::nullopt;
          }
          append_utf8(out, cp);
          break;
        }
        default: out.push_back(e); break;  // \" \' \\ \/ and stray escapes such as \_
      }
    }
    return std::nullopt;
  }

  static void append_utf8(std::string& out, unsigned cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::optional<json> read_number() {
    const std::size_t start = pos_;
    if (text_[pos_] == '-') ++pos_;
    const std::size_t digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits) return std::nullopt;
    bool integral = true;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      integral = false;
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      integral = false;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    auto token = std::string(text_.substr(start, pos_ - start));
    if (integral && pos_ - digits <= 18) return json(std::stoll(token));
    try {
      return json(std::stod(token));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  std::optional<json> read_literal() {
    struct Lit {
      std::string_view word;
      json value;
      bool recased;
    };
    static const Lit kLits[] = {
        {"true", true, false},  {"false", false, false}, {"null", nullptr, false},
        {"True", true, true},   {"False", false, true},  {"None", nullptr, true},
    };
    for (const auto& lit : kLits) {
      if (text_.substr(pos_, lit.word.size()) == lit.word) {
        const std::size_t after = pos_ + lit.word.size();
        if (after < text_.size() && std::isalnum(static_cast<unsigned char>(text_[after]))) continue;
        pos_ = after;
        if (lit.recased) boolean_casing = true;
        return lit.value;
      }
    }
    return std::nullopt;
  }

  std::string_view text_;
  std::size_t pos_;
};

struct Candidate {
  std::size_t begin = 0;
  std::size_t end = 0;
  json list;
  bool single_quotes = false;
  bool boolean_casing = false;
  bool trailing_comma = false;
};

bool is_relation_list(const json& v) {
  if (!v.is_array()) return false;
  return std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_object(); });
}

std::optional<Candidate> find_list(std::string_view text, std::size_t from) {
  for (auto p = text.find('[', from); p != std::string_view::npos; p = text.find('[', p + 1)) {
    LenientReader reader(text, p);
    auto v = reader.read_value();
    if (v && is_relation_list(*v)) {
      return Candidate{p, reader.pos(), std::move(*v), reader.single_quotes,
                       reader.boolean_casing, reader.trailing_comma};
    }
  }
  return std::nullopt;
}

bool has_non_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return !std::isspace(static_cast<unsigned char>(c)); });
}

void add_warning(std::vector<std::string>& warnings, std::string_view w) {
  if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.emplace_back(w);
}

Relation to_relation(const json& obj, std::vector<std::string>& warnings) {
  auto cls = obj.find("class");
  if (cls == obj.end() || !cls->is_string()) {
    throw ParseError(ParseErrorKind::UnknownLabel, "relation without a string \"class\"");
  }
  auto label = parse_label(cls->get<std::string>());
  if (!label) throw ParseError(ParseErrorKind::UnknownLabel, "'" + cls->get<std::string>() + "'");

  auto sp = obj.find("spans");
  if (sp == obj.end() || !sp->is_array()) {
    throw ParseError(ParseErrorKind::BadSpans, "\"spans\" missing or not a list");
  }
  std::vector<SpanId> spans;
  for (const auto& v : *sp) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ParseError(ParseErrorKind::BadSpans, "non-integer span id " + v.dump());
    }
    spans.push_back(v.get<SpanId>());
  }

  std::optional<bool> ctx;
  bool unknown = false;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.key() == "class" || it.key() == "spans") continue;
    if (it.key() == "is_context_needed" && it->is_boolean()) {
      ctx = it->get<bool>();
    } else if (!(it.key() == "is_context_needed" && it->is_null())) {
      unknown = true;
    }
  }
  if (unknown) add_warning(warnings, warning::kUnknownKeys);

  auto rel = make_relation(*label, std::move(spans), ctx);
  if (rel.spans.size() < 2) {
    throw ParseError(ParseErrorKind::TooFewSpans, std::to_string(rel.spans.size()) + " span(s)");
  }
  return rel;
}

}  // namespace

RawExtraction parse_relations_unchecked(std::string_view text) {
  RawExtraction out;
  out.source_text = std::string(text);
  auto cand = find_list(text, 0);
  if (!cand) throw ParseError(ParseErrorKind::NoList, "expected a list such as []");

  if (has_non_space(text.substr(0, cand->begin)) || has_non_space(text.substr(cand->end))) {
    add_warning(out.warnings, warning::kSurroundingProse);
  }
  if (cand->single_quotes) add_warning(out.warnings, warning::kSingleQuotes);
  if (cand->boolean_casing) add_warning(out.warnings, warning::kBooleanCasing);
  if (cand->trailing_comma) add_warning(out.warnings, "trailing comma removed");
  if (find_list(text, cand->end)) add_warning(out.warnings, warning::kLaterLists);

  for (const auto& obj : cand->list) out.relations.push_back(to_relation(obj, out.warnings));
  return out;
}

RawExtraction parse_relations(std::string_view text, const Sample& sample) {
  auto out = parse_relations_unchecked(text);
  for (const auto& rel : out.relations) {
    for (auto id : rel.spans) {
      if (!sample.find_span(id)) {
        throw ParseError(ParseErrorKind::UnresolvedSpan,
                         "span " + std::to_string(id) + " in sample '" + sample.id + "'");
      }
    }
  }
  return out;
}

std::string serialize_relations(const std::vector<Relation>& relations) {
  std::string out = "[";
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const auto& r = relations[i];
    if (i) out += ", ";
    out += "{\"class\": \"";
    out += to_string(r.label);
    out += "\", \"spans\": [";
    for (std::size_t j = 0; j < r.spans.size(); ++j) {
      if (j) out += ", ";
      out += std::to_string(r.spans[j]);
    }
    out += "]";
    if (r.is_context_needed) {
      out += ", \"is_context_needed\": ";
      out += *r.is_context_needed ? "true" : "false";
    }
    out += "}";
  }
  out += "]";
  return out;
}

}  // namespace sfusion
