#include "sfusion/skt.hpp"

#include <algorithm>
#include <regex>

#include "sfusion/io_util.hpp"
#include "sfusion/re_parser.hpp"

namespace sfusion {

namespace {

constexpr std::string_view kEntities = "{entities}";
constexpr std::string_view kEffect = "{effect}";
constexpr std::string_view kModerator = "{moderator}";
constexpr std::string_view kJoiner = " and ";

std::size_t effect_index(RelationLabel label) {
  switch (label) {
    case RelationLabel::POS: return 0;
    case RelationLabel::NEG: return 1;
    case RelationLabel::COMB: return 2;
    case RelationLabel::NO_COMB: break;
  }
  throw DataError("NO_COMB relations have no natural-language form");
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_on(const std::string& text, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto next = text.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(text.substr(pos));
      return out;
    }
    out.push_back(text.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

std::string regex_escape(std::string_view s) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : s) {
    if (kSpecial.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

EntityBase EntityBase::from_sample(const Sample& sample) {
  EntityBase base;
  for (const auto& s : sample.spans) base.entries.emplace(s.span_id, s);
  return base;
}

std::vector<EntityAttributes> map_spans(const StructuredKnowledge& knowledge,
                                        const EntityBase& entities) {
  auto ids = knowledge.relation.spans;
  std::sort(ids.begin(), ids.end());
  std::vector<EntityAttributes> out;
  out.reserve(ids.size());
  for (auto id : ids) {
    auto it = entities.entries.find(id);
    if (it == entities.entries.end()) throw UnresolvedIdentifier(id);
    out.push_back(EntityAttributes{id, it->second.text});
  }
  return out;
}

FactTemplate FactTemplate::for_kind(DatasetKind kind) {
  if (kind == DatasetKind::DCE) {
    return FactTemplate{
        "DCE",
        "{entities} are used in combination, and the effects of the combination are {effect}.",
        {"positive", "negative", "not yet clear"}};
  }
  return FactTemplate{
      "MEE",
      "{moderator} moderates the relationship involving {entities}; the moderating effect {effect}.",
      {"strengthens the main effect", "weakens the main effect", "is undetermined"}};
}

FactTemplate FactTemplate::from_file(const std::filesystem::path& path, DatasetKind kind) {
  auto tmpl = for_kind(kind);
  auto text = read_file(path);
  auto lines = split_lines(text);
  if (lines.empty()) throw DataError(path.string() + ": empty fact template");
  tmpl.pattern = std::string(lines[0]);
  for (std::size_t i = 1; i < lines.size() && i <= 3; ++i) tmpl.effects[i - 1] = trim(lines[i]);
  if (tmpl.pattern.find(kEntities) == std::string::npos ||
      tmpl.pattern.find(kEffect) == std::string::npos) {
    throw DataError(path.string() + ": fact template needs {entities} and {effect}");
  }
  return tmpl;
}

bool FactTemplate::has_moderator() const { return pattern.find(kModerator) != std::string::npos; }

std::string FactTemplate::render(const std::vector<std::string>& entities,
                                 RelationLabel label) const {
  if (entities.size() < 2) throw DataError("a combination needs at least two entities");
  std::string listed, moderator;
  if (has_moderator()) {
    moderator = entities.back();
    listed = join({entities.begin(), entities.end() - 1}, kJoiner);
  } else {
    listed = join(entities, kJoiner);
  }
  const auto& effect = effects[effect_index(label)];

  // Single pass, so entity names are never re-scanned for placeholders.
  std::string out;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    const auto rest = std::string_view(pattern).substr(pos);
    if (rest.starts_with(kEntities)) {
      out += listed;
      pos += kEntities.size();
    } else if (rest.starts_with(kEffect)) {
      out += effect;
      pos += kEffect.size();
    } else if (rest.starts_with(kModerator)) {
      out += moderator;
      pos += kModerator.size();
    } else {
      out.push_back(pattern[pos++]);
    }
  }
  return out;
}

std::optional<FactTemplate::Inverted> FactTemplate::invert(const std::string& text) const {
  // Build an anchored regex from the pattern, one group per placeholder.
  std::string re = "^";
  std::vector<std::string_view> order;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    std::size_t next = std::string::npos;
    std::string_view which;
    for (auto ph : {kEntities, kEffect, kModerator}) {
      auto p = pattern.find(ph, pos);
      if (p < next) {
        next = p;
        which = ph;
      }
    }
    if (next == std::string::npos) {
      re += regex_escape(std::string_view(pattern).substr(pos));
      break;
    }
    re += regex_escape(std::string_view(pattern).substr(pos, next - pos));
    if (which == kEffect) {
      re += "(" + regex_escape(effects[0]) + "|" + regex_escape(effects[1]) + "|" +
            regex_escape(effects[2]) + ")";
    } else {
      re += "(.+?)";
    }
    order.push_back(which);
    pos = next + which.size();
  }
  re += "$";

  std::smatch m;
  if (!std::regex_match(text, m, std::regex(re))) return std::nullopt;
  Inverted out{{}, RelationLabel::POS};
  std::string moderator;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string g = m[i + 1].str();
    if (order[i] == kEffect) {
      for (std::size_t e = 0; e < 3; ++e) {
        if (g == effects[e]) out.label = kAllLabels[e];
      }
    } else if (order[i] == kModerator) {
      moderator = g;
    } else {
      out.entities = split_on(g, kJoiner);
    }
  }
  if (has_moderator()) out.entities.push_back(moderator);
  return out;
}

NaturalFact integrate(const std::vector<EntityAttributes>& entities, RelationLabel label,
                      const FactTemplate& context) {
  if (entities.size() < 2) throw DataError("a combination needs at least two entities");
  if (label == RelationLabel::NO_COMB) throw DataError("NO_COMB relations produce no fact");
  std::vector<std::string> names;
  names.reserve(entities.size());
  for (const auto& e : entities) names.push_back(e.text);
  NaturalFact fact;
  fact.text = context.render(names, label);
  fact.context = context.name;
  return fact;
}

std::vector<NaturalFact> transform_corpus(const Predictions& extractions, const Corpus& corpus,
                                          const FactTemplate& context) {
  std::vector<NaturalFact> facts;
  for (const auto& sample : corpus.samples) {
    auto it = extractions.find(sample.id);
    if (it == extractions.end()) continue;
    auto relations = it->second;
    std::stable_sort(relations.begin(), relations.end(),
                     [](const Relation& a, const Relation& b) { return a.spans < b.spans; });
    const auto base = EntityBase::from_sample(sample);
    for (const auto& rel : relations) {
      if (rel.label == RelationLabel::NO_COMB) continue;
      try {
        auto fact = integrate(map_spans({rel, sample.id}, base), rel.label, context);
        fact.sample_id = sample.id;
        fact.source_relation = rel;
        facts.push_back(std::move(fact));
      } catch (const DataError& e) {
        throw DataError("sample '" + sample.id + "': " + e.what());
      }
    }
  }
  return facts;
}

std::string structured_form(const NaturalFact& fact) {
  return serialize_relations({fact.source_relation});
}

nlohmann::ordered_json fact_to_json(const NaturalFact& fact) {
  nlohmann::ordered_json j;
  j["sample_id"] = fact.sample_id;
  j["text"] = fact.text;
  j["structured"] = structured_form(fact);
  j["context"] = fact.context;
  return j;
}

NaturalFact fact_from_json(const nlohmann::ordered_json& j) {
  NaturalFact f;
  try {
    f.sample_id = j.at("sample_id").get<std::string>();
    f.text = j.at("text").get<std::string>();
    f.context = j.value("context", "");
  } catch (const nlohmann::ordered_json::exception& e) {
    throw DataError(std::string("malformed fact record: ") + e.what());
  }
  auto rels = parse_relations_unchecked(j.value("structured", ""));
  if (rels.relations.size() != 1) throw DataError("fact record must carry exactly one relation");
  f.source_relation = rels.relations.front();
  return f;
}

}  // namespace sfusion
