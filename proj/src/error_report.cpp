#include "sfusion/error_report.hpp"

#include <cstdio>

namespace sfusion {

const char* to_string(ErrorType type) {
  switch (type) {
    case ErrorType::NoAnswer: return "No Answers";
    case ErrorType::Contradiction: return "Contradiction";
    case ErrorType::WrongEffect: return "Error";
    case ErrorType::Omission: return "Omissions";
  }
  return "?";
}

ErrorSet classify(const std::vector<ComboAnswer>& standards,
                  const std::vector<ComboAnswer>& generated) {
  if (generated.empty()) return {ErrorType::NoAnswer};
  ErrorSet out;
  if (standards.empty()) return out;

  const auto score = sample_score(standards, generated);
  bool any_paired = false, any_unpaired = false;
  for (std::size_t s = 0; s < standards.size(); ++s) {
    if (!score.paired_with[s]) {
      any_unpaired = true;
      continue;
    }
    any_paired = true;
    const auto& gen = generated[*score.paired_with[s]];
    if (gen.effect != standards[s].effect) out.insert(ErrorType::WrongEffect);
    for (const auto& other : generated) {
      if (other.entities == gen.entities && other.effect && gen.effect &&
          *other.effect != *gen.effect) {
        out.insert(ErrorType::Contradiction);
        break;
      }
    }
  }
  if (any_paired && any_unpaired) out.insert(ErrorType::Omission);
  return out;
}

ErrorDistribution distribution(const std::vector<ErrorSet>& classifications, std::size_t n) {
  ErrorDistribution out{};
  if (n == 0) throw DataError("error distribution over zero samples");
  for (std::size_t t = 0; t < 4; ++t) {
    std::size_t count = 0;
    for (const auto& c : classifications) count += c.count(kAllErrorTypes[t]);
    out[t] = 100.0 * static_cast<double>(count) / static_cast<double>(n);
  }
  return out;
}

nlohmann::ordered_json to_json(const std::vector<ErrorTableRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["dataset"] = r.dataset;
    j["method"] = r.method;
    j["no_answers"] = r.percent[0];
    j["contradiction"] = r.percent[1];
    j["error"] = r.percent[2];
    j["omissions"] = r.percent[3];
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string format_error_table(const std::vector<ErrorTableRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %-8s %-18s %10s %13s %6s %9s\n", "Model", "Dataset",
                "Method", "No Answers", "Contradiction", "Error", "Omissions");
  std::string out = buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-20s %-8s %-18s %10.1f %13.1f %6.1f %9.1f\n",
                  r.model.c_str(), r.dataset.c_str(), r.method.c_str(), r.percent[0],
                  r.percent[1], r.percent[2], r.percent[3]);
    out += buf;
  }
  return out;
}

}  // namespace sfusion
