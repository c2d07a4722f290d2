#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfusion/qa_eval.hpp"

namespace sfusion {

enum class ErrorType { NoAnswer, Contradiction, WrongEffect, Omission };

inline constexpr ErrorType kAllErrorTypes[] = {ErrorType::NoAnswer, ErrorType::Contradiction,
                                               ErrorType::WrongEffect, ErrorType::Omission};

const char* to_string(ErrorType type);

using ErrorSet = std::set<ErrorType>;

/// Failure types exhibited by one answer. A sample may carry several.
///  - NoAnswer: nothing was generated (this excludes the other three).
///  - Contradiction: a generated combination paired with a standard is also
///    given a different effect elsewhere in the answer.
///  - WrongEffect: a paired combination states an effect other than the
///    standard's, or none.
///  - Omission: a standard combination went unpaired while another was paired.
ErrorSet classify(const std::vector<ComboAnswer>& standards,
                  const std::vector<ComboAnswer>& generated);

// Percent of `n` samples exhibiting each type, indexed like kAllErrorTypes.
using ErrorDistribution = std::array<double, 4>;

ErrorDistribution distribution(const std::vector<ErrorSet>& classifications, std::size_t n);

struct ErrorTableRow {
  std::string model;
  std::string dataset;
  std::string method;
  ErrorDistribution percent{};
};

nlohmann::ordered_json to_json(const std::vector<ErrorTableRow>& rows);
std::string format_error_table(const std::vector<ErrorTableRow>& rows);

}  // namespace sfusion
