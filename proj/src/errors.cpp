#include "tvbg/errors.hpp"

#include <utility>

namespace tvbg {
namespace {

std::string join(const std::vector<Violation>& violations) {
  std::string text = "invalid parameters:";
  for (const auto& v : violations) {
    text += " ";
    text += v.message;
    text += ";";
  }
  return text;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

FormatError::FormatError(const std::string& message, std::size_t row, std::size_t column)
    : Error(message), row_(row), column_(column) {}

}  // namespace tvbg
