#include "psrlab/tolerances.hpp"

#include <cstdlib>
#include <string>

#include "psrlab/errors.hpp"

namespace psrlab {

std::size_t enumeration_budget() {
  if (const char* env = std::getenv("PSRLAB_BUDGET"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultEnumerationBudget;
}

void check_budget(double count, std::size_t budget, const char* what) {
  if (count > static_cast<double>(budget)) {
    throw BudgetExceeded(std::string(what) + " needs " + std::to_string(static_cast<long double>(count)) +
                         " items, budget is " + std::to_string(budget));
  }
}

}  // namespace psrlab
