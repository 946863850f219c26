#include "fpphe/error.hpp"

namespace fpphe {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::unstable: return "unstable";
    case ErrorKind::resource_limit: return "resource-limit";
    case ErrorKind::exhausted: return "exhausted";
  }
  return "unknown";
}

}  // namespace fpphe
