#include "rlp/error.hpp"

namespace rlp {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::data: return "data";
    case ErrorKind::schema: return "schema";
    case ErrorKind::parse: return "parse";
    case ErrorKind::format: return "format";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::exhaustion: return "exhaustion";
    case ErrorKind::degenerate_split: return "degenerate_split";
    case ErrorKind::config: return "config";
    case ErrorKind::verification: return "verification";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::exhaustion:
      return 1;
    case ErrorKind::data:
    case ErrorKind::schema:
    case ErrorKind::parse:
    case ErrorKind::format:
    case ErrorKind::degenerate_split:
      return 2;
    case ErrorKind::shape:
    case ErrorKind::numeric:
      return 3;
    case ErrorKind::verification:
      return 4;
  }
  return 3;
}

}  // namespace rlp
