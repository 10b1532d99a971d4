#include "dnp/errors.hpp"

namespace dnp {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return 1;
    case ErrorKind::config_syntax: return 2;
    case ErrorKind::config_unknown_key: return 3;
    case ErrorKind::config_value: return 4;
    case ErrorKind::degeneracy: return 5;
    case ErrorKind::fit_failure: return 6;
    case ErrorKind::domain: return 7;
    case ErrorKind::calibration: return 8;
    case ErrorKind::io: return 9;
  }
  return 1;
}

}  // namespace dnp
