#pragma once

#include <stdexcept>
#include <string>

namespace mosaic {

// Diagnostic codes surfaced by the CLI as module-qualified diagnostics.
enum class errc {
  dim_mismatch,
  cannot_split,
  parse_error,
  shape_mismatch,
  bad_action_index,
  bad_precision,
  bad_probability,
  bad_distribution,
  choice_on_fail_state,
  not_layered,
  malformed_model,
  no_initial_states,
  uncovered,
  bad_bins,
  memory_guard,
  io_error,
  domain,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::dim_mismatch: return "DimMismatch";
    case errc::cannot_split: return "CannotSplit";
    case errc::parse_error: return "ParseError";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::bad_action_index: return "BadActionIndex";
    case errc::bad_precision: return "BadPrecision";
    case errc::bad_probability: return "BadProbability";
    case errc::bad_distribution: return "BadDistribution";
    case errc::choice_on_fail_state: return "ChoiceOnFailState";
    case errc::not_layered: return "NotLayered";
    case errc::malformed_model: return "MalformedModel";
    case errc::no_initial_states: return "NoInitialStates";
    case errc::uncovered: return "Uncovered";
    case errc::bad_bins: return "BadBins";
    case errc::memory_guard: return "MemoryGuard";
    case errc::io_error: return "IoError";
    case errc::domain: return "Domain";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, std::string module, const std::string& message)
      : std::runtime_error("[" + module + "/" + errc_name(code) + "] " + message),
        code_(code),
        module_(std::move(module)) {}

  errc code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  errc code_;
  std::string module_;
};

[[noreturn]] inline void fail(errc code, const std::string& module, const std::string& message) {
  throw Error(code, module, message);
}

}  // namespace mosaic
