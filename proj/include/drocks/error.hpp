#pragma once

#include <stdexcept>
#include <string>

namespace drocks {

enum class errc {
  invalid_input,
  invalid_config,
  protocol_error,
  format_error,
  unsupported_dataset,
  unsupported_task,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::invalid_input: return "InvalidInput";
    case errc::invalid_config: return "InvalidConfig";
    case errc::protocol_error: return "ProtocolError";
    case errc::format_error: return "FormatError";
    case errc::unsupported_dataset: return "UnsupportedDataset";
    case errc::unsupported_task: return "UnsupportedTask";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// that callers (the CLI in particular) can map it to an exit status.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace drocks
