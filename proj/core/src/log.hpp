#pragma once

#include <string>

namespace p2p::detail {

// Diagnostics controlled by P2P_LOG=info|debug; everything goes to stderr so
// stdout stays data-only.
bool log_enabled(bool debug);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace p2p::detail
