#include "log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace p2p::detail {

namespace {

int level() {
    static const int lvl = [] {
        const char* env = std::getenv("P2P_LOG");
        if (env == nullptr) return 0;
        if (std::strcmp(env, "debug") == 0) return 2;
        if (std::strcmp(env, "info") == 0) return 1;
        return 0;
    }();
    return lvl;
}

}  // namespace

bool log_enabled(bool debug) { return level() >= (debug ? 2 : 1); }

void log_info(const std::string& message) {
    if (log_enabled(false)) std::fprintf(stderr, "[p2p] %s\n", message.c_str());
}

void log_debug(const std::string& message) {
    if (log_enabled(true)) std::fprintf(stderr, "[p2p:debug] %s\n", message.c_str());
}

}  // namespace p2p::detail
