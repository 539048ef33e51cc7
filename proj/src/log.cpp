#include "drive/log.hpp"

#include <iostream>

namespace drive {

namespace {
WarnSink g_sink;
}

void set_warn_sink(WarnSink sink) { g_sink = std::move(sink); }

void warn(const std::string& message) {
    if (g_sink) {
        g_sink(message);
    } else {
        std::cerr << "[warn] " << message << "\n";
    }
}

}  // namespace drive
