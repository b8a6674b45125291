#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace darkpool {

using Timestamp = std::chrono::sys_seconds;
using Days = std::chrono::days;

// "2024-01-31T12:00:00Z"
std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view text);

// Clocks are injected everywhere a timestamp is recorded so that runs with a
// fixed clock produce identical artifacts.
using Clock = std::function<Timestamp()>;

Clock system_clock();
Clock fixed_clock(Timestamp t);

}  // namespace darkpool
