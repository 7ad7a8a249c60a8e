#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abba/link/message.hpp"

namespace abba::link {

struct DemoOptions {
    double drop_rate = 0.0;
    std::uint64_t seed = 1;
    /// AF_UNIX path; the in-process loopback is used when empty.
    std::string address;
    int max_rounds = 200;
};

struct DemoResult {
    std::vector<Message> pump_history;     // sorted by (sender, seq)
    std::vector<Message> advisor_history;  // sorted by (sender, seq)
    bool converged = false;
    int rounds = 0;
    std::size_t dropped = 0;
    std::size_t corrupt = 0;
};

/// A pump thread replays one simulated day (basal rate, SMBG readings, meal
/// announcements, boluses) to an advisor thread, which answers the first sync
/// request with a TherapyUpdate from a real advisor. The pump then runs sync
/// rounds until both histories agree.
DemoResult run_pump_link_demo(const DemoOptions& options);

/// "<sender> #<seq> <kind> <body>" for printing.
std::string describe(const Message& msg);

}  // namespace abba::link
