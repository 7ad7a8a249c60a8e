#pragma once

#include <string>

#include "abba/advisor/advisor.hpp"

namespace abba::advisor {

inline constexpr const char* kSnapshotFormat = "abba-advisor-snapshot";
inline constexpr int kSnapshotVersion = 1;

/// Field-named JSON document holding everything needed to resume an advisor:
/// configuration, therapy profile, and every controller's actor, critic and
/// pending decision. Layout documented in docs/advisor-snapshot.md.
std::string save_snapshot(const AdvisorState& state);

/// Inverse of save_snapshot. Throws std::invalid_argument on an unknown format
/// or version, a missing field, or values that violate the state invariants.
AdvisorState load_snapshot(const std::string& text);

}  // namespace abba::advisor
