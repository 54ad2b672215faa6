#pragma once

#include "attsync/state.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace attsync {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// `t,agent,x1,x2,x3,norm`, one row per agent per sample, agents 1-based.
std::string trajectory_csv(const SimResult& r);

/// `t,V1,V2,V3,disagreement,max_norm`, one row per sample.
std::string channels_csv(const SimResult& r);

}  // namespace attsync
