#pragma once

#include "birkhoff/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace birkhoff {

inline constexpr int kExitPass = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

const std::vector<std::string>& subcommands();

/// Runs one subcommand, writing artifacts under `out_dir` and progress to
/// `log`. Configuration problems return kExitConfig with a message on `log`.
int run(const std::string& subcommand, const RunConfig& cfg, const std::string& out_dir, std::ostream& log);

}  // namespace birkhoff
