#pragma once

#include <optional>
#include <string>

#include "mfbs/manifest.hpp"

namespace mfbs {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunOptions {
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads;
    bool verbose = false;
};

/// Executes the experiment named by the manifest and writes its artifacts
/// (manifest copy, version stamp, binary fields, CSV tables, SVG plots) into
/// the output directory. Returns that directory. Throws on failure; the CLI
/// maps exception families to exit codes.
std::string run_experiment(const Manifest& manifest, const RunOptions& options);

}  // namespace mfbs
