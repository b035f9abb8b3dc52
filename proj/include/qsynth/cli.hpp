#pragma once
// Command-line surface: one scenario per process invocation, static
// validation with module-level messages, and deterministic JSON/CSV
// artifacts under --out.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qsynth {

struct RunConfig {
  std::string subcommand;  // shor | hsp | dimer | pentamer | wire | schmidt
  std::optional<std::uint64_t> seed;
  std::optional<std::string> script;  // "w=4,v=12" or ';'-joined passes
  std::string config_path;            // --config scenario file
  std::string output_dir = ".";
  std::string format = "json";  // json | csv | both
  std::size_t trials = 1;

  // shor
  std::size_t n = 0;
  std::size_t a = 0;

  // hsp template
  std::string kind;    // deutsch | deutsch_jozsa/dj | bernstein_vazirani/bv | simon
  std::size_t q = 0;   // input register width (derived from --secret/--table when 0)
  std::string secret;  // bitstring, most significant bit first
  std::string table;   // comma-separated f values for the deutsch family

  // waterwire family / schmidt
  std::optional<std::size_t> modes;       // wire mode count
  std::optional<std::size_t> measured_k;  // overrides the config's value
  std::optional<std::size_t> cut;         // schmidt bipartition
};

// Full static validation, including config-file parsing and the module
// precondition messages. An empty list means the config is runnable.
std::vector<std::string> validate(const RunConfig& config);

// Runs the scenario and writes transcript.json and/or CSV tables under
// output_dir. Returns 0 on success, 2 on validation/config errors, 3 on
// algorithmic failure (diagnostics go to stderr). Identical (config, seed)
// pairs produce byte-identical artifacts.
int run(const RunConfig& config);

// CLI11 argument grammar over run(); returns the process exit status.
int cli_main(int argc, const char* const* argv);

}  // namespace qsynth
