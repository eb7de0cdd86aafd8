#pragma once

#include <string>
#include <vector>

namespace spectralseq {

/// SPECTRALSEQ_DATA_DIR, or "." when unset.
std::string default_data_dir();

/// Conventional dataset location for a case/grid pair under the data dir.
std::string dataset_default_path(const std::string& case_name, std::size_t grid_n);

/// Full CLI entry point (args = argv without the program name). Returns the
/// process exit code: 0 ok, 1 usage, 2 config/data errors, 3 numerics abort.
int run_cli(std::vector<std::string> args);

} // namespace spectralseq
