#pragma once

#include <string>

namespace shufflebench {

// Shortest round-trip decimal form (to_chars); locale-independent, so CSV
// output is byte-stable across runs and machines.
std::string format_double(double v);

// Writes content to path via a temp file + rename, creating parent
// directories as needed.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace shufflebench
