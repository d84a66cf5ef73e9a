#pragma once

// Output formatting and atomic file helpers shared by the CLI and tests.

#include <filesystem>
#include <string>
#include <string_view>

namespace impa {

// Decimal representation with 12 significant digits (CSV convention).
std::string format_g12(double value);

// Shortest representation that round-trips the double exactly (config files).
std::string format_exact(double value);

// Write-temp-then-rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace impa
