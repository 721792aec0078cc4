#pragma once

#include <string>
#include <string_view>

namespace natprog {

std::string sha256_hex(std::string_view data);

// Whole file as bytes; throws std::runtime_error when unreadable.
std::string read_file(const std::string& path);

// Atomic write: temp file in the same directory, then rename over path.
void write_file_atomic(const std::string& path, std::string_view data);

}  // namespace natprog
