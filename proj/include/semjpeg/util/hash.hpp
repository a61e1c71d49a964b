#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semjpeg {

std::string sha256_hex(const std::uint8_t* data, size_t size);
std::string sha256_hex(const std::vector<std::uint8_t>& data);
std::string sha256_file_hex(const std::string& path);

} // namespace semjpeg
