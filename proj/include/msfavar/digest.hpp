#ifndef MSFAVAR_DIGEST_HPP
#define MSFAVAR_DIGEST_HPP

#include <string>
#include <string_view>

namespace msfavar {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

}  // namespace msfavar

#endif
