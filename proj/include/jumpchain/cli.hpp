#ifndef JUMPCHAIN_CLI_HPP
#define JUMPCHAIN_CLI_HPP

#include <cstdint>
#include <string_view>

namespace jumpchain {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 model or runtime error (including a failed
// validation), 2 configuration error.
int parse_and_dispatch(int argc, const char* const* argv);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace jumpchain

#endif
