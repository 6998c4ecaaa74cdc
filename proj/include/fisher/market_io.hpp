#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fisher/market.hpp"

namespace fisher {

/// JSON market document {"n", "m", "budgets", "values"} with values row-major
/// and every number printed with 17 significant digits, so parsing and
/// re-serializing reproduces the same bytes.
std::string market_to_json(const MarketInstance& market);
MarketInstance market_from_json(std::string_view text);

/// Binary layout: "FQSM", then version, n, m as little-endian uint32, then
/// n budgets and n*m row-major values as little-endian float64.
inline constexpr std::uint32_t kMarketBinaryVersion = 1;
std::string market_to_binary(const MarketInstance& market);
MarketInstance market_from_binary(std::string_view bytes);

/// Chooses the binary layout for a ".bin" extension, JSON otherwise.
void save_market(const std::filesystem::path& path, const MarketInstance& market);
/// Detects the format from the leading magic bytes.
MarketInstance load_market(const std::filesystem::path& path);

/// FNV-1a over the dimensions and the raw bytes of budgets and values.
std::uint64_t instance_hash(const MarketInstance& market) noexcept;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// printf-style "%.17g".
std::string format_double(double value);

}  // namespace fisher
