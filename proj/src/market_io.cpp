#include "fisher/market_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "fisher/error.hpp"

namespace fisher {
namespace {

constexpr char kMagic[4] = {'F', 'Q', 'S', 'M'};
constexpr std::size_t kHeaderBytes = 16;

static_assert(std::endian::native == std::endian::little,
              "binary market format assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  out.append(bytes, 4);
}

void put_f64(std::string& out, double v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  out.append(bytes, 8);
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

double get_f64(std::string_view bytes, std::size_t offset) {
  double v;
  std::memcpy(&v, bytes.data() + offset, 8);
  return v;
}

void append_array(std::string& out, std::span<const double> xs) {
  out += '[';
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ',';
    out += format_double(xs[k]);
  }
  out += ']';
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string market_to_json(const MarketInstance& market) {
  std::string out = "{\"n\":" + std::to_string(market.buyers()) +
                    ",\"m\":" + std::to_string(market.goods()) + ",\"budgets\":";
  append_array(out, market.budgets());
  out += ",\"values\":";
  append_array(out, market.values().flat());
  out += "}\n";
  return out;
}

MarketInstance market_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::IoError, std::string("market JSON: ") + e.what());
  }
  try {
    const auto n = doc.at("n").get<std::size_t>();
    const auto m = doc.at("m").get<std::size_t>();
    auto budgets = doc.at("budgets").get<std::vector<double>>();
    auto values = doc.at("values").get<std::vector<double>>();
    if (budgets.size() != n || values.size() != n * m) {
      throw Error(ErrorCode::DimensionMismatch, "market JSON arrays do not match n and m");
    }
    return validate_market(std::move(budgets), Matrix(n, m, std::move(values)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("market JSON: ") + e.what());
  }
}

std::string market_to_binary(const MarketInstance& market) {
  std::string out(kMagic, 4);
  put_u32(out, kMarketBinaryVersion);
  put_u32(out, static_cast<std::uint32_t>(market.buyers()));
  put_u32(out, static_cast<std::uint32_t>(market.goods()));
  out.reserve(kHeaderBytes + 8 * (market.buyers() + market.values().size()));
  for (double b : market.budgets()) put_f64(out, b);
  for (double v : market.values().flat()) put_f64(out, v);
  return out;
}

MarketInstance market_from_binary(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::IoError, "not a binary market file");
  }
  if (get_u32(bytes, 4) != kMarketBinaryVersion) {
    throw Error(ErrorCode::IoError, "unsupported binary market version");
  }
  const std::size_t n = get_u32(bytes, 8);
  const std::size_t m = get_u32(bytes, 12);
  if (bytes.size() != kHeaderBytes + 8 * (n + n * m)) {
    throw Error(ErrorCode::IoError, "binary market file has the wrong size");
  }
  std::vector<double> budgets(n);
  std::vector<double> values(n * m);
  std::size_t offset = kHeaderBytes;
  for (double& b : budgets) {
    b = get_f64(bytes, offset);
    offset += 8;
  }
  for (double& v : values) {
    v = get_f64(bytes, offset);
    offset += 8;
  }
  return validate_market(std::move(budgets), Matrix(n, m, std::move(values)));
}

void save_market(const std::filesystem::path& path, const MarketInstance& market) {
  if (path.extension() == ".bin") {
    write_file(path, market_to_binary(market));
  } else {
    write_file(path, market_to_json(market));
  }
}

MarketInstance load_market(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == std::string_view(kMagic, 4)) {
    return market_from_binary(bytes);
  }
  return market_from_json(bytes);
}

std::uint64_t instance_hash(const MarketInstance& market) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto feed = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= p[k];
      h *= 0x100000001b3ull;
    }
  };
  const std::uint64_t dims[2] = {market.buyers(), market.goods()};
  feed(dims, sizeof dims);
  feed(market.budgets().data(), market.budgets().size_bytes());
  feed(market.values().flat().data(), market.values().flat().size_bytes());
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace fisher
