#pragma once

// Envelope text format:
//
//   envmpc-envelope 1
//   rho_lse <double>
//   p <int>
//   epsilon0 <double>
//   blocks <count>
//   <xb> <yb> <psib> <Lb> <Wb>      (one line per block, SI units, radians)
//
// Doubles are written in shortest round-trip form, so save followed by load
// reproduces every field bit for bit.

#include "envmpc/envelope/spatial_envelope.hpp"
#include "envmpc/io/keyvalue.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace envmpc {

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

inline double parse_double(const std::string& tok, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ConfigError(context + ": `" + tok + "` is not a number");
  }
  return v;
}

}  // namespace detail

inline std::string envelope_to_string(const SpatialEnvelope& env) {
  const int p = env.blocks().empty() ? 4 : env.blocks().front().p;
  std::ostringstream out;
  out << "envmpc-envelope 1\n";
  out << "rho_lse " << detail::format_double(env.rho()) << "\n";
  out << "p " << p << "\n";
  out << "epsilon0 " << detail::format_double(env.epsilon0()) << "\n";
  out << "blocks " << env.blocks().size() << "\n";
  for (const EnvelopeBlock& b : env.blocks()) {
    out << detail::format_double(b.xb) << ' ' << detail::format_double(b.yb) << ' '
        << detail::format_double(b.psib) << ' ' << detail::format_double(b.Lb) << ' '
        << detail::format_double(b.Wb) << "\n";
  }
  return out.str();
}

inline SpatialEnvelope envelope_from_string(const std::string& text, const std::string& origin = "<envelope>") {
  std::istringstream in(text);
  std::string tag;
  std::string tok;
  int version = 0;
  if (!(in >> tag >> version) || tag != "envmpc-envelope" || version != 1) {
    throw ConfigError(origin + ": not an envmpc-envelope v1 file");
  }
  auto expect = [&](const char* key) {
    if (!(in >> tag) || tag != key || !(in >> tok)) {
      throw ConfigError(origin + ": expected `" + key + "` header");
    }
    return tok;
  };
  const double rho = detail::parse_double(expect("rho_lse"), origin);
  const int p = static_cast<int>(detail::parse_double(expect("p"), origin));
  const double eps = detail::parse_double(expect("epsilon0"), origin);
  const auto count = static_cast<std::size_t>(detail::parse_double(expect("blocks"), origin));
  std::vector<EnvelopeBlock> blocks;
  blocks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::array<double, 5> f{};
    for (double& v : f) {
      if (!(in >> tok)) {
        throw ConfigError(origin + ": truncated block list");
      }
      v = detail::parse_double(tok, origin);
    }
    blocks.push_back({f[0], f[1], f[2], f[3], f[4], p});
  }
  return SpatialEnvelope(std::move(blocks), rho, eps);
}

inline void save_envelope(const SpatialEnvelope& env, const std::string& path) {
  std::ofstream f(path);
  if (!f) {
    throw ConfigError("cannot write envelope file: " + path);
  }
  f << envelope_to_string(env);
}

inline SpatialEnvelope load_envelope(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw ConfigError("cannot open envelope file: " + path);
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return envelope_from_string(ss.str(), path);
}

}  // namespace envmpc
