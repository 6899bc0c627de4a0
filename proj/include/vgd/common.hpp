#pragma once

#include <boost/rational.hpp>

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace vgd {

using Rational = boost::rational<std::int64_t>;

// Error hierarchy. Each operation documents which of these it raises.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define VGD_DEFINE_ERROR(Name)              \
  struct Name : Error {                     \
    using Error::Error;                     \
  }

VGD_DEFINE_ERROR(CompletePath);
VGD_DEFINE_ERROR(IncompletePath);
VGD_DEFINE_ERROR(IllegalStep);
VGD_DEFINE_ERROR(InvalidInstance);
VGD_DEFINE_ERROR(ParseError);
VGD_DEFINE_ERROR(EmptyDataset);
VGD_DEFINE_ERROR(MissingStepLabels);
VGD_DEFINE_ERROR(IoError);
VGD_DEFINE_ERROR(VersionMismatch);
VGD_DEFINE_ERROR(CorruptFile);
VGD_DEFINE_ERROR(UnreachablePrefix);
VGD_DEFINE_ERROR(PrefixNotFound);
VGD_DEFINE_ERROR(InvalidConfig);
VGD_DEFINE_ERROR(NoAnsweredPaths);

#undef VGD_DEFINE_ERROR

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Integers print bare ("13", "-5"); proper fractions print parenthesised
/// ("(1/3)", "(-7/2)") so they cannot be confused with a division step.
inline std::string format_number(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return "(" + std::to_string(r.numerator()) + "/" + std::to_string(r.denominator()) + ")";
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Parses the output of format_number, also accepting a bare "n/d".
inline std::optional<Rational> parse_number(std::string_view s) {
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  auto slash = s.find('/');
  if (slash == std::string_view::npos) {
    auto n = parse_int(s);
    if (!n) return std::nullopt;
    return Rational(*n);
  }
  auto n = parse_int(s.substr(0, slash));
  auto d = parse_int(s.substr(slash + 1));
  if (!n || !d || *d == 0) return std::nullopt;
  return Rational(*n, *d);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace vgd

template <>
struct std::hash<vgd::Rational> {
  std::size_t operator()(const vgd::Rational& r) const noexcept {
    return vgd::splitmix64(static_cast<std::uint64_t>(r.numerator()) * 31u +
                           static_cast<std::uint64_t>(r.denominator()));
  }
};
