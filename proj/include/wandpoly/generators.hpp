#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "wandpoly/errors.hpp"

namespace wandpoly {

/// Deterministic source of base-d digits. Implementations must be safe for
/// concurrent calls and return the same digit for a position on every call.
class DigitGenerator {
 public:
  virtual ~DigitGenerator() = default;
  /// Digit at 0-based position `pos` after the radix point.
  virtual unsigned digit(std::uint64_t pos) const = 0;
};

using GeneratorParams = std::map<std::string, std::string>;

/// A configured generator instance shared by every angle derived from it.
struct GeneratorInfo {
  std::string name;
  unsigned base = 2;
  GeneratorParams params;  // excludes d, shift and digit overrides
  std::string key;         // canonical identity
  std::shared_ptr<const DigitGenerator> source;
};

using GeneratorFactory =
    std::function<std::shared_ptr<const DigitGenerator>(unsigned base, const GeneratorParams&)>;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t param_u64(const GeneratorParams& p, const std::string& k, std::uint64_t fallback) {
  auto it = p.find(k);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(k);
    return v;
  } catch (const std::exception&) {
    throw ParseError("generator parameter '" + k + "' is not a nonnegative integer: " + it->second);
  }
}

inline void allow_only(const GeneratorParams& p, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* allowed : keys) ok = ok || k == allowed;
    if (!ok) throw ParseError("unknown generator parameter '" + k + "'");
  }
}

/// Base-d Champernowne digits: 1, 2, 3, ... written in base d and concatenated.
class Champernowne final : public DigitGenerator {
 public:
  explicit Champernowne(unsigned base) : base_(base) {}
  unsigned digit(std::uint64_t pos) const override {
    using u128 = unsigned __int128;
    u128 rem = pos;
    u128 first = 1;  // smallest number with `len` digits
    for (unsigned len = 1;; ++len) {
      const u128 count = first * (base_ - 1);
      if (rem < count * len) {
        const u128 number = first + rem / len;
        const unsigned within = static_cast<unsigned>(rem % len);
        u128 div = 1;
        for (unsigned i = 0; i + 1 + within < len; ++i) div *= base_;
        return static_cast<unsigned>((number / div) % base_);
      }
      rem -= count * len;
      first *= base_;
    }
  }

 private:
  unsigned base_;
};

class HashDigits final : public DigitGenerator {
 public:
  HashDigits(unsigned base, std::uint64_t seed) : base_(base), seed_(seed) {}
  unsigned digit(std::uint64_t pos) const override {
    return static_cast<unsigned>(splitmix64(splitmix64(seed_) ^ pos) % base_);
  }

 private:
  unsigned base_;
  std::uint64_t seed_;
};

/// Thue-Morse word as digits 0/1, valid in every base.
class ThueMorse final : public DigitGenerator {
 public:
  unsigned digit(std::uint64_t pos) const override {
    return static_cast<unsigned>(__builtin_popcountll(pos) & 1U);
  }
};

}  // namespace detail

/// Named digit-stream generators, referenced by "gen:<name>?d=<base>&..." literals.
class GeneratorRegistry {
 public:
  static GeneratorRegistry& global() {
    static GeneratorRegistry registry(with_builtins);
    return registry;
  }

  GeneratorRegistry() = default;

  void add(const std::string& name, GeneratorFactory factory) {
    std::lock_guard lock(mutex_);
    factories_[name] = std::move(factory);
  }

  bool contains(const std::string& name) const {
    std::lock_guard lock(mutex_);
    return factories_.count(name) != 0;
  }

  /// Returns the shared instance for (name, base, params), creating it on first use.
  std::shared_ptr<const GeneratorInfo> make(const std::string& name, unsigned base,
                                            const GeneratorParams& params) {
    if (base < 2 || base > 36) throw ParseError("generator base must be in [2, 36]");
    std::string key = name + "?d=" + std::to_string(base);
    for (const auto& [k, v] : params) key += "&" + k + "=" + v;

    std::lock_guard lock(mutex_);
    if (auto it = instances_.find(key); it != instances_.end()) return it->second;
    auto f = factories_.find(name);
    if (f == factories_.end()) throw ParseError("unknown generator '" + name + "'");
    auto info = std::make_shared<GeneratorInfo>();
    info->name = name;
    info->base = base;
    info->params = params;
    info->key = key;
    info->source = f->second(base, params);
    instances_.emplace(key, info);
    return info;
  }

 private:
  struct WithBuiltins {};
  static constexpr WithBuiltins with_builtins{};

  explicit GeneratorRegistry(WithBuiltins) {
    add("champernowne", [](unsigned base, const GeneratorParams& p) {
      detail::allow_only(p, {});
      return std::make_shared<detail::Champernowne>(base);
    });
    add("random", [](unsigned base, const GeneratorParams& p) {
      detail::allow_only(p, {"seed"});
      return std::make_shared<detail::HashDigits>(base, detail::param_u64(p, "seed", 0));
    });
    add("thue_morse", [](unsigned, const GeneratorParams& p) {
      detail::allow_only(p, {});
      return std::make_shared<detail::ThueMorse>();
    });
  }

  mutable std::mutex mutex_;
  std::map<std::string, GeneratorFactory> factories_;
  std::map<std::string, std::shared_ptr<const GeneratorInfo>> instances_;
};

}  // namespace wandpoly
