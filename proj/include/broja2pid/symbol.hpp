#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <tuple>
#include <variant>

namespace broja2pid {

/// An alphabet symbol: an opaque label that is either an integer or a short
/// string. Integers order before strings; within a kind the natural order is
/// used. That order is the canonical order used for variable indexing.
class Symbol {
 public:
  Symbol() : value_(std::int64_t{0}) {}
  Symbol(std::int64_t v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  Symbol(int v) : value_(std::int64_t{v}) {}  // NOLINT
  Symbol(std::string v) : value_(std::move(v)) {}  // NOLINT
  Symbol(const char* v) : value_(std::string(v)) {}  // NOLINT

  bool is_integer() const { return std::holds_alternative<std::int64_t>(value_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(value_); }
  const std::string& as_string() const { return std::get<std::string>(value_); }

  std::string to_string() const {
    return is_integer() ? std::to_string(as_integer()) : as_string();
  }

  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend auto operator<=>(const Symbol& a, const Symbol& b) {
    return a.value_ <=> b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const Symbol& s) {
    return os << s.to_string();
  }

 private:
  std::variant<std::int64_t, std::string> value_;
};

/// One outcome (x, y, z) of the three random variables.
struct Outcome {
  Symbol x;
  Symbol y;
  Symbol z;

  friend bool operator==(const Outcome&, const Outcome&) = default;
  friend auto operator<=>(const Outcome& a, const Outcome& b) {
    return std::tie(a.x, a.y, a.z) <=> std::tie(b.x, b.y, b.z);
  }
};

}  // namespace broja2pid
