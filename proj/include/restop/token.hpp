#pragma once

#include <cassert>
#include <compare>
#include <string>
#include <vector>

namespace restop {

// Element of the finite observation alphabet: a quantile bucket 1..K or the
// terminal success symbol. Success never has a successor within one run.
class Token {
 public:
  constexpr Token() : code_(0) {}

  static constexpr Token success() { return Token(0); }

  static Token bucket(int b) {
    assert(b >= 1);
    return Token(b);
  }

  bool is_success() const { return code_ == 0; }

  int bucket_index() const {
    assert(!is_success());
    return code_;
  }

  // 0 = success, b >= 1 = bucket b. Stable across serialization.
  int code() const { return code_; }

  auto operator<=>(const Token&) const = default;

 private:
  explicit constexpr Token(int code) : code_(code) {}
  int code_;
};

// A curve mapped into the token alphabet. At most one success token, and
// only as the final token; costs align one-to-one with tokens.
struct DiscretizedRun {
  std::vector<Token> tokens;
  std::vector<double> costs;
  std::string source_id;
};

}  // namespace restop
