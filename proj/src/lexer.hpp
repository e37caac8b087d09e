// Copyright 2026 The qoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qoc/common.hpp"

namespace qoc::detail {

enum class TokenKind { Identifier, Number, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;

  bool is(char symbol) const {
    return kind == TokenKind::Symbol && text.size() == 1 && text[0] == symbol;
  }
};

// Tokenizes the whole input up front. Skips whitespace and `//` comments.
class Lexer {
 public:
  explicit Lexer(std::string_view source);

  const Token& peek(std::size_t ahead = 0) const;
  Token next();
  bool at_end() const { return peek().kind == TokenKind::End; }

  bool accept(char symbol);
  Token expect(char symbol);
  Token expect_identifier(std::string_view what);
  Token expect_number(std::string_view what);

  ParseError error(const std::string& message) const;
  ParseError error_at(const Token& token, const std::string& message) const;

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string describe(const Token& token);

}  // namespace qoc::detail
