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

#include "lexer.hpp"

#include <cctype>
#include <cstdlib>

namespace qoc::detail {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

constexpr std::string_view kSymbols = "()[]{},;+-*/^";

}  // namespace

Lexer::Lexer(std::string_view src) {
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }

    Token tok;
    tok.line = line;
    tok.column = col;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      tok.kind = TokenKind::Identifier;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        }
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(src.substr(i, j - i));
      tok.number = std::strtod(tok.text.c_str(), nullptr);
      advance(j - i);
    } else if (kSymbols.find(c) != std::string_view::npos) {
      tok.kind = TokenKind::Symbol;
      tok.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    tokens_.push_back(std::move(tok));
  }

  Token end;
  end.kind = TokenKind::End;
  end.line = line;
  end.column = col;
  tokens_.push_back(end);
}

const Token& Lexer::peek(std::size_t ahead) const {
  std::size_t idx = pos_ + ahead;
  if (idx >= tokens_.size()) return tokens_.back();
  return tokens_[idx];
}

Token Lexer::next() {
  Token tok = peek();
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return tok;
}

bool Lexer::accept(char symbol) {
  if (peek().is(symbol)) {
    next();
    return true;
  }
  return false;
}

Token Lexer::expect(char symbol) {
  if (!peek().is(symbol)) {
    throw error(std::string("expected '") + symbol + "' but found " + describe(peek()));
  }
  return next();
}

Token Lexer::expect_identifier(std::string_view what) {
  if (peek().kind != TokenKind::Identifier) {
    throw error("expected " + std::string(what) + " but found " + describe(peek()));
  }
  return next();
}

Token Lexer::expect_number(std::string_view what) {
  if (peek().kind != TokenKind::Number) {
    throw error("expected " + std::string(what) + " but found " + describe(peek()));
  }
  return next();
}

ParseError Lexer::error(const std::string& message) const { return error_at(peek(), message); }

ParseError Lexer::error_at(const Token& token, const std::string& message) const {
  return ParseError(message, token.line, token.column);
}

std::string describe(const Token& token) {
  switch (token.kind) {
    case TokenKind::End:
      return "end of input";
    case TokenKind::Identifier:
      return "identifier '" + token.text + "'";
    case TokenKind::Number:
      return "number " + token.text;
    case TokenKind::Symbol:
      return "'" + token.text + "'";
  }
  return "token";
}

}  // namespace qoc::detail
