#include <cctype>

#include "ciq/ciql.hpp"

namespace ciq::ciql {

std::vector<Lexeme> lex(const std::string& text) {
  std::vector<Lexeme> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    Lexeme lx;
    lx.line = line;
    lx.col = col;
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      // SQL line comment
      while (i < text.size() && text[i] != '\n') {
        advance(text[i]);
        ++i;
      }
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) ||
              text[i] == '_')) {
        ident.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      lx.kind = TokKind::Ident;
      lx.text = std::move(ident);
      out.push_back(std::move(lx));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() &&
         std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::string num;
      bool dotSeen = false;
      while (i < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[i])) ||
              (text[i] == '.' && !dotSeen))) {
        if (text[i] == '.') {
          // '123.' followed by an identifier is a qualified name, not a real
          if (i + 1 >= text.size() ||
              !std::isdigit(static_cast<unsigned char>(text[i + 1])))
            break;
          dotSeen = true;
        }
        num.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      lx.kind = TokKind::Number;
      lx.text = num;
      lx.number = std::stod(num);
      out.push_back(std::move(lx));
      continue;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      advance(c);
      ++i;
      std::string s;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == quote) {
          if (i + 1 < text.size() && text[i + 1] == quote) {
            s.push_back(quote);
            advance(text[i]);
            ++i;
            advance(text[i]);
            ++i;
            continue;
          }
          advance(text[i]);
          ++i;
          closed = true;
          break;
        }
        s.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      if (!closed)
        throw SyntaxError("unterminated string literal", lx.line, lx.col);
      lx.kind = TokKind::String;
      lx.text = std::move(s);
      out.push_back(std::move(lx));
      continue;
    }
    if (c == '<' || c == '>' || c == '=' || c == '!') {
      std::string op(1, c);
      advance(c);
      ++i;
      if (i < text.size() && text[i] == '=' && (c == '<' || c == '>' || c == '!')) {
        op.push_back('=');
        advance(text[i]);
        ++i;
      }
      if (op == "!")
        throw SyntaxError("unexpected character '!'", lx.line, lx.col);
      lx.kind = TokKind::Relop;
      lx.text = std::move(op);
      out.push_back(std::move(lx));
      continue;
    }
    if (std::string(",;().*+-").find(c) != std::string::npos) {
      lx.kind = TokKind::Punct;
      lx.text = std::string(1, c);
      advance(c);
      ++i;
      out.push_back(std::move(lx));
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", line,
                      col);
  }
  Lexeme end;
  end.kind = TokKind::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

}  // namespace ciq::ciql
