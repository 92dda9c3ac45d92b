#include "summscore/tokenizer.hpp"

#include <cctype>

#include "summscore/random.hpp"
#include "summscore/types.hpp"

namespace summscore {

namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case 0x0B:
    case 0x0C:
    case 0x00A0:  // no-break space
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
    case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Minimal UTF-8 decoder; malformed bytes are passed through as single code
// units so that tokenization never fails on binary garbage. Advances i past
// the decoded sequence.
char32_t decode_utf8(std::string_view text, std::size_t& i) {
  const auto byte = static_cast<unsigned char>(text[i]);
  std::size_t extra = 0;
  char32_t cp = byte;
  if (byte >= 0xF0) {
    extra = 3;
    cp = byte & 0x07;
  } else if (byte >= 0xE0) {
    extra = 2;
    cp = byte & 0x0F;
  } else if (byte >= 0xC0) {
    extra = 1;
    cp = byte & 0x1F;
  }
  if (extra == 0 || i + extra >= text.size()) {
    ++i;
    return byte;
  }
  for (std::size_t k = 1; k <= extra; ++k) {
    const auto cont = static_cast<unsigned char>(text[i + k]);
    if ((cont & 0xC0) != 0x80) {
      ++i;
      return byte;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  i += extra + 1;
  return cp;
}

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const char32_t cp = decode_utf8(text, i);
    if (is_unicode_space(cp)) {
      flush();
      continue;
    }
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if (std::ispunct(static_cast<unsigned char>(c))) {
        flush();
        tokens.emplace_back(1, c);
        continue;
      }
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      current.append(text.substr(start, i - start));
    }
  }
  flush();
  return tokens;
}

HashTokenizer::HashTokenizer(int buckets) : buckets_(buckets) {
  if (buckets < 1) {
    throw std::invalid_argument("tokenizer bucket count must be positive");
  }
}

Tokenization HashTokenizer::tokenize(std::string_view text) const {
  Tokenization out;
  out.surfaces = split_tokens(text);
  if (out.surfaces.empty()) {
    throw EncodingError("text is empty after normalization");
  }
  out.ids.reserve(out.surfaces.size());
  for (const std::string& token : out.surfaces) {
    const std::uint64_t h = fnv1a64(token.data(), token.size());
    out.ids.push_back(kSpecialTokens + static_cast<int>(h % static_cast<std::uint64_t>(buckets_)));
  }
  return out;
}

}  // namespace summscore
