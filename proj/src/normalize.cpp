#include <cstdlib>
#include <string>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "docleak/similarity.hpp"

namespace docleak {

namespace {

const icu::Normalizer2& nfkc_casefold() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status) || n == nullptr) std::abort();
    return n;
  }();
  return *instance;
}

std::string normalize_pass(std::string_view raw) {
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString folded = nfkc_casefold().normalize(src, status);
  if (U_FAILURE(status)) folded = src;

  icu::UnicodeString out;
  icu::UnicodeString token;
  auto flush = [&] {
    int32_t begin = 0;
    int32_t end = token.length();
    while (begin < end && u_ispunct(token.char32At(begin))) {
      begin = token.moveIndex32(begin, 1);
    }
    while (end > begin) {
      int32_t prev = token.moveIndex32(end, -1);
      if (!u_ispunct(token.char32At(prev))) break;
      end = prev;
    }
    if (end > begin) {
      if (!out.isEmpty()) out.append(static_cast<UChar>(u' '));
      out.append(token, begin, end - begin);
    }
    token.remove();
  };

  for (int32_t i = 0; i < folded.length();) {
    UChar32 c = folded.char32At(i);
    if (u_isUWhiteSpace(c)) {
      flush();
    } else {
      token.append(c);
    }
    i = folded.moveIndex32(i, 1);
  }
  flush();

  std::string result;
  out.toUTF8String(result);
  return result;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  // Stripping can, in rare cases, expose a sequence that folds further; run
  // passes until the output is stable.
  std::string current = normalize_pass(raw);
  for (int i = 0; i < 8; ++i) {
    std::string next = normalize_pass(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace docleak
