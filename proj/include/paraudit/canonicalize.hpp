#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "paraudit/errors.hpp"

namespace paraudit {

// ---------------------------------------------------------------------------
// Brand-name canonicalization: lowercased, alphanumeric only, length >= 3,
// with a stoplist for false-positive terms and an allowlist preserving known
// short brand names.
// ---------------------------------------------------------------------------

enum class BrandReject { empty, too_short, stoplist };

inline std::string to_string(BrandReject r) {
  switch (r) {
    case BrandReject::empty: return "empty";
    case BrandReject::too_short: return "too_short";
    case BrandReject::stoplist: return "stoplist";
  }
  return "?";
}

struct CanonicalBrand {
  std::string token;   // set iff accepted
  std::optional<BrandReject> rejected;

  bool accepted() const { return !rejected.has_value(); }
};

namespace detail {

// Compatibility fold for the character ranges that show up in brand names:
// Latin-1 supplement and Latin Extended-A accents collapse to their ASCII
// base letter, fullwidth forms collapse to their ASCII counterparts.
inline std::string fold_codepoint(std::uint32_t cp) {
  if (cp < 0x80) return std::string(1, static_cast<char>(cp));
  struct Range { std::uint32_t lo, hi; const char* map; };
  // Latin-1 supplement letters, one fold char each ('\0' = strip).
  static const std::map<std::uint32_t, const char*> kFold = {
      {0x00C0, "a"}, {0x00C1, "a"}, {0x00C2, "a"}, {0x00C3, "a"}, {0x00C4, "a"},
      {0x00C5, "a"}, {0x00C6, "ae"}, {0x00C7, "c"}, {0x00C8, "e"}, {0x00C9, "e"},
      {0x00CA, "e"}, {0x00CB, "e"}, {0x00CC, "i"}, {0x00CD, "i"}, {0x00CE, "i"},
      {0x00CF, "i"}, {0x00D1, "n"}, {0x00D2, "o"}, {0x00D3, "o"}, {0x00D4, "o"},
      {0x00D5, "o"}, {0x00D6, "o"}, {0x00D8, "o"}, {0x00D9, "u"}, {0x00DA, "u"},
      {0x00DB, "u"}, {0x00DC, "u"}, {0x00DD, "y"}, {0x00DF, "ss"},
      {0x00E0, "a"}, {0x00E1, "a"}, {0x00E2, "a"}, {0x00E3, "a"}, {0x00E4, "a"},
      {0x00E5, "a"}, {0x00E6, "ae"}, {0x00E7, "c"}, {0x00E8, "e"}, {0x00E9, "e"},
      {0x00EA, "e"}, {0x00EB, "e"}, {0x00EC, "i"}, {0x00ED, "i"}, {0x00EE, "i"},
      {0x00EF, "i"}, {0x00F1, "n"}, {0x00F2, "o"}, {0x00F3, "o"}, {0x00F4, "o"},
      {0x00F5, "o"}, {0x00F6, "o"}, {0x00F8, "o"}, {0x00F9, "u"}, {0x00FA, "u"},
      {0x00FB, "u"}, {0x00FC, "u"}, {0x00FD, "y"}, {0x00FF, "y"},
  };
  if (auto it = kFold.find(cp); it != kFold.end()) return it->second;
  // Latin Extended-A: base letter is recoverable from the codepoint layout
  // for the common accented pairs; handle the frequent ones explicitly.
  static const std::map<std::uint32_t, const char*> kExtA = {
      {0x0100, "a"}, {0x0101, "a"}, {0x0106, "c"}, {0x0107, "c"},
      {0x010C, "c"}, {0x010D, "c"}, {0x0112, "e"}, {0x0113, "e"},
      {0x011A, "e"}, {0x011B, "e"}, {0x0141, "l"}, {0x0142, "l"},
      {0x0143, "n"}, {0x0144, "n"}, {0x0152, "oe"}, {0x0153, "oe"},
      {0x015A, "s"}, {0x015B, "s"}, {0x0160, "s"}, {0x0161, "s"},
      {0x017B, "z"}, {0x017C, "z"}, {0x017D, "z"}, {0x017E, "z"},
  };
  if (auto it = kExtA.find(cp); it != kExtA.end()) return it->second;
  // Fullwidth ASCII block.
  if (cp >= 0xFF01 && cp <= 0xFF5E)
    return std::string(1, static_cast<char>(cp - 0xFF01 + 0x21));
  return "";  // no fold known: stripped (non-alphanumeric for our purposes)
}

inline std::vector<std::uint32_t> decode_utf8(std::string_view s) {
  std::vector<std::uint32_t> cps;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = 0;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F; len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F; len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07; len = 4;
    } else {
      ++i;  // stray continuation byte
      continue;
    }
    if (i + len > s.size()) break;
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) { ok = false; break; }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (ok) cps.push_back(cp);
    i += len;
  }
  return cps;
}

}  // namespace detail

inline const std::set<std::string>& default_stoplist() {
  // Repo-chosen defaults for common false-positive tokens; configurable.
  static const std::set<std::string> kStoplist = {
      "up", "pro", "go", "one", "plus", "base", "core", "hub", "cloud"};
  return kStoplist;
}

inline const std::set<std::string>& default_short_brand_allowlist() {
  static const std::set<std::string> kAllowlist = {"g2", "ey", "k6", "bp"};
  return kAllowlist;
}

inline std::set<std::string> load_token_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open token file: " + path);
  std::set<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) tokens.insert(line);
  }
  return tokens;
}

class BrandNormalizer {
 public:
  BrandNormalizer()
      : stoplist_(default_stoplist()), allowlist_(default_short_brand_allowlist()) {}
  BrandNormalizer(std::set<std::string> stoplist, std::set<std::string> allowlist)
      : stoplist_(std::move(stoplist)), allowlist_(std::move(allowlist)) {}

  CanonicalBrand canonical_brand(std::string_view raw) const {
    std::string token;
    for (std::uint32_t cp : detail::decode_utf8(raw))
      for (char c : detail::fold_codepoint(cp))
        if (std::isalnum(static_cast<unsigned char>(c)))
          token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    CanonicalBrand result;
    if (token.empty()) {
      result.rejected = BrandReject::empty;
    } else if (stoplist_.contains(token)) {
      result.rejected = BrandReject::stoplist;
    } else if (token.size() < 3 && !allowlist_.contains(token)) {
      result.rejected = BrandReject::too_short;
    } else {
      result.token = std::move(token);
    }
    return result;
  }

  // FNV hash over the sorted stoplist, echoed into report diagnostics.
  std::uint64_t stoplist_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& t : stoplist_) {
      for (unsigned char c : t) { h ^= c; h *= 0x00000100000001b3ull; }
      h ^= '\n'; h *= 0x00000100000001b3ull;
    }
    return h;
  }

 private:
  std::set<std::string> stoplist_;
  std::set<std::string> allowlist_;
};

// ---------------------------------------------------------------------------
// eTLD+1 collapse against a pinned public-suffix snapshot.
// ---------------------------------------------------------------------------

// Reduced snapshot of the public suffix list covering the TLDs that appear
// in commercial retrieval pools; standard PSL format, overridable from file.
inline const char* default_public_suffix_snapshot() {
  return R"psl(// pinned public-suffix snapshot (reduced)
com
net
org
io
ai
app
dev
info
biz
edu
gov
co
me
so
to
tv
xyz
eu
us
ca
mx
br
com.br
net.br
org.br
in
co.in
net.in
org.in
cn
com.cn
net.cn
org.cn
jp
co.jp
ne.jp
or.jp
ac.jp
au
com.au
net.au
org.au
nz
co.nz
net.nz
org.nz
uk
co.uk
org.uk
ac.uk
gov.uk
net.uk
de
fr
it
nl
es
se
ch
at
be
dk
no
fi
pl
pt
ru
ie
cz
gr
hu
ro
sg
hk
kr
co.kr
za
co.za
ck
*.ck
!www.ck
)psl";
}

class PublicSuffixList {
 public:
  PublicSuffixList() { parse(default_public_suffix_snapshot()); }
  explicit PublicSuffixList(std::string_view psl_text) { parse(psl_text); }

  static PublicSuffixList from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open public-suffix file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return PublicSuffixList(buf.str());
  }

  // Registrable domain (one label beyond the public suffix), lowercase.
  std::string canonical_domain(const std::string& url) const {
    std::string host = extract_host(url);
    std::vector<std::string> labels = split_labels(host);
    if (labels.empty() || host.empty())
      throw ValidationError("URL has no host: " + url);
    std::size_t suffix_len = public_suffix_label_count(labels);
    if (labels.size() <= suffix_len)
      throw ValidationError("host is a public suffix: " + host);
    std::string out;
    for (std::size_t i = labels.size() - suffix_len - 1; i < labels.size(); ++i) {
      if (!out.empty()) out += '.';
      out += labels[i];
    }
    return out;
  }

 private:
  struct Rule {
    std::vector<std::string> labels;  // stored right-to-left
    bool exception = false;
  };

  void parse(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      std::string_view line = text.substr(
          start, end == std::string_view::npos ? std::string_view::npos : end - start);
      start = end == std::string_view::npos ? text.size() + 1 : end + 1;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.remove_suffix(1);
      if (line.empty() || line.starts_with("//")) continue;
      Rule rule;
      if (line.front() == '!') {
        rule.exception = true;
        line.remove_prefix(1);
      }
      std::vector<std::string> labels = split_labels(std::string(line));
      std::reverse(labels.begin(), labels.end());
      rule.labels = std::move(labels);
      rules_.push_back(std::move(rule));
    }
  }

  static std::vector<std::string> split_labels(const std::string& host) {
    std::vector<std::string> labels;
    std::string cur;
    for (char ch : host) {
      if (ch == '.') {
        labels.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      }
    }
    labels.push_back(cur);
    for (const auto& l : labels)
      if (l.empty()) throw ValidationError("empty label in host: " + host);
    return labels;
  }

  static std::string extract_host(const std::string& url) {
    std::string rest = url;
    if (auto pos = rest.find("://"); pos != std::string::npos)
      rest = rest.substr(pos + 3);
    if (auto at = rest.find('@');
        at != std::string::npos && at < rest.find_first_of("/?#"))
      rest = rest.substr(at + 1);
    if (auto pos = rest.find_first_of("/?#"); pos != std::string::npos)
      rest = rest.substr(0, pos);
    if (!rest.empty() && rest.front() == '[')
      throw ValidationError("IP-literal host not collapsible: " + url);
    if (auto colon = rest.find(':'); colon != std::string::npos)
      rest = rest.substr(0, colon);
    if (rest.empty() || rest.find(' ') != std::string::npos ||
        rest.find('.') == std::string::npos)
      throw ValidationError("not a parseable URL host: " + url);
    bool all_numeric_dots = std::all_of(rest.begin(), rest.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
    });
    if (all_numeric_dots)
      throw ValidationError("IP-literal host not collapsible: " + url);
    return rest;
  }

  // Prevailing-rule match per the PSL algorithm: exceptions win, then the
  // longest matching rule, then the implicit "*" rule.
  std::size_t public_suffix_label_count(const std::vector<std::string>& labels) const {
    std::vector<std::string> rev(labels.rbegin(), labels.rend());
    std::size_t best = 1;  // implicit "*" default rule
    for (const auto& rule : rules_) {
      if (rule.labels.size() > rev.size()) continue;
      bool match = true;
      for (std::size_t i = 0; i < rule.labels.size(); ++i) {
        if (rule.labels[i] != "*" && rule.labels[i] != rev[i]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      if (rule.exception) return rule.labels.size() - 1;
      best = std::max(best, rule.labels.size());
    }
    return best;
  }

  std::vector<Rule> rules_;
};

}  // namespace paraudit
