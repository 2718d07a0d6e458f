#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mudslide {

struct TokenStream {
  std::string source_comment_id;
  std::vector<std::string> tokens;
};

// Lowercases, splits on every character that is not an ASCII letter or digit
// and drops tokens shorter than two characters.
TokenStream tokenize(std::string_view text, std::string source_comment_id = {});

// True if `token` is exactly what tokenize would emit for it.
bool is_valid_token(std::string_view token);

using StopwordSet = std::set<std::string, std::less<>>;

// Built from data/stopwords.txt.
const StopwordSet& default_stopwords();
// One token per line, '#' starts a comment, surrounding whitespace ignored,
// entries lowercased.
StopwordSet parse_stopwords(std::istream& in);
StopwordSet load_stopwords(const std::filesystem::path& file);

struct HistogramEntry {
  std::string token;
  std::size_t count = 0;

  bool operator==(const HistogramEntry&) const = default;
};

struct Histogram {
  std::vector<HistogramEntry> entries;  // count desc, token asc
  std::size_t top_n = 0;
};

// Throws Error(InvalidOptions) when top_n is 0.
Histogram word_histogram(std::span<const std::string> comments, const StopwordSet& stopwords,
                         std::size_t top_n);

std::optional<std::string> default_root(const Histogram& histogram);

struct WordTreeNode {
  std::string token;
  std::size_t count = 0;           // occurrences of the phrase ending here
  std::size_t terminal_count = 0;  // occurrences whose phrase stops here
  std::vector<WordTreeNode> children;  // count desc, token asc

  bool operator==(const WordTreeNode&) const = default;
};

struct WordTreeOptions {
  std::size_t max_depth = 5;
  std::size_t min_count = 1;
};

struct WordTree {
  std::string root_token;
  std::size_t root_count = 0;
  WordTreeNode root;
  WordTreeOptions options;
};

// Concordance of what follows `root` in each comment. Branches below
// min_count are pruned and their occurrences credited to the parent's
// terminal_count. Throws Error(InvalidRoot) if root is not a valid token.
WordTree build_word_tree(std::span<const std::string> comments, std::string_view root,
                         WordTreeOptions options = {});

}  // namespace mudslide
