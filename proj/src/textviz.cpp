#include "mudslide/textviz.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "mudslide/error.hpp"

namespace mudslide {

namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

constexpr std::size_t kMinTokenLength = 2;

constexpr char kDefaultStopwordsText[] =
#include "default_stopwords.inc"
    ;

bool child_order(const WordTreeNode& a, const WordTreeNode& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.token < b.token;
}

// Drops children below min_count (their mass moves to this node's
// terminal_count) and sorts what remains.
void prune_and_sort(WordTreeNode& node, std::size_t min_count) {
  auto keep_end = std::stable_partition(
      node.children.begin(), node.children.end(),
      [min_count](const WordTreeNode& child) { return child.count >= min_count; });
  for (auto it = keep_end; it != node.children.end(); ++it) node.terminal_count += it->count;
  node.children.erase(keep_end, node.children.end());
  std::sort(node.children.begin(), node.children.end(), child_order);
  for (WordTreeNode& child : node.children) prune_and_sort(child, min_count);
}

}  // namespace

TokenStream tokenize(std::string_view text, std::string source_comment_id) {
  TokenStream out{std::move(source_comment_id), {}};
  std::string current;
  auto flush = [&]() {
    if (current.size() >= kMinTokenLength) out.tokens.push_back(current);
    current.clear();
  };
  for (char c : text) {
    if (is_ascii_alnum(c)) {
      current.push_back(ascii_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

bool is_valid_token(std::string_view token) {
  if (token.size() < kMinTokenLength) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
  });
}

StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r\n");
    std::string word = line.substr(first, last - first + 1);
    std::transform(word.begin(), word.end(), word.begin(), ascii_lower);
    out.insert(std::move(word));
  }
  return out;
}

StopwordSet load_stopwords(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read stopword file '" + file.string() + "'");
  return parse_stopwords(in);
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = [] {
    std::istringstream in(kDefaultStopwordsText);
    return parse_stopwords(in);
  }();
  return words;
}

Histogram word_histogram(std::span<const std::string> comments, const StopwordSet& stopwords,
                         std::size_t top_n) {
  if (top_n == 0) throw Error(ErrorCode::InvalidOptions, "top_n must be at least 1");
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const std::string& comment : comments) {
    for (std::string& token : tokenize(comment).tokens) {
      if (stopwords.contains(token)) continue;
      ++counts[std::move(token)];
    }
  }
  Histogram out;
  out.top_n = top_n;
  out.entries.reserve(counts.size());
  for (auto& [token, count] : counts) out.entries.push_back(HistogramEntry{token, count});
  // counts is already alphabetical; a stable sort on count keeps that as the tie order.
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const HistogramEntry& a, const HistogramEntry& b) { return a.count > b.count; });
  if (out.entries.size() > top_n) out.entries.resize(top_n);
  return out;
}

std::optional<std::string> default_root(const Histogram& histogram) {
  if (histogram.entries.empty()) return std::nullopt;
  return histogram.entries.front().token;
}

WordTree build_word_tree(std::span<const std::string> comments, std::string_view root,
                         WordTreeOptions options) {
  if (!is_valid_token(root)) {
    throw Error(ErrorCode::InvalidRoot, "'" + std::string(root) + "' is not a valid token");
  }
  WordTree tree;
  tree.root_token = std::string(root);
  tree.options = options;
  tree.root.token = tree.root_token;

  for (const std::string& comment : comments) {
    const std::vector<std::string> tokens = tokenize(comment).tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] != root) continue;
      WordTreeNode* node = &tree.root;
      ++node->count;
      std::size_t end = std::min(tokens.size(), i + 1 + options.max_depth);
      for (std::size_t j = i + 1; j < end; ++j) {
        auto it = std::find_if(node->children.begin(), node->children.end(),
                               [&](const WordTreeNode& c) { return c.token == tokens[j]; });
        if (it == node->children.end()) {
          node->children.push_back(WordTreeNode{tokens[j], 0, 0, {}});
          it = std::prev(node->children.end());
        }
        node = &*it;
        ++node->count;
      }
      ++node->terminal_count;
    }
  }
  prune_and_sort(tree.root, options.min_count);
  tree.root_count = tree.root.count;
  return tree;
}

}  // namespace mudslide
