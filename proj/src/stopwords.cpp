#include "veritext/stopwords.hpp"

#include <fstream>
#include <unordered_set>

#include "veritext/errors.hpp"
#include "veritext/rng.hpp"

namespace veritext {

namespace {

// Standard English list, 179 entries. Contraction fragments ("ll", "ve", ...)
// are included because the CLASSIC alphabet keeps apostrophes and splitting
// around stray quotes produces them.
const char* kStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
    "you're", "you've", "you'll", "you'd", "your", "yours", "yourself",
    "yourselves", "he", "him", "his", "himself", "she", "she's", "her",
    "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
    "that", "that'll", "these", "those", "am", "is", "are", "was", "were",
    "be", "been", "being", "have", "has", "had", "having", "do", "does",
    "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because",
    "as", "until", "while", "of", "at", "by", "for", "with", "about",
    "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off",
    "over", "under", "again", "further", "then", "once", "here", "there",
    "when", "where", "why", "how", "all", "any", "both", "each", "few",
    "more", "most", "other", "some", "such", "no", "nor", "not", "only",
    "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
    "just", "don", "don't", "should", "should've", "now", "d", "ll", "m",
    "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't",
    "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn",
    "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn",
    "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
    "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won",
    "won't", "wouldn", "wouldn't",
};

std::string canonical_text() {
  std::string out;
  for (const char* w : kStopwords) {
    out += w;
    out += '\n';
  }
  return out;
}

}  // namespace

const std::vector<std::string>& stopword_list() {
  static const std::vector<std::string> list(std::begin(kStopwords),
                                             std::end(kStopwords));
  return list;
}

bool is_stopword(const std::string& token) {
  static const std::unordered_set<std::string> set(std::begin(kStopwords),
                                                   std::end(kStopwords));
  return set.count(token) != 0;
}

uint64_t stopword_list_hash() {
  static const uint64_t hash = [] {
    std::string text = canonical_text();
    return fnv1a64(text.data(), text.size());
  }();
  return hash;
}

std::string stopword_list_hash_hex() {
  static const char* digits = "0123456789abcdef";
  uint64_t h = stopword_list_hash();
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

void write_stopword_file(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write stopword file: " + path);
  out << canonical_text();
}

}  // namespace veritext
