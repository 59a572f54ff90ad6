#ifndef COURTQG_DATA_HPP
#define COURTQG_DATA_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "courtqg/common.hpp"

namespace courtqg {

// The four speaker roles of a court debate. Codes are part of the file format
// and the role-embedding table layout; do not reorder.
enum class Role : int { Judge = 0, Plaintiff = 1, Defendant = 2, Witness = 3 };

constexpr int kNumRoles = 4;

const char* role_name(Role role);
Role role_from_name(const std::string& name);  // throws DomainError on unknown names

// One speaker turn as stored on disk: raw text plus the knowledge elements
// attached to it (case facts the judge marked, e.g. loan_amount). Token
// sequences are derived via tokenize() when a model consumes the turn.
struct Utterance {
  Role role = Role::Judge;
  std::string text;
  std::vector<std::string> elements;

  bool operator==(const Utterance&) const = default;
};

struct Dialogue {
  std::string id;
  std::vector<Utterance> turns;

  bool operator==(const Dialogue&) const = default;
};

// A training/evaluation sample: at least five context utterances followed by
// the judge question they lead up to.
struct DialogueFragment {
  std::string id;
  std::vector<Utterance> context;
  Utterance target;

  bool operator==(const DialogueFragment&) const = default;
};

constexpr size_t kMinContextUtterances = 5;

// Whitespace tokenization with two extra rules: ASCII letters are lowercased,
// and the terminal punctuation characters ? ! . , ; are detached as their own
// tokens. Angle-bracket placeholders such as <person_7> stay atomic so the
// copy mechanism can reproduce them. Throws DomainError on empty/blank text.
std::vector<std::string> tokenize(const std::string& text);

// Every judge turn at 1-based position p >= 6 yields a fragment whose context
// is everything before it.
std::vector<DialogueFragment> extract_fragments(const Dialogue& dialogue);
std::vector<DialogueFragment> extract_fragments(const std::vector<Dialogue>& dialogues);

struct DatasetSplit {
  std::vector<DialogueFragment> train;
  std::vector<DialogueFragment> dev;
  std::vector<DialogueFragment> test;
};

// Seeded shuffle then an 8:1:1 partition (dev and test get round(n/10) each).
// Requires at least 10 fragments.
DatasetSplit split_dataset(const std::vector<DialogueFragment>& fragments, uint64_t seed);

// Index-level splitter shared by split_dataset; usable for size arithmetic
// without materializing fragments.
struct IndexSplit {
  std::vector<size_t> train, dev, test;
};
IndexSplit split_indices(size_t n, uint64_t seed);

// ---- vocabularies ----------------------------------------------------------

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumReserved = 4;

  Vocab();

  // Tokens with frequency >= min_freq enter the vocabulary ordered by
  // descending frequency, ties broken lexicographically.
  static Vocab build(const std::vector<std::vector<std::string>>& sequences, size_t min_freq);

  // Rebuild from a saved id-ordered token list (checkpoint loading).
  static Vocab from_tokens(const std::vector<std::string>& tokens_in_id_order);

  int id(const std::string& token) const;  // kUnk when absent
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  uint64_t hash() const;  // FNV-1a over the id-ordered token list

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

class KnowledgeVocab {
 public:
  static constexpr int kNone = 0;  // stands in for "no elements on this turn"

  KnowledgeVocab();

  // Elements sorted lexicographically after the reserved NONE slot.
  static KnowledgeVocab build(const std::vector<Dialogue>& dialogues);
  static KnowledgeVocab from_elements(const std::vector<std::string>& elements_in_id_order);

  int id(const std::string& element) const;  // throws DomainError on unknown elements
  const std::string& element(int id) const;
  size_t size() const { return elements_.size(); }
  const std::vector<std::string>& elements() const { return elements_; }

 private:
  std::vector<std::string> elements_;
  std::unordered_map<std::string, int> ids_;
};

// ---- corpus files ----------------------------------------------------------
// JSON-lines, UTF-8. An optional leading meta object (recognized by its
// "format_version" key) records the resolved configuration that produced the
// file; data lines follow the documented schema. Loaders accept files with or
// without the meta line; writers always emit it.

constexpr int kCorpusFormatVersion = 1;

void save_corpus(const std::string& path, const std::vector<Dialogue>& dialogues,
                 const std::string& config_json = "{}");
std::vector<Dialogue> load_corpus(const std::string& path);

void save_fragments(const std::string& path, const std::vector<DialogueFragment>& fragments,
                    const std::string& config_json = "{}");
std::vector<DialogueFragment> load_fragments(const std::string& path);

}  // namespace courtqg

#endif  // COURTQG_DATA_HPP
