#include "courtqg/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "json.hpp"

namespace courtqg {

using ordered_json = nlohmann::ordered_json;

const char* role_name(Role role) {
  switch (role) {
    case Role::Judge: return "judge";
    case Role::Plaintiff: return "plaintiff";
    case Role::Defendant: return "defendant";
    case Role::Witness: return "witness";
  }
  throw DomainError("invalid role code " + std::to_string(static_cast<int>(role)));
}

Role role_from_name(const std::string& name) {
  if (name == "judge") return Role::Judge;
  if (name == "plaintiff") return Role::Plaintiff;
  if (name == "defendant") return Role::Defendant;
  if (name == "witness") return Role::Witness;
  throw DomainError("unknown role \"" + name + "\"");
}

namespace {

bool is_terminal_punct(char c) {
  return c == '?' || c == '!' || c == '.' || c == ',' || c == ';';
}

bool is_space_char(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space_char(text[i])) ++i;
    if (i >= text.size()) break;
    size_t start = i;
    while (i < text.size() && !is_space_char(text[i])) ++i;
    std::string piece = text.substr(start, i - start);
    for (char& c : piece)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');

    // Detach terminal punctuation; what pops off last comes first in the text.
    std::string trailing;
    while (!piece.empty() && is_terminal_punct(piece.back())) {
      trailing.push_back(piece.back());
      piece.pop_back();
    }
    if (!piece.empty()) tokens.push_back(piece);
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it)
      tokens.push_back(std::string(1, *it));
  }
  if (tokens.empty()) throw DomainError("empty utterance: no tokens in \"" + text + "\"");
  return tokens;
}

std::vector<DialogueFragment> extract_fragments(const Dialogue& dialogue) {
  std::vector<DialogueFragment> fragments;
  for (size_t p = kMinContextUtterances; p < dialogue.turns.size(); ++p) {
    if (dialogue.turns[p].role != Role::Judge) continue;
    DialogueFragment f;
    f.id = dialogue.id + "#" + std::to_string(p + 1);
    f.context.assign(dialogue.turns.begin(), dialogue.turns.begin() + p);
    f.target = dialogue.turns[p];
    fragments.push_back(std::move(f));
  }
  return fragments;
}

std::vector<DialogueFragment> extract_fragments(const std::vector<Dialogue>& dialogues) {
  std::vector<DialogueFragment> fragments;
  for (const Dialogue& d : dialogues) {
    auto fs = extract_fragments(d);
    fragments.insert(fragments.end(), std::make_move_iterator(fs.begin()),
                     std::make_move_iterator(fs.end()));
  }
  return fragments;
}

IndexSplit split_indices(size_t n, uint64_t seed) {
  if (n < 10)
    throw ConfigError("split requires at least 10 fragments, got " + std::to_string(n));
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const size_t n_dev = (n + 5) / 10;  // round(n/10)
  const size_t n_test = n_dev;
  const size_t n_train = n - n_dev - n_test;

  IndexSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.dev.assign(order.begin() + n_train, order.begin() + n_train + n_dev);
  split.test.assign(order.begin() + n_train + n_dev, order.end());
  return split;
}

DatasetSplit split_dataset(const std::vector<DialogueFragment>& fragments, uint64_t seed) {
  IndexSplit idx = split_indices(fragments.size(), seed);
  DatasetSplit out;
  out.train.reserve(idx.train.size());
  out.dev.reserve(idx.dev.size());
  out.test.reserve(idx.test.size());
  for (size_t i : idx.train) out.train.push_back(fragments[i]);
  for (size_t i : idx.dev) out.dev.push_back(fragments[i]);
  for (size_t i : idx.test) out.test.push_back(fragments[i]);
  return out;
}

// ---- vocabularies ----------------------------------------------------------

namespace {
const std::vector<std::string> kReservedTokens = {"<pad>", "<unk>", "<bos>", "<eos>"};
}

Vocab::Vocab() {
  tokens_ = kReservedTokens;
  for (size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = static_cast<int>(i);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sequences, size_t min_freq) {
  std::map<std::string, size_t> freq;
  for (const auto& seq : sequences)
    for (const auto& tok : seq) ++freq[tok];

  std::vector<std::pair<std::string, size_t>> entries;
  for (const auto& [tok, count] : freq) {
    if (count < min_freq) continue;
    if (std::find(kReservedTokens.begin(), kReservedTokens.end(), tok) != kReservedTokens.end())
      continue;  // reserved ids are never reassigned
    entries.emplace_back(tok, count);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  for (const auto& entry : entries) {
    v.ids_[entry.first] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(entry.first);
  }
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens_in_id_order) {
  if (tokens_in_id_order.size() < kReservedTokens.size() ||
      !std::equal(kReservedTokens.begin(), kReservedTokens.end(), tokens_in_id_order.begin()))
    throw ParseError("vocabulary list does not start with the reserved tokens");
  Vocab v;
  v.tokens_ = tokens_in_id_order;
  v.ids_.clear();
  for (size_t i = 0; i < v.tokens_.size(); ++i) v.ids_[v.tokens_[i]] = static_cast<int>(i);
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& token) const { return ids_.count(token) > 0; }

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= tokens_.size())
    throw DomainError("vocab id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

uint64_t Vocab::hash() const {
  uint64_t h = 1469598103934665603ull;
  for (const std::string& tok : tokens_) {
    for (char c : tok) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  }
  return h;
}

KnowledgeVocab::KnowledgeVocab() {
  elements_ = {"<none>"};
  ids_[elements_[0]] = kNone;
}

KnowledgeVocab KnowledgeVocab::build(const std::vector<Dialogue>& dialogues) {
  std::vector<std::string> uniq;
  for (const Dialogue& d : dialogues)
    for (const Utterance& u : d.turns)
      for (const std::string& e : u.elements) uniq.push_back(e);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  KnowledgeVocab kv;
  for (const std::string& e : uniq) {
    if (e == kv.elements_[0]) continue;
    kv.ids_[e] = static_cast<int>(kv.elements_.size());
    kv.elements_.push_back(e);
  }
  return kv;
}

KnowledgeVocab KnowledgeVocab::from_elements(const std::vector<std::string>& elements_in_id_order) {
  if (elements_in_id_order.empty() || elements_in_id_order[0] != "<none>")
    throw ParseError("knowledge vocabulary list does not start with <none>");
  KnowledgeVocab kv;
  kv.elements_ = elements_in_id_order;
  kv.ids_.clear();
  for (size_t i = 0; i < kv.elements_.size(); ++i)
    kv.ids_[kv.elements_[i]] = static_cast<int>(i);
  return kv;
}

int KnowledgeVocab::id(const std::string& element) const {
  auto it = ids_.find(element);
  if (it == ids_.end()) throw DomainError("unknown knowledge element \"" + element + "\"");
  return it->second;
}

const std::string& KnowledgeVocab::element(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= elements_.size())
    throw DomainError("knowledge element id " + std::to_string(id) + " out of range");
  return elements_[id];
}

// ---- corpus files ----------------------------------------------------------

namespace {

ordered_json turn_to_json(const Utterance& u) {
  ordered_json j;
  j["role"] = role_name(u.role);
  j["text"] = u.text;
  j["elements"] = u.elements;
  return j;
}

Utterance turn_from_json(const ordered_json& j, long line) {
  if (!j.is_object() || !j.contains("role") || !j.contains("text"))
    throw ParseError("turn object must contain \"role\" and \"text\"", line);
  Utterance u;
  try {
    u.role = role_from_name(j.at("role").get<std::string>());
  } catch (const DomainError& e) {
    throw ParseError(e.what(), line);
  }
  u.text = j.at("text").get<std::string>();
  if (j.contains("elements"))
    u.elements = j.at("elements").get<std::vector<std::string>>();
  return u;
}

ordered_json meta_line(const char* kind, const std::string& config_json) {
  ordered_json meta;
  meta["format_version"] = kCorpusFormatVersion;
  meta["kind"] = kind;
  meta["config"] = ordered_json::parse(config_json);
  return meta;
}

bool is_meta(const ordered_json& j) { return j.is_object() && j.contains("format_version"); }

ordered_json parse_line(const std::string& line, long line_no) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open \"" + path + "\" for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open \"" + path + "\" for reading");
  return in;
}

}  // namespace

void save_corpus(const std::string& path, const std::vector<Dialogue>& dialogues,
                 const std::string& config_json) {
  std::ofstream out = open_out(path);
  out << meta_line("corpus", config_json).dump() << "\n";
  for (const Dialogue& d : dialogues) {
    ordered_json j;
    j["dialogue_id"] = d.id;
    ordered_json turns = ordered_json::array();
    for (const Utterance& u : d.turns) turns.push_back(turn_to_json(u));
    j["turns"] = std::move(turns);
    out << j.dump() << "\n";
  }
}

std::vector<Dialogue> load_corpus(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Dialogue> dialogues;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j = parse_line(line, line_no);
    if (is_meta(j)) {
      if (line_no != 1) throw ParseError("meta object allowed only on the first line", line_no);
      continue;
    }
    if (!j.contains("dialogue_id") || !j.contains("turns"))
      throw ParseError("dialogue object must contain \"dialogue_id\" and \"turns\"", line_no);
    Dialogue d;
    d.id = j.at("dialogue_id").get<std::string>();
    for (const auto& t : j.at("turns")) d.turns.push_back(turn_from_json(t, line_no));
    dialogues.push_back(std::move(d));
  }
  return dialogues;
}

void save_fragments(const std::string& path, const std::vector<DialogueFragment>& fragments,
                    const std::string& config_json) {
  std::ofstream out = open_out(path);
  out << meta_line("fragments", config_json).dump() << "\n";
  for (const DialogueFragment& f : fragments) {
    ordered_json j;
    j["id"] = f.id;
    ordered_json ctx = ordered_json::array();
    for (const Utterance& u : f.context) ctx.push_back(turn_to_json(u));
    j["context"] = std::move(ctx);
    j["target"] = turn_to_json(f.target);
    out << j.dump() << "\n";
  }
}

std::vector<DialogueFragment> load_fragments(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<DialogueFragment> fragments;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j = parse_line(line, line_no);
    if (is_meta(j)) {
      if (line_no != 1) throw ParseError("meta object allowed only on the first line", line_no);
      continue;
    }
    if (!j.contains("context") || !j.contains("target"))
      throw ParseError("fragment object must contain \"context\" and \"target\"", line_no);
    DialogueFragment f;
    f.id = j.value("id", "fragment-" + std::to_string(line_no));
    for (const auto& t : j.at("context")) f.context.push_back(turn_from_json(t, line_no));
    f.target = turn_from_json(j.at("target"), line_no);
    fragments.push_back(std::move(f));
  }
  return fragments;
}

}  // namespace courtqg
