#include "courtqg/synth.hpp"

#include <array>

#include "json.hpp"

namespace courtqg {

namespace {

struct QaTemplate {
  Role asked;                       // who the judge addresses (answers come from them)
  std::vector<const char*> question;  // judge phrasings, all ending in "?"
  std::vector<const char*> answer;
};

struct IntentTemplate {
  const char* name;
  std::vector<const char*> elements;  // knowledge elements marked on judge turns
  std::vector<QaTemplate> pairs;
};

const std::vector<IntentTemplate>& intent_pool() {
  static const std::vector<IntentTemplate> pool = {
      {"identity_check",
       {"party_identity", "party_relationship"},
       {{Role::Plaintiff,
         {"Plaintiff, what's your relationship with <person>?",
          "Plaintiff, how did you meet <person>?"},
         {"Friends.", "We are colleagues.", "He is my cousin.", "We met through a mutual friend."}},
        {Role::Defendant,
         {"Defendant, do you know <person>?",
          "Defendant, how long have you known <person>?"},
         {"Yes, I know him.", "Only by name.", "For about ten years."}}}},
      {"evidence_check",
       {"evidence"},
       {{Role::Defendant,
         {"Defendant, is there any evidence to provide to the court?"},
         {"No.", "I submitted the repayment receipts."}},
        {Role::Plaintiff,
         {"Plaintiff, can you provide the loan receipt signed on <date>?"},
         {"Yes, it is attached to the file.", "I lost the original copy."}}}},
      {"loan_amount",
       {"loan_amount"},
       {{Role::Plaintiff,
         {"Plaintiff, how much money did <person> borrow from you?"},
         {"He borrowed <amount>.", "<amount> in total."}},
        {Role::Defendant,
         {"Defendant, do you admit borrowing <amount> on <date>?"},
         {"Yes.", "No, it was less than that."}}}},
      {"loan_purpose",
       {"loan_purpose"},
       {{Role::Plaintiff,
         {"What did <person> borrow money for at that time?"},
         {"To operate a supermarket.", "To pay medical bills.", "To cover a house renovation."}}}},
      {"borrowing_time",
       {"borrowing_time"},
       {{Role::Plaintiff,
         {"Plaintiff, when did <person> borrow the money?"},
         {"On <date>.", "It was around <date>."}},
        {Role::Defendant,
         {"Defendant, did the borrowing happen on <date>?"},
         {"Yes.", "I don't remember the exact date."}}}},
      {"interest_agreement",
       {"interest_rate", "interest_agreement"},
       {{Role::Plaintiff,
         {"Plaintiff, did you agree on interest with <person>?"},
         {"Yes, two percent monthly.", "No interest was agreed."}},
        {Role::Defendant,
         {"Defendant, was there a written interest agreement?"},
         {"No.", "Only a verbal one."}}}},
      {"repayment_status",
       {"repayment"},
       {{Role::Defendant,
         {"Defendant, have you repaid any part of the loan?"},
         {"I repaid <amount> on <date>.", "Nothing yet."}},
        {Role::Plaintiff,
         {"Plaintiff, how much has been repaid so far?"},
         {"Only <amount>.", "Nothing has been repaid."}}}},
      {"spouse_liability",
       {"spouse_liability", "family_expense"},
       {{Role::Defendant,
         {"Defendant, who paid your living expenses with <person>?",
          "Who pays for the family expenses?"},
         {"It is my expenditure.", "Me.", "We split them."}},
        {Role::Plaintiff,
         {"When <person> borrowed money from you, did you agree that it was his personal debt?"},
         {"No.", "Yes."}}}},
      {"gambling_check",
       {"gambling"},
       {{Role::Defendant,
         {"Which circle?"},
         {"Gambling circle.", "A mahjong circle."}},
        {Role::Plaintiff,
         {"Plaintiff, do you know whether <person> participated in gambling?"},
         {"I don't know. I'm not with him.", "I heard rumors but never saw it."}}}},
  };
  return pool;
}

struct SlotFillers {
  std::string person;
  std::string amount;
  std::string amount2;
  std::string date;
  std::string date2;
};

std::string fill_slots(const char* tmpl, const SlotFillers& slots, bool second_take) {
  std::string s(tmpl);
  auto replace_all = [&s](const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all("<person>", slots.person);
  replace_all("<amount>", second_take ? slots.amount2 : slots.amount);
  replace_all("<date>", second_take ? slots.date2 : slots.date);
  return s;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& options) {
  return options[rng.below(options.size())];
}

}  // namespace

std::string SynthConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n_dialogues"] = n_dialogues;
  j["seed"] = seed;
  j["n_persons"] = n_persons;
  j["n_amounts"] = n_amounts;
  j["n_dates"] = n_dates;
  return j.dump();
}

std::vector<Dialogue> generate_synthetic_corpus(
    const SynthConfig& config, std::vector<std::vector<std::string>>* intent_scripts) {
  if (config.n_dialogues < 1) throw ConfigError("n_dialogues must be >= 1");
  Rng rng(config.seed);
  if (intent_scripts) intent_scripts->clear();

  const auto& pool = intent_pool();
  std::vector<Dialogue> dialogues;
  dialogues.reserve(config.n_dialogues);

  for (size_t di = 0; di < config.n_dialogues; ++di) {
    Dialogue d;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "synth_%06zu", di);
      d.id = buf;
    }

    SlotFillers slots;
    slots.person = "<person_" + std::to_string(1 + rng.below(config.n_persons)) + ">";
    slots.amount = "<amount_" + std::to_string(1 + rng.below(config.n_amounts)) + ">";
    slots.amount2 = "<amount_" + std::to_string(1 + rng.below(config.n_amounts)) + ">";
    slots.date = "<date_" + std::to_string(1 + rng.below(config.n_dates)) + ">";
    slots.date2 = "<date_" + std::to_string(1 + rng.below(config.n_dates)) + ">";

    // Intent script: identity check first, then 3-4 distinct follow-up intents.
    std::vector<size_t> follow_ups;
    for (size_t i = 1; i < pool.size(); ++i) follow_ups.push_back(i);
    rng.shuffle(follow_ups);
    const size_t n_follow = 3 + rng.below(2);
    follow_ups.resize(n_follow);

    std::vector<size_t> script_ids;
    script_ids.push_back(0);
    script_ids.insert(script_ids.end(), follow_ups.begin(), follow_ups.end());

    std::vector<std::string> script_names;
    for (const size_t intent_id : script_ids) {
      const IntentTemplate& intent = pool[intent_id];
      script_names.push_back(intent.name);

      // The gambling line of questioning starts from a defendant interjection.
      if (std::string(intent.name) == "gambling_check") {
        Utterance interject;
        interject.role = Role::Defendant;
        interject.text = "I heard the people say they were in the same circle.";
        d.turns.push_back(std::move(interject));
      }

      // 1-2 template pairs per intent (40% chance of a second one).
      std::vector<size_t> pair_order(intent.pairs.size());
      for (size_t i = 0; i < pair_order.size(); ++i) pair_order[i] = i;
      rng.shuffle(pair_order);
      size_t n_pairs = 1;
      if (intent.pairs.size() > 1 && rng.uniform() < 0.4) n_pairs = 2;

      for (size_t k = 0; k < n_pairs; ++k) {
        const QaTemplate& qa = intent.pairs[pair_order[k]];
        const bool second_take = k > 0;

        Utterance q;
        q.role = Role::Judge;
        q.text = fill_slots(pick(rng, qa.question), slots, second_take);
        for (const char* e : intent.elements) q.elements.emplace_back(e);
        d.turns.push_back(std::move(q));

        Utterance a;
        a.role = qa.asked;
        a.text = fill_slots(pick(rng, qa.answer), slots, second_take);
        d.turns.push_back(std::move(a));
      }
    }

    // Occasional witness testimony near the end.
    if (rng.uniform() < 0.25) {
      Utterance q;
      q.role = Role::Judge;
      q.text = fill_slots("Witness, what did you see on <date>?", slots, false);
      q.elements = {"witness_testimony"};
      d.turns.push_back(std::move(q));

      Utterance a;
      a.role = Role::Witness;
      a.text = fill_slots("I saw <person> hand over the cash.", slots, false);
      d.turns.push_back(std::move(a));
    }

    if (intent_scripts) intent_scripts->push_back(std::move(script_names));
    dialogues.push_back(std::move(d));
  }
  return dialogues;
}

}  // namespace courtqg
