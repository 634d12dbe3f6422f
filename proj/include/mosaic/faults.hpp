#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/environment.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

struct Outcome {
  double probability;
  Word word;  // executed action sequence; may be empty
};

// Maps each intended action to a finite distribution over executed action
// sequences. Outcomes are stored lexicographically by word with duplicate
// words merged, so downstream choice enumeration is reproducible.
class FaultModel {
 public:
  // table[a] lists (probability, word) pairs for intended action a.
  FaultModel(std::size_t action_count, std::vector<std::vector<Outcome>> table)
      : action_count_(action_count), table_(std::move(table)) {
    if (table_.size() != action_count_)
      fail(errc::bad_distribution, "faults",
           "fault table covers " + std::to_string(table_.size()) + " actions, expected " +
               std::to_string(action_count_));
    for (std::size_t a = 0; a < table_.size(); ++a) normalize(a);
  }

  static FaultModel fault_free(std::size_t action_count) {
    std::vector<std::vector<Outcome>> t(action_count);
    for (std::size_t a = 0; a < action_count; ++a) t[a] = {{1.0, Word{a}}};
    return FaultModel(action_count, std::move(t));
  }

  // Intended action runs twice with probability p, once otherwise.
  static FaultModel sticky(double p, std::size_t action_count) {
    check_probability(p);
    std::vector<std::vector<Outcome>> t(action_count);
    for (std::size_t a = 0; a < action_count; ++a)
      t[a] = {{1.0 - p, Word{a}}, {p, Word{a, a}}};
    return FaultModel(action_count, std::move(t));
  }

  // Intended action is skipped with probability p, runs once otherwise.
  static FaultModel dropped(double p, std::size_t action_count) {
    check_probability(p);
    std::vector<std::vector<Outcome>> t(action_count);
    for (std::size_t a = 0; a < action_count; ++a)
      t[a] = {{p, Word{}}, {1.0 - p, Word{a}}};
    return FaultModel(action_count, std::move(t));
  }

  std::size_t action_count() const { return action_count_; }

  const std::vector<Outcome>& outcomes(Action a) const {
    if (a >= action_count_)
      fail(errc::bad_action_index, "faults",
           "action " + std::to_string(a) + " out of range for " +
               std::to_string(action_count_) + " actions");
    return table_[a];
  }

  std::size_t max_word_length() const {
    std::size_t n = 0;
    for (const auto& outs : table_)
      for (const Outcome& o : outs) n = std::max(n, o.word.size());
    return n;
  }

 private:
  static void check_probability(double p) {
    if (!(p > 0.0 && p < 1.0))
      fail(errc::bad_probability, "faults",
           "fault probability must lie strictly between 0 and 1, got " + std::to_string(p));
  }

  void normalize(std::size_t a) {
    auto& outs = table_[a];
    if (outs.empty())
      fail(errc::bad_distribution, "faults",
           "action " + std::to_string(a) + " has an empty outcome list");
    std::map<Word, double> merged;
    double total = 0.0;
    for (const Outcome& o : outs) {
      if (!(o.probability > 0.0 && o.probability <= 1.0))
        fail(errc::bad_probability, "faults",
             "outcome probability " + std::to_string(o.probability) + " outside (0, 1]");
      for (Action act : o.word)
        if (act >= action_count_)
          fail(errc::bad_action_index, "faults",
               "outcome word uses action " + std::to_string(act) + " out of range");
      merged[o.word] += o.probability;
      total += o.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
      fail(errc::bad_distribution, "faults",
           "outcome probabilities for action " + std::to_string(a) + " sum to " +
               std::to_string(total) + ", expected 1");
    outs.clear();
    for (auto& [word, p] : merged) outs.push_back(Outcome{p, word});
  }

  std::size_t action_count_;
  std::vector<std::vector<Outcome>> table_;
};

}  // namespace mosaic
