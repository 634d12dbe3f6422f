#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/box.hpp"
#include "mosaic/environment.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/rtree.hpp"

namespace mosaic {

struct MdpState {
  Box box;
  bool fail = false;
  int depth = 0;
};

struct WordOutcome {
  double probability = 0.0;
  Word word;
  std::size_t successor = 0;
};

// One nondeterministic choice: the policy-consistent subregion it came from,
// the candidate action tag of that subregion, the executed action, the
// per-word outcomes, and the distribution merged over identical successors.
struct Choice {
  Box provenance;
  std::vector<std::size_t> action_set;
  std::size_t action = 0;
  std::vector<WordOutcome> outcomes;
  std::vector<std::pair<double, std::size_t>> dist;  // (probability, successor)
};

// Layered MDP over abstract states: states carry the depth they were reached
// at, fail states are absorbing sinks without choices, and duplicate
// (box, depth, fail) insertions return the original id.
class AbstractMdp {
 public:
  explicit AbstractMdp(std::size_t dim) : dim_(dim) {}

  std::size_t dimension() const { return dim_; }
  std::size_t state_count() const { return states_.size(); }
  const MdpState& state(std::size_t id) const { return states_.at(id); }
  const std::vector<MdpState>& states() const { return states_; }
  const std::vector<Choice>& choices(std::size_t id) const { return choices_.at(id); }
  const std::vector<std::size_t>& initial() const { return initial_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t find_state(const Box& box, bool fail, int depth) const {
    const auto it = dedup_.find(depth);
    if (it == dedup_.end()) return npos;
    std::size_t found = npos;
    it->second.visit_window(box, [&](const RTree<std::size_t>::Entry& e) {
      if (found != npos) return;
      const MdpState& s = states_[e.value];
      if (s.fail == fail && s.box == box) found = e.value;
    });
    return found;
  }

  // Returns the existing id for a duplicate (box, depth, fail) insertion.
  std::size_t add_state(const Box& box, bool fail, int depth) {
    if (box.size() != dim_)
      fail_err(errc::dim_mismatch,
               "state box dimension " + std::to_string(box.size()) + ", model uses " +
                   std::to_string(dim_));
    const std::size_t existing = find_state(box, fail, depth);
    if (existing != npos) return existing;
    const std::size_t id = states_.size();
    states_.push_back(MdpState{box, fail, depth});
    choices_.emplace_back();
    auto [it, inserted] = dedup_.try_emplace(depth, dim_);
    it->second.insert(box, id);
    (void)inserted;
    return id;
  }

  void add_initial(std::size_t id) {
    check_id(id);
    for (std::size_t s : initial_)
      if (s == id) return;
    initial_.push_back(id);
  }

  std::size_t add_choice(std::size_t id, Choice c) {
    check_id(id);
    if (states_[id].fail)
      fail_err(errc::choice_on_fail_state,
               "state " + std::to_string(id) + " is absorbing (fail)");
    if (c.dist.empty()) fail_err(errc::bad_distribution, "choice has no successors");
    double total = 0.0;
    for (const auto& [p, dst] : c.dist) {
      check_id(dst);
      if (!(p > 0.0 && p <= 1.0))
        fail_err(errc::bad_probability,
                 "transition probability " + std::to_string(p) + " outside (0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      fail_err(errc::bad_distribution,
               "distribution sums to " + std::to_string(total) + ", expected 1");
    choices_[id].push_back(std::move(c));
    return choices_[id].size() - 1;
  }

  std::size_t choice_count() const {
    std::size_t n = 0;
    for (const auto& cs : choices_) n += cs.size();
    return n;
  }

  std::size_t transition_count() const {
    std::size_t n = 0;
    for (const auto& cs : choices_)
      for (const Choice& c : cs) n += c.dist.size();
    return n;
  }

  int max_depth() const {
    int d = 0;
    for (const MdpState& s : states_) d = std::max(d, s.depth);
    return d;
  }

 private:
  void check_id(std::size_t id) const {
    if (id >= states_.size())
      fail_err(errc::bad_distribution, "state id " + std::to_string(id) + " does not exist");
  }

  [[noreturn]] static void fail_err(errc c, const std::string& msg) { fail(c, "mdp", msg); }

  std::size_t dim_;
  std::vector<MdpState> states_;
  std::vector<std::vector<Choice>> choices_;
  std::vector<std::size_t> initial_;
  std::map<int, RTree<std::size_t>> dedup_;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Explicit-state text export: `<states> <choices> <transitions>` header, then
// one `src choice dst prob` line per transition, probabilities with 17
// significant digits. States without stored choices (fail sinks and leaves at
// the horizon) are emitted with a probability-1 self-loop so the file has no
// deadlock states; external checkers require that, and the loop does not
// change any bounded reachability value. A companion .lab file marks init and
// fail states.
inline void export_model(const AbstractMdp& mdp, const std::string& tra_path,
                         const std::string& lab_path) {
  std::ofstream tra(tra_path);
  if (!tra) fail(errc::io_error, "mdp", "cannot open '" + tra_path + "' for writing");
  std::size_t sinks = 0;
  for (std::size_t s = 0; s < mdp.state_count(); ++s)
    if (mdp.choices(s).empty()) ++sinks;
  tra << mdp.state_count() << " " << mdp.choice_count() + sinks << " "
      << mdp.transition_count() + sinks << "\n";
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    const auto& cs = mdp.choices(s);
    if (cs.empty()) {
      tra << s << " 0 " << s << " 1\n";
      continue;
    }
    for (std::size_t j = 0; j < cs.size(); ++j)
      for (const auto& [p, dst] : cs[j].dist)
        tra << s << " " << j << " " << dst << " " << detail::fmt17(p) << "\n";
  }
  std::ofstream lab(lab_path);
  if (!lab) fail(errc::io_error, "mdp", "cannot open '" + lab_path + "' for writing");
  lab << "0=\"init\" 1=\"fail\"\n";
  std::set<std::size_t> init(mdp.initial().begin(), mdp.initial().end());
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    const bool is_init = init.count(s) > 0;
    const bool is_fail = mdp.state(s).fail;
    if (!is_init && !is_fail) continue;
    lab << s << ":";
    if (is_init) lab << " 0";
    if (is_fail) lab << " 1";
    lab << "\n";
  }
}

// Geometry-free MDP as read back from an export; enough structure to check
// reachability and compare against the source model.
struct FlatMdp {
  std::size_t state_count = 0;
  std::vector<bool> fail;
  std::vector<std::size_t> initial;
  // choices[s][j] = list of (probability, successor)
  std::vector<std::vector<std::vector<std::pair<double, std::size_t>>>> choices;
};

inline FlatMdp import_model(const std::string& tra_path, const std::string& lab_path) {
  std::ifstream tra(tra_path);
  if (!tra) fail(errc::io_error, "mdp", "cannot open '" + tra_path + "'");
  FlatMdp m;
  std::size_t n_choices = 0, n_trans = 0;
  if (!(tra >> m.state_count >> n_choices >> n_trans))
    fail(errc::malformed_model, "mdp", "missing header in '" + tra_path + "'");
  m.fail.assign(m.state_count, false);
  m.choices.assign(m.state_count, {});
  std::size_t src = 0, choice = 0, dst = 0;
  double p = 0.0;
  std::size_t lines = 0;
  while (tra >> src >> choice >> dst >> p) {
    ++lines;
    if (src >= m.state_count || dst >= m.state_count)
      fail(errc::malformed_model, "mdp", "transition references unknown state");
    auto& cs = m.choices[src];
    if (choice > cs.size())
      fail(errc::malformed_model, "mdp", "choice indices must be dense per state");
    if (choice == cs.size()) cs.emplace_back();
    cs[choice].emplace_back(p, dst);
  }
  if (lines != n_trans)
    fail(errc::malformed_model, "mdp",
         "header promises " + std::to_string(n_trans) + " transitions, file has " +
             std::to_string(lines));
  std::ifstream lab(lab_path);
  if (!lab) fail(errc::io_error, "mdp", "cannot open '" + lab_path + "'");
  std::string header;
  std::getline(lab, header);
  std::string line;
  while (std::getline(lab, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      fail(errc::malformed_model, "mdp", "bad label line '" + line + "'");
    const std::size_t s = std::stoul(line.substr(0, colon));
    if (s >= m.state_count) fail(errc::malformed_model, "mdp", "label on unknown state");
    std::istringstream rest(line.substr(colon + 1));
    int label = 0;
    while (rest >> label) {
      if (label == 0) m.initial.push_back(s);
      if (label == 1) m.fail[s] = true;
    }
  }
  return m;
}

}  // namespace mosaic
