#include "elnn/supports.hpp"

#include <algorithm>
#include <iterator>

namespace elnn {

const std::vector<std::size_t>& SupportMap::of(const Axiom& a) const {
  if (auto it = entries.find(a); it != entries.end()) return it->second;
  auto it = kbAxioms.find(a);
  if (it == kbAxioms.end()) throw Error("no support recorded for '" + renderAxiom(a) + "'");
  return it->second;
}

SupportMap extractSupports(const ReasoningTrace& trace) {
  SupportMap sm;
  const auto& kb = trace.kb;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    // Conclusions of step t only ever cite the KB or steps < t.
    std::vector<std::pair<Axiom, std::vector<std::size_t>>> fresh;
    for (const auto& d : trace.steps[t]) {
      std::vector<std::size_t> support;
      for (const auto& p : d.premises) {
        if (auto idx = kb.indexOf(p)) {
          support.push_back(*idx);
        } else if (auto it = sm.entries.find(p); it != sm.entries.end()) {
          support.insert(support.end(), it->second.begin(), it->second.end());
        } else {
          throw InconsistentTrace("step " + std::to_string(t + 1) + ": premise '" + renderAxiom(p) + "' of '" +
                                  renderAxiom(d.conclusion) + "' is neither in the KB nor derived earlier");
        }
      }
      std::sort(support.begin(), support.end());
      support.erase(std::unique(support.begin(), support.end()), support.end());
      fresh.emplace_back(d.conclusion, std::move(support));
    }
    for (auto& [a, s] : fresh) sm.entries.emplace(a, std::move(s));
  }
  for (std::size_t i = 0; i < kb.size(); ++i) sm.kbAxioms.emplace(kb[i], std::vector<std::size_t>{i});
  return sm;
}

std::vector<std::size_t> stepSupportUnion(const ReasoningTrace& trace, const SupportMap& sm, std::size_t t) {
  if (t < 1 || t > trace.steps.size())
    throw Error("stepSupportUnion: step " + std::to_string(t) + " out of range 1.." +
                std::to_string(trace.steps.size()));
  std::vector<std::size_t> out;
  for (const auto& d : trace.steps[t - 1]) {
    const auto& s = sm.of(d.conclusion);
    out.insert(out.end(), s.begin(), s.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string dumpSupports(const ReasoningTrace& trace, const SupportMap& sm) {
  std::string out;
  for (const auto& step : trace.steps) {
    for (const auto& d : step) {
      out += renderAxiom(d.conclusion) + " ::";
      const auto& s = sm.of(d.conclusion);
      for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : " ") + std::to_string(s[i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace elnn
