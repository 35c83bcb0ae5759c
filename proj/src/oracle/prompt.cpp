#include <algorithm>
#include <cctype>
#include <cstdio>

#include "scaf/ir/text.hpp"
#include "scaf/oracle/oracle.hpp"

namespace scaf::oracle {

SideEffectQuery make_query(const ir::Function &fn, const std::vector<ir::SiteId> &sites) {
  SideEffectQuery q;
  q.function_name = fn.name;
  q.source_text = fn.source_text;
  q.ir_body = ir::print_body(fn);
  for (const auto &stmt : fn.body)
    if (std::find(sites.begin(), sites.end(), stmt.site) != sites.end())
      q.flagged_sites.push_back({stmt.site, ir::print_statement(stmt)});
  return q;
}

std::string render_prompt(const SideEffectQuery &query) {
  std::string out =
      "You are reviewing a function that may be a custom memory allocation wrapper.\n"
      "The statements listed under SIDE-EFFECT STATEMENTS may have effects visible to the caller,\n"
      "such as storing pointers into caller-visible memory or calling functions with external effects.\n"
      "Determine whether all such statements reside within error-handling paths, for example\n"
      "branches that run only when allocation fails or when an input is invalid.\n\n";
  out += "FUNCTION: " + query.function_name + "\n\n";
  out += "SOURCE:\n";
  std::string source = query.source_text ? *query.source_text : query.ir_body;
  out += source;
  if (source.empty() || source.back() != '\n')
    out += '\n';
  out += "\nSIDE-EFFECT STATEMENTS:\n";
  for (const auto &f : query.flagged_sites)
    out += "[" + f.site.str() + "] " + f.statement + "\n";
  out += "\nExplain briefly, then finish with a final line that is exactly `ANSWER: YES` if every\n"
         "listed statement lies on an error-handling path, or `ANSWER: NO` otherwise.\n";
  return out;
}

std::string prompt_hash(const std::string &prompt) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : prompt) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::optional<bool> parse_answer(const std::string &reply) {
  std::optional<std::string> last;
  std::size_t start = 0;
  while (start <= reply.size()) {
    std::size_t end = reply.find('\n', start);
    if (end == std::string::npos)
      end = reply.size();
    std::string line = reply.substr(start, end - start);
    std::string upper = line;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (auto pos = upper.find("ANSWER:"); pos != std::string::npos)
      last = upper.substr(pos + 7);
    start = end + 1;
  }
  if (!last)
    return std::nullopt;
  std::string word;
  for (char c : *last) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      word += c;
    else if (!word.empty())
      break;
  }
  if (word == "YES")
    return true;
  if (word == "NO")
    return false;
  return std::nullopt;
}

Decision majority(const std::vector<Vote> &votes) {
  std::size_t yes = std::count_if(votes.begin(), votes.end(), [](const Vote &v) { return v.parsed && v.yes; });
  return 2 * yes > votes.size() ? Decision::Ignorable : Decision::NotIgnorable;
}

} // namespace scaf::oracle
