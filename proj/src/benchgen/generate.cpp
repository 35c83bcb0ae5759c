#include <random>
#include <sstream>

#include "scaf/benchgen/benchgen.hpp"
#include "scaf/ir/text.hpp"

namespace scaf::benchgen {

namespace {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  bool chance(double p) { return p > 0 && std::uniform_real_distribution<double>(0, 1)(gen_) < p; }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }

private:
  std::mt19937_64 gen_;
};

void check_rate(double r, const char *name) {
  if (!(r >= 0 && r <= 1))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

// One chain link: allocate through the next link, return it, and optionally
// report failures on a path after the normal return.
void emit_link(std::ostringstream &os, Rng &rng, const std::string &name, const std::string &next,
               bool error_path, bool executable) {
  os << "func " << name << "(n:scalar, log:ptr) {\n";
  os << "  v = call " << next << (next == "malloc" ? "(n)" : "(n, log)") << "\n";
  switch (rng.below(executable ? 2 : 3)) {
  case 0: os << "  ret v\n"; break;
  case 1: os << "  c = copy v\n  ret c\n"; break;
  default: os << "  z = null\n  r = phi v, z\n  ret r\n"; break;
  }
  if (error_path) {
    if (rng.chance(0.5))
      os << "  call report_error(log)\n";
    else
      os << "  ef = field log, err\n  store ef, log\n";
    os << "  ret null\n";
  }
  os << "}\n\n";
}

// Allocates and then does something a caller can observe.
void emit_complex(std::ostringstream &os, Rng &rng, const std::string &name, const std::string &source) {
  os << "func " << name << "(n:scalar, log:ptr) {\n";
  os << "  p = call " << source << (source == "malloc" ? "(n)" : "(n, log)") << "\n";
  switch (rng.below(3)) {
  case 0: os << "  f = field log, owner\n  store f, p\n"; break;
  case 1: os << "  f = field p, release\n  store f, @free\n"; break;
  default: os << "  call report_error(log)\n"; break;
  }
  os << "  ret p\n}\n\n";
}

std::string call_to(const std::string &target, const std::string &receiver) {
  return "  " + receiver + " = call " + target + (target == "malloc" ? "(n)" : "(n, log)") + "\n";
}

} // namespace

const char *to_string(Label label) {
  switch (label) {
  case Label::SCaf: return "S-CAF";
  case Label::CCaf: return "C-CAF";
  case Label::NonAllocator: return "non-allocator";
  }
  return "?";
}

std::set<std::string> GroundTruth::with(Label label) const {
  std::set<std::string> out;
  for (const auto &[n, l] : labels)
    if (l == label)
      out.insert(n);
  return out;
}

std::map<std::string, oracle::Decision> GroundTruth::annotations() const {
  std::map<std::string, oracle::Decision> out;
  for (const auto &[n, l] : labels)
    out[n] = l == Label::SCaf ? oracle::Decision::Ignorable : oracle::Decision::NotIgnorable;
  return out;
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto &[n, l] : labels)
    j[n] = benchgen::to_string(l);
  return j;
}

std::string chain_link(std::size_t index) {
  std::string suffix;
  for (std::size_t i = index + 1; i > 0; i = (i - 1) / 26)
    suffix.insert(suffix.begin(), static_cast<char>('A' + (i - 1) % 26));
  return "Func" + suffix;
}

Generated generate(const GenSpec &spec) {
  check_rate(spec.side_effect_rate, "side_effect_rate");
  check_rate(spec.error_path_rate, "error_path_rate");
  check_rate(spec.icall_rate, "icall_rate");
  const std::size_t depth = spec.wrapper_chain_depth;
  const std::size_t total = spec.functions ? spec.functions : depth;
  if (depth > total)
    throw std::invalid_argument("wrapper chain is deeper than the function count");
  if (spec.forced_error_link && *spec.forced_error_link >= depth)
    throw std::invalid_argument("forced error link lies outside the chain");

  Rng rng(spec.seed);
  Generated g;
  std::ostringstream os;
  os << "entry main\n\nextern malloc kind=alloc_seed\nextern free kind=dealloc\n"
     << "extern report_error kind=sideeffect\n\n";

  // Allocating callees a client or complex function may use.
  std::vector<std::string> sources{"malloc"};
  for (std::size_t i = 0; i < depth; ++i) {
    std::string name = chain_link(i);
    std::string next = i + 1 < depth ? chain_link(i + 1) : "malloc";
    bool error = spec.forced_error_link == i || rng.chance(spec.error_path_rate);
    emit_link(os, rng, name, next, error, spec.executable_subset);
    g.truth.labels[name] = Label::SCaf;
    sources.push_back(name);
  }

  std::vector<std::string> complexes, clients;
  for (std::size_t i = depth; i < total; ++i) {
    if (rng.chance(spec.side_effect_rate)) {
      std::string name = "Complex" + std::to_string(complexes.size() + 1);
      emit_complex(os, rng, name, sources[rng.below(sources.size())]);
      g.truth.labels[name] = Label::CCaf;
      complexes.push_back(name);
    } else {
      clients.push_back("client" + std::to_string(clients.size() + 1));
    }
  }
  std::vector<std::string> allocating = sources;
  allocating.insert(allocating.end(), complexes.begin(), complexes.end());

  for (const auto &name : clients) {
    os << "func " << name << "(n:scalar, log:ptr) {\n";
    os << call_to(allocating[rng.below(allocating.size())], "a");
    os << call_to(allocating[rng.below(allocating.size())], "b");
    os << "  af = field a, next\n  store af, b\n  c = load af\n";
    if (!spec.executable_subset && sources.size() > 1 && rng.chance(spec.icall_rate)) {
      const auto &target = sources[1 + rng.below(sources.size() - 1)];
      os << "  fp = field c, op\n  store fp, @" << target << "\n  g = load fp\n";
      os << "  h = icall g(n, log)\n";
    }
    os << "  ret\n}\n\n";
    g.truth.labels[name] = Label::NonAllocator;
  }

  os << "func main(n:scalar) {\n  log = call malloc(n)\n";
  std::size_t k = 0;
  for (std::size_t i = 0; i < allocating.size(); ++i)
    if (allocating[i] != "malloc")
      for (int rep = 0; rep < 2; ++rep)
        os << call_to(allocating[i], "x" + std::to_string(++k));
  for (const auto &c : clients)
    os << "  call " << c << "(n, log)\n";
  os << "  d = call malloc(n)\n  ret\n}\n";
  g.truth.labels["main"] = Label::NonAllocator;

  g.program = ir::parse_program(os.str());
  return g;
}

} // namespace scaf::benchgen
