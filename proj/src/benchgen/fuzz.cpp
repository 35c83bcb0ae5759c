#include <random>
#include <sstream>

#include "scaf/benchgen/benchgen.hpp"
#include "scaf/ir/text.hpp"

namespace scaf::benchgen {

namespace {

struct Signature {
  std::string name;
  std::size_t pointer_params = 0;
};

class BodyBuilder {
public:
  BodyBuilder(std::mt19937_64 &gen, const FuzzOptions &options, const std::vector<Signature> &sigs, std::size_t self)
      : gen_(gen), options_(options), sigs_(sigs), self_(self) {}

  std::string build(std::size_t budget) {
    const Signature &me = sigs_[self_];
    for (std::size_t i = 0; i < me.pointer_params; ++i)
      pool_.push_back("p" + std::to_string(i));
    define("call malloc(n)");
    if (me.name != "main" && roll(10) < 3)
      return wrapper_body();
    while (count_ + 1 < budget)
      statement(budget - count_ - 1);
    if (me.name == "main")
      out_ << "  ret\n";
    else if (roll(8) == 0)
      out_ << "  ret null\n";
    else
      out_ << "  ret " << pick() << "\n";
    return out_.str();
  }

  /// Statements emitted so far, ret included once build() returns.
  std::size_t statements() const { return count_ + 1; }

private:
  std::size_t roll(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
  const std::string &pick() { return pool_[roll(pool_.size())]; }

  std::string fresh() { return "v" + std::to_string(next_++); }

  void define(const std::string &rhs) {
    std::string v = fresh();
    out_ << "  " << v << " = " << rhs << "\n";
    pool_.push_back(v);
    ++count_;
  }

  // Allocate, maybe copy, return.
  std::string wrapper_body() {
    std::string v = pool_.back();
    if (roll(2) == 0) {
      std::string c = fresh();
      out_ << "  " << c << " = copy " << v << "\n";
      v = c;
      ++count_;
    }
    out_ << "  ret " << v << "\n";
    return out_.str();
  }

  std::string args_for(const Signature &s) {
    std::string a = "n";
    for (std::size_t i = 0; i < s.pointer_params; ++i)
      a += ", " + pick();
    return a;
  }

  bool callable(std::size_t target) const {
    if (sigs_[target].name == "main")
      return false;
    return options_.executable ? target < self_ : true;
  }

  void statement(std::size_t room) {
    static const char *fields[] = {"a", "b", "c"};
    switch (roll(options_.executable ? 10 : room < 3 ? 11 : 12)) {
    case 0: define("addr"); return;
    case 1: define("call malloc(n)"); return;
    case 2: define("copy " + pick()); return;
    case 3: define("null"); return;
    case 4: {
      std::string payload;
      switch (roll(4)) {
      case 0: payload = "null"; break;
      case 1: payload = "@" + sigs_[roll(sigs_.size() - 1)].name; break;
      default: payload = pick(); break;
      }
      out_ << "  store " << pick() << ", " << payload << "\n";
      ++count_;
      return;
    }
    case 5: define("load " + pick()); return;
    case 6: define("field " + pick() + ", " + fields[roll(3)]); return;
    case 7:
    case 8: {
      std::vector<std::size_t> targets;
      for (std::size_t i = 0; i < sigs_.size(); ++i)
        if (callable(i))
          targets.push_back(i);
      if (targets.empty()) {
        define("call malloc(n)");
        return;
      }
      const Signature &t = sigs_[targets[roll(targets.size())]];
      define("call " + t.name + "(" + args_for(t) + ")");
      return;
    }
    case 9: {
      out_ << "  call sink(" << pick() << ")\n";
      ++count_;
      return;
    }
    case 10: {
      std::string a = pick(), b = pick();
      define("phi " + a + ", " + b);
      return;
    }
    default: {
      // Function pointer through memory or a copy, then an indirect call.
      const Signature &t = sigs_[roll(sigs_.size() - 1)];
      std::string fp;
      if (roll(2) == 0) {
        define("copy @" + t.name);
        fp = pool_.back();
      } else {
        std::string cell = pick();
        out_ << "  store " << cell << ", @" << t.name << "\n";
        ++count_;
        define("load " + cell);
        fp = pool_.back();
      }
      define("icall " + fp + "(" + args_for(t) + ")");
      return;
    }
    }
  }

  std::mt19937_64 &gen_;
  const FuzzOptions &options_;
  const std::vector<Signature> &sigs_;
  std::size_t self_;
  std::ostringstream out_;
  std::vector<std::string> pool_;
  std::size_t next_ = 0;
  std::size_t count_ = 0;
};

std::pair<std::string, std::size_t> attempt(std::uint64_t seed, const FuzzOptions &options) {
  std::mt19937_64 gen(seed);
  auto roll = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); };

  std::vector<Signature> sigs;
  std::size_t helpers = 1 + roll(4);
  for (std::size_t i = 0; i < helpers; ++i)
    sigs.push_back({"f" + std::to_string(i), roll(3)});
  sigs.push_back({"main", 0});

  // main takes whatever the helpers leave.
  std::size_t budget = options.max_statements > 3 * sigs.size() ? options.max_statements - 3 * sigs.size() : 0;
  std::size_t total = 0;
  std::ostringstream os;
  os << "entry main\n\nextern malloc kind=alloc_seed\nextern sink kind=sideeffect\n";
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    std::size_t share = i + 1 == sigs.size() ? options.max_statements - std::min(options.max_statements, total)
                                             : std::min(budget, 2 + roll(budget / sigs.size() + 1));
    BodyBuilder b(gen, options, sigs, i);
    os << "\nfunc " << sigs[i].name << "(n:scalar";
    for (std::size_t p = 0; p < sigs[i].pointer_params; ++p)
      os << ", p" << p << ":ptr";
    os << ") {\n" << b.build(std::max<std::size_t>(share, 2)) << "}\n";
    budget -= std::min(budget, b.statements());
    total += b.statements();
  }
  return {os.str(), total};
}

} // namespace

ir::Program random_program(std::uint64_t seed, const FuzzOptions &options) {
  // Small budgets can overrun through minimum bodies; reseed until it fits.
  for (std::uint64_t k = 0;; ++k) {
    auto [text, total] = attempt(seed + k * 0x9e3779b97f4a7c15ull, options);
    if (total <= options.max_statements || k == 64)
      return ir::parse_program(text);
  }
}

} // namespace scaf::benchgen
